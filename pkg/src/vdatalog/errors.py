"""Exception types raised by the parser, loaders and checkers."""

from __future__ import annotations


class VDatalogError(Exception):
    """Base class for all user-facing errors."""


class DatalogSyntaxError(VDatalogError):
    def __init__(self, message: str, line: int, column: int, source: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")


class ProgramError(VDatalogError):
    """Well-formed text that violates a semantic rule (arity, declarations, range restriction)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class FactFileError(VDatalogError):
    def __init__(self, message: str, path=None, line: int | None = None, column: int | None = None):
        self.message = message
        self.path = path
        self.line = line
        self.column = column
        loc = ""
        if path is not None:
            loc = f"{path}:"
        if line is not None:
            loc += f"{line}:" + (f"{column}:" if column is not None else "")
        super().__init__(f"{loc} {message}" if loc else message)


class ConfigurationLimitError(VDatalogError):
    """Raised when exhaustive configuration enumeration would exceed a cap."""
