"""Reading and writing PC-annotated fact files.

One tuple per line, fields separated by a delimiter (TAB unless told
otherwise).  An optional last field starting with an unquoted ``@`` holds
the tuple's presence condition::

    Athens<TAB>Rome<TAB>@Sea
    NYC<TAB>Athens<TAB>@!Land
    Rome<TAB>Toronto

A field may be wrapped in double quotes; inside quotes the delimiter is
literal and ``""`` stands for one quote.  Constants that start with ``@``
must be quoted.  Nullary relations are written as the line ``()``,
optionally followed by a PC field.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from .errors import DatalogSyntaxError, FactFileError
from .pcbdd import BddManager, PresenceCondition
from .syntax import TRUE_EXPR, PcExpr, Program, Relation, parse_pc, pc_to_bdd

DEFAULT_DELIMITER = "\t"
FACT_SUFFIX = ".facts"
OUTPUT_SUFFIX = ".csv"
NULLARY = "()"


@dataclass(frozen=True)
class FactRecord:
    values: tuple[str, ...]
    pc: PcExpr = TRUE_EXPR
    line: int = 0


def split_fields(line: str, delimiter: str) -> list[tuple[str, bool, int]]:
    """Split one line into ``(text, was_quoted, start_column)`` triples.

    Columns are 0-based offsets into ``line``.
    """
    fields = []
    i = 0
    n = len(line)
    while True:
        start = i
        if i < n and line[i] == '"':
            buf = []
            i += 1
            while True:
                if i >= n:
                    raise ValueError(f"unterminated quoted field at column {start + 1}")
                ch = line[i]
                if ch == '"':
                    if i + 1 < n and line[i + 1] == '"':
                        buf.append('"')
                        i += 2
                        continue
                    i += 1
                    break
                buf.append(ch)
                i += 1
            if i < n and not line.startswith(delimiter, i):
                raise ValueError(f"text after closing quote at column {i + 1}")
            fields.append(("".join(buf), True, start))
        else:
            j = line.find(delimiter, i)
            end = n if j < 0 else j
            fields.append((line[i:end], False, start))
            i = end
        if i >= n:
            return fields
        i += len(delimiter)
        if i >= n:
            fields.append(("", False, i))
            return fields


def _quote(field: str, delimiter: str) -> str:
    if (not field or delimiter in field or '"' in field or field.startswith("@")
            or field != field.strip() or field == NULLARY):
        return '"' + field.replace('"', '""') + '"'
    return field


def parse_fact_line(line: str, arity: int, delimiter: str = DEFAULT_DELIMITER,
                    lineno: int = 0, path=None) -> FactRecord:
    try:
        fields = split_fields(line, delimiter)
    except ValueError as exc:
        raise FactFileError(str(exc), path, lineno) from None
    pc: PcExpr = TRUE_EXPR
    last_text, last_quoted, last_col = fields[-1]
    if not last_quoted and last_text.lstrip().startswith("@"):
        offset = last_col + len(last_text) - len(last_text.lstrip()) + 1
        try:
            pc = parse_pc(last_text.lstrip()[1:], line=lineno, column=offset + 1)
        except DatalogSyntaxError as exc:
            raise FactFileError(f"bad presence condition: {exc.message}", path,
                                exc.line, exc.column) from None
        fields = fields[:-1]
    values = tuple(text for text, _, _ in fields)
    if arity == 0 and values in ((NULLARY,), ()):
        values = ()
    if len(values) != arity:
        raise FactFileError(f"expected {arity} fields, found {len(values)}", path, lineno)
    return FactRecord(values, pc, lineno)


def read_facts(path, decl: Relation, delimiter: str = DEFAULT_DELIMITER) -> list[FactRecord]:
    """Read every nonempty line of ``path`` as a fact of ``decl``."""
    records = []
    try:
        fh = open(path, encoding="utf-8", newline="")
    except FileNotFoundError:
        raise FactFileError(f"missing fact file for relation {decl.name}", path) from None
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            records.append(parse_fact_line(line, decl.arity, delimiter, lineno, path))
    return records


def format_fact(values, pc: PresenceCondition | None, delimiter: str = DEFAULT_DELIMITER) -> str:
    fields = [_quote(v, delimiter) for v in values] or [NULLARY]
    if pc is not None and not pc.is_true:
        fields.append("@" + pc.manager.to_text(pc))
    return delimiter.join(fields)


def format_relation(rel, with_pcs: bool = True, delimiter: str = DEFAULT_DELIMITER) -> str:
    """Serialize ``rel`` (``items()`` of ``(tuple, PC)``) in sorted tuple order."""
    lines = [format_fact(values, pc if with_pcs else None, delimiter)
             for values, pc in sorted(rel.items(), key=lambda item: item[0])]
    return "".join(line + "\n" for line in lines)


def write_facts(path, rel, with_pcs: bool = True, delimiter: str = DEFAULT_DELIMITER) -> int:
    """Write ``rel`` to ``path``; returns the number of bytes written.

    ``True`` PCs are omitted so unannotated output stays plain Datalog.
    """
    data = format_relation(rel, with_pcs, delimiter).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return len(data)


def compile_records(records, mgr: BddManager) -> list[tuple[tuple[str, ...], PresenceCondition]]:
    return [(r.values, pc_to_bdd(r.pc, mgr)) for r in records]


def load_inputs(program: Program, fact_dir, mgr: BddManager,
                delimiter: str = DEFAULT_DELIMITER, ignore_pcs: bool = False):
    """Load ``<fact_dir>/<Name>.facts`` for every ``.input`` relation.

    Files are read in declaration order so features register in a
    deterministic order.
    """
    edb = {}
    for rel in program.inputs:
        records = read_facts(os.path.join(fact_dir, rel.name + FACT_SUFFIX), rel, delimiter)
        if ignore_pcs:
            edb[rel.name] = [(r.values, mgr.true) for r in records]
        else:
            edb[rel.name] = compile_records(records, mgr)
    return edb
