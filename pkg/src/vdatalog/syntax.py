"""Datalog programs with presence-condition annotations.

Grammar accepted by :func:`parse_program`::

    program   := (directive | clause)*
    directive := ".decl" NAME "(" [attr ("," attr)*] ")"
               | ".input" NAME ("," NAME)*
               | ".output" NAME ("," NAME)*
    attr      := NAME ":" ("symbol" | "number")
    clause    := atom [":-" atom ("," atom)*] ["@" pc] "."
    atom      := NAME "(" [term ("," term)*] ")"
    term      := VARIABLE | CONSTANT | "_"
    pc        := disj
    disj      := conj ("\\/" conj)*
    conj      := unary ("/\\" unary)*
    unary     := "!" unary | "(" pc ")" | "True" | "False" | NAME

Identifiers in argument position that start with an uppercase letter are
constants, as are numbers and double-quoted strings; everything else is a
variable.  ``//`` and ``/* */`` comments are ignored.

Feature names live in their own namespace: ``Sea`` as a feature and ``Sea``
as a constant never collide.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from .errors import DatalogSyntaxError, ProgramError
from .pcbdd import BddManager, PresenceCondition

# -- presence-condition AST -------------------------------------------------


@dataclass(frozen=True)
class PcTrue:
    pass


@dataclass(frozen=True)
class PcFalse:
    pass


@dataclass(frozen=True)
class PcId:
    name: str


@dataclass(frozen=True)
class PcNot:
    operand: PcExpr


@dataclass(frozen=True)
class PcAnd:
    left: PcExpr
    right: PcExpr


@dataclass(frozen=True)
class PcOr:
    left: PcExpr
    right: PcExpr


PcExpr = Union[PcTrue, PcFalse, PcId, PcNot, PcAnd, PcOr]

TRUE_EXPR = PcTrue()
FALSE_EXPR = PcFalse()
RESERVED_PC_WORDS = ("True", "False")

# -- Datalog AST ------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    text: str
    is_var: bool

    @classmethod
    def var(cls, name: str) -> Term:
        return cls(name, True)

    @classmethod
    def const(cls, value: str) -> Term:
        return cls(value, False)

    def __str__(self):
        if self.is_var:
            return "_" if self.text.startswith("_#") else self.text
        if _BARE_CONST.fullmatch(self.text):
            return self.text
        escaped = self.text.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> list[str]:
        return [t.text for t in self.args if t.is_var]

    def is_ground(self) -> bool:
        return not any(t.is_var for t in self.args)

    def __str__(self):
        return f"{self.predicate}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: tuple[Atom, ...] = ()
    pc: PcExpr = TRUE_EXPR
    line: int = field(default=0, compare=False)

    @property
    def is_fact(self) -> bool:
        return not self.body

    def __str__(self):
        text = str(self.head)
        if self.body:
            text += " :- " + ", ".join(str(a) for a in self.body)
        if not isinstance(self.pc, PcTrue):
            text += " @ " + print_pc(self.pc)
        return text + "."


@dataclass
class Relation:
    name: str
    attributes: tuple[str, ...]
    is_input: bool = False
    is_output: bool = False

    @property
    def arity(self) -> int:
        return len(self.attributes)


@dataclass
class Program:
    relations: dict[str, Relation] = field(default_factory=dict)
    rules: list[Clause] = field(default_factory=list)
    facts: list[Clause] = field(default_factory=list)
    features: list[str] = field(default_factory=list)

    @property
    def inputs(self) -> list[Relation]:
        return [r for r in self.relations.values() if r.is_input]

    @property
    def outputs(self) -> list[Relation]:
        return [r for r in self.relations.values() if r.is_output]

    def without_pcs(self) -> Program:
        """Copy with every rule and fact PC replaced by ``True``."""
        return Program(
            relations=dict(self.relations),
            rules=_dedup([Clause(c.head, c.body, TRUE_EXPR, c.line) for c in self.rules]),
            facts=_dedup([Clause(c.head, c.body, TRUE_EXPR, c.line) for c in self.facts]),
            features=[],
        )

    def __str__(self):
        lines = []
        for rel in self.relations.values():
            attrs = ", ".join(f"{a}: symbol" for a in rel.attributes)
            lines.append(f".decl {rel.name}({attrs})")
            if rel.is_input:
                lines.append(f".input {rel.name}")
            if rel.is_output:
                lines.append(f".output {rel.name}")
        lines.extend(str(c) for c in self.facts)
        lines.extend(str(c) for c in self.rules)
        return "\n".join(lines) + "\n"


# -- lexer ------------------------------------------------------------------

_BARE_CONST = re.compile(r"[A-Z][A-Za-z0-9_]*|-?[0-9]+")

_TOKEN_SPEC = [
    ("WS", r"[ \t\r\f\v]+"),
    ("NL", r"\n"),
    ("LCOMMENT", r"//[^\n]*"),
    ("BCOMMENT", r"/\*.*?\*/"),
    ("DIRECTIVE", r"\.(?:decl|input|output)(?![A-Za-z0-9_])"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("NUMBER", r"-?[0-9]+(?![A-Za-z_])"),
    ("NAME", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("IF", r":-"),
    ("AND", r"/\\"),
    ("OR", r"\\/"),
    ("NOT", r"!"),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("COMMA", r","),
    ("COLON", r":"),
    ("AT", r"@"),
    ("DOT", r"\."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{n}>{p})" for n, p in _TOKEN_SPEC), re.DOTALL)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str, source: str | None = None, line: int = 1, column: int = 1) -> list[Token]:
    """Split ``text`` into tokens; positions are 1-based and count from ``line``/``column``."""
    tokens = []
    pos = 0
    line_start = -(column - 1)
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            if text.startswith("/*", pos):
                raise DatalogSyntaxError("unterminated block comment", line, col, source)
            if text[pos] == '"':
                raise DatalogSyntaxError("unterminated string", line, col, source)
            raise DatalogSyntaxError(f"unexpected character {text[pos]!r}", line, col, source)
        kind = m.lastgroup
        value = m.group()
        if kind == "NL":
            line += 1
            line_start = m.end()
        elif kind == "BCOMMENT":
            nl = value.count("\n")
            if nl:
                line += nl
                line_start = pos + value.rfind("\n") + 1
        elif kind not in ("WS", "LCOMMENT"):
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


def _unquote(text: str) -> str:
    return re.sub(r"\\(.)", r"\1", text[1:-1])


# -- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token], source: str | None):
        self.tokens = tokens
        self.pos = 0
        self.source = source

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        return DatalogSyntaxError(message, tok.line, tok.column, self.source)

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.tok
        if tok.kind != kind:
            found = tok.text or "end of input"
            raise self.error(f"expected {what or kind.lower()}, found {found!r}")
        self.pos += 1
        return tok

    def accept(self, kind: str) -> Token | None:
        if self.tok.kind == kind:
            self.pos += 1
            return self.tokens[self.pos - 1]
        return None

    # presence conditions

    def pc(self) -> PcExpr:
        left = self.pc_conj()
        while self.accept("OR"):
            left = PcOr(left, self.pc_conj())
        return left

    def pc_conj(self) -> PcExpr:
        left = self.pc_unary()
        while self.accept("AND"):
            left = PcAnd(left, self.pc_unary())
        return left

    def pc_unary(self) -> PcExpr:
        if self.accept("NOT"):
            return PcNot(self.pc_unary())
        if self.accept("LPAREN"):
            inner = self.pc()
            self.expect("RPAREN", "')'")
            return inner
        tok = self.expect("NAME", "feature name")
        if tok.text == "True":
            return TRUE_EXPR
        if tok.text == "False":
            return FALSE_EXPR
        return PcId(tok.text)

    # programs

    def term(self, anon: list[int]) -> Term:
        tok = self.tok
        if tok.kind == "STRING":
            self.pos += 1
            return Term.const(_unquote(tok.text))
        if tok.kind == "NUMBER":
            self.pos += 1
            return Term.const(tok.text)
        if tok.kind == "NAME":
            self.pos += 1
            if tok.text == "_":
                anon[0] += 1
                return Term.var(f"_#{anon[0]}")
            if tok.text[0].isupper():
                return Term.const(tok.text)
            return Term.var(tok.text)
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")

    def atom(self, anon: list[int]) -> Atom:
        name = self.expect("NAME", "predicate name")
        self.expect("LPAREN", "'('")
        args = []
        if not self.accept("RPAREN"):
            args.append(self.term(anon))
            while self.accept("COMMA"):
                args.append(self.term(anon))
            self.expect("RPAREN", "')'")
        return Atom(name.text, tuple(args), name.line, name.column)

    def clause(self) -> Clause:
        anon = [0]
        start = self.tok
        head = self.atom(anon)
        head_anon = anon[0]
        body = []
        if self.accept("IF"):
            body.append(self.atom(anon))
            while self.accept("COMMA"):
                body.append(self.atom(anon))
        pc = TRUE_EXPR
        if self.accept("AT"):
            pc = self.pc()
        self.expect("DOT", "'.'")
        if head_anon:
            raise ProgramError("'_' is not allowed in a clause head", head.line, head.column)
        return Clause(head, tuple(body), pc, start.line)

    def decl(self, program: Program):
        kw = self.expect("DIRECTIVE")
        if kw.text == ".decl":
            name = self.expect("NAME", "relation name")
            self.expect("LPAREN", "'('")
            attrs = []
            if not self.accept("RPAREN"):
                while True:
                    attr = self.expect("NAME", "attribute name")
                    self.expect("COLON", "':'")
                    typ = self.expect("NAME", "attribute type")
                    if typ.text not in ("symbol", "number"):
                        raise self.error(f"unsupported attribute type {typ.text!r}", typ)
                    attrs.append(attr.text)
                    if self.accept("RPAREN"):
                        break
                    self.expect("COMMA", "',' or ')'")
            if name.text in program.relations:
                raise ProgramError(f"relation {name.text} declared twice", name.line, name.column)
            if len(set(attrs)) != len(attrs):
                raise ProgramError(f"duplicate attribute name in {name.text}", name.line, name.column)
            program.relations[name.text] = Relation(name.text, tuple(attrs))
            return []
        names = [self.expect("NAME", "relation name")]
        while self.accept("COMMA"):
            names.append(self.expect("NAME", "relation name"))
        return [(kw.text, tok) for tok in names]


def parse_pc(text: str, source: str | None = None, line: int = 1, column: int = 1) -> PcExpr:
    """Parse a standalone presence condition.

    ``!`` binds tightest, then ``/\\``, then ``\\/``; binary operators
    associate to the left.  ``line``/``column`` offset reported positions,
    which lets fact-file readers point into the original line.
    """
    tokens = tokenize(text, source, line, column)
    parser = _Parser(tokens, source)
    if parser.tok.kind == "EOF":
        raise parser.error("empty presence condition")
    expr = parser.pc()
    if parser.tok.kind != "EOF":
        raise parser.error(f"unexpected {parser.tok.text!r} after presence condition")
    return expr


def parse_program(text: str, source: str | None = None) -> Program:
    """Parse and validate a program.

    Raises :class:`DatalogSyntaxError` for lexical and grammatical problems and
    :class:`ProgramError` for undeclared predicates, arity mismatches,
    non-ground facts and rules whose head variables do not occur in the body.
    """
    parser = _Parser(tokenize(text, source), source)
    program = Program()
    io_directives = []
    clauses: list[Clause] = []
    while parser.tok.kind != "EOF":
        if parser.tok.kind == "DIRECTIVE":
            io_directives.extend(parser.decl(program))
        else:
            clauses.append(parser.clause())

    for kind, tok in io_directives:
        rel = program.relations.get(tok.text)
        if rel is None:
            raise ProgramError(f"{kind} of undeclared relation {tok.text}", tok.line, tok.column)
        if kind == ".input":
            rel.is_input = True
        else:
            rel.is_output = True

    seen_features: dict[str, None] = {}
    for clause in clauses:
        _validate(clause, program.relations)
        for name in pc_features(clause.pc):
            seen_features.setdefault(name)
        (program.facts if clause.is_fact else program.rules).append(clause)
    program.rules = _dedup(program.rules)
    program.facts = _dedup(program.facts)
    program.features = list(seen_features)
    return program


def _validate(clause: Clause, relations: dict[str, Relation]) -> None:
    for atom in (clause.head, *clause.body):
        rel = relations.get(atom.predicate)
        if rel is None:
            raise ProgramError(f"undeclared relation {atom.predicate}", atom.line, atom.column)
        if rel.arity != atom.arity:
            raise ProgramError(
                f"{atom.predicate} has arity {rel.arity} but is used with {atom.arity} arguments",
                atom.line, atom.column)
    head = clause.head
    if clause.is_fact:
        if not head.is_ground():
            raise ProgramError(f"fact {head} is not ground", head.line, head.column)
        return
    bound = {v for atom in clause.body for v in atom.variables()}
    for var in head.variables():
        if var not in bound:
            raise ProgramError(f"head variable {var} does not occur in the body",
                               head.line, head.column)


def _dedup(clauses: list[Clause]) -> list[Clause]:
    # clauses differing only in their PC text are kept apart
    seen = set()
    out = []
    for c in clauses:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


# -- presence-condition utilities -------------------------------------------


def pc_features(expr: PcExpr) -> list[str]:
    """Feature names in order of first occurrence (left to right)."""
    out: dict[str, None] = {}
    stack = [expr]
    while stack:
        e = stack.pop()
        if isinstance(e, PcId):
            out.setdefault(e.name)
        elif isinstance(e, PcNot):
            stack.append(e.operand)
        elif isinstance(e, (PcAnd, PcOr)):
            stack.append(e.right)
            stack.append(e.left)
    return list(out)


def pc_to_bdd(expr: PcExpr, mgr: BddManager) -> PresenceCondition:
    """Compile a syntactic PC; unseen features are registered on the way."""
    if isinstance(expr, PcTrue):
        return mgr.true
    if isinstance(expr, PcFalse):
        return mgr.false
    if isinstance(expr, PcId):
        return mgr.mk_var(expr.name)
    if isinstance(expr, PcNot):
        return mgr.pc_not(pc_to_bdd(expr.operand, mgr))
    if isinstance(expr, PcAnd):
        return mgr.pc_and(pc_to_bdd(expr.left, mgr), pc_to_bdd(expr.right, mgr))
    if isinstance(expr, PcOr):
        return mgr.pc_or(pc_to_bdd(expr.left, mgr), pc_to_bdd(expr.right, mgr))
    raise TypeError(f"not a presence condition: {expr!r}")


_PREC = {PcOr: 1, PcAnd: 2, PcNot: 3}


def print_pc(expr: PcExpr | PresenceCondition) -> str:
    """Render a PC in the surface syntax accepted by :func:`parse_pc`.

    Syntactic PCs keep their tree shape (only necessary parentheses are
    emitted); BDD-backed PCs are printed as a sum of products.
    """
    if isinstance(expr, PresenceCondition):
        return expr.manager.to_text(expr)
    return _print(expr)


def _print(e: PcExpr) -> str:
    if isinstance(e, PcTrue):
        return "True"
    if isinstance(e, PcFalse):
        return "False"
    if isinstance(e, PcId):
        return e.name
    if isinstance(e, PcNot):
        inner = _print(e.operand)
        if isinstance(e.operand, (PcAnd, PcOr)):
            inner = f"({inner})"
        return "!" + inner
    prec = _PREC[type(e)]
    left = _print(e.left)
    right = _print(e.right)
    if _PREC.get(type(e.left), 4) < prec:
        left = f"({left})"
    if _PREC.get(type(e.right), 4) <= prec:
        right = f"({right})"
    op = " /\\ " if isinstance(e, PcAnd) else " \\/ "
    return left + op + right
