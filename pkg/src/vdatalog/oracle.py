"""Ground truth for lifted inference.

Plain Datalog evaluation here is written from scratch with dictionary
substitutions and shares no evaluation code with :mod:`vdatalog.engine`,
so the two can be played against each other:

    for every valid configuration c:
        restrict(lifted_infer(EDB), c) == plain_infer(program_c, restrict(EDB, c))
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from . import engine
from .errors import ConfigurationLimitError
from .pcbdd import BddManager, Configuration, PresenceCondition
from .syntax import Atom, Clause, Program, pc_to_bdd

PlainRelations = dict[str, set[tuple[str, ...]]]

DEFAULT_MAX_FEATURES = 16


def _match(atom: Atom, fact: tuple[str, ...], subst: dict[str, str]) -> dict[str, str] | None:
    out = subst
    for term, value in zip(atom.args, fact):
        if term.is_var:
            bound = out.get(term.text)
            if bound is None:
                if out is subst:
                    out = dict(subst)
                out[term.text] = value
            elif bound != value:
                return None
        elif term.text != value:
            return None
    return out


def _ground(atom: Atom, subst: dict[str, str]) -> tuple[str, ...]:
    return tuple(subst[t.text] if t.is_var else t.text for t in atom.args)


def _groundings(body, sources, subst):
    if not body:
        yield subst
        return
    atom, rest = body[0], body[1:]
    for fact in sources[0]:
        s = _match(atom, fact, subst)
        if s is not None:
            yield from _groundings(rest, sources[1:], s)


def _initial(program: Program, edb: Mapping[str, set]) -> PlainRelations:
    db: PlainRelations = {name: set() for name in program.relations}
    for name, facts in edb.items():
        arity = program.relations[name].arity
        for f in facts:
            f = tuple(f)
            if len(f) != arity:
                raise ValueError(f"{name} expects {arity}-tuples, got {f!r}")
            db[name].add(f)
    for fact in program.facts:
        db[fact.head.predicate].add(tuple(t.text for t in fact.head.args))
    return db


def naive_infer(program: Program, edb: Mapping[str, set]) -> PlainRelations:
    """Least model by re-running every rule on everything until nothing changes."""
    db = _initial(program, edb)
    changed = True
    while changed:
        changed = False
        for rule in program.rules:
            sources = [list(db[a.predicate]) for a in rule.body]
            new = {_ground(rule.head, s) for s in _groundings(rule.body, sources, {})}
            target = db[rule.head.predicate]
            if not new <= target:
                target |= new
                changed = True
    return db


def plain_infer(program: Program, edb: Mapping[str, set]) -> PlainRelations:
    """Least model by semi-naive evaluation; rule and fact PCs are ignored.

    Each round joins the previous round's new facts at one body position
    and the full relations elsewhere; lookups on the first bound column go
    through per-round hash indexes.
    """
    db = _initial(program, edb)
    delta = {name: set(facts) for name, facts in db.items()}
    while any(delta.values()):
        indexes: dict[tuple[str, int], dict[str, list]] = {}
        new: PlainRelations = {name: set() for name in db}
        for rule in program.rules:
            for i, datom in enumerate(rule.body):
                if not delta[datom.predicate]:
                    continue
                for fact in delta[datom.predicate]:
                    s = _match(datom, fact, {})
                    if s is None:
                        continue
                    rest = rule.body[:i] + rule.body[i + 1:]
                    for full in _join_rest(rest, db, s, indexes):
                        head = _ground(rule.head, full)
                        if head not in db[rule.head.predicate]:
                            new[rule.head.predicate].add(head)
        for name, facts in new.items():
            db[name] |= facts
        delta = new
    return db


def _join_rest(body, db, subst, indexes):
    if not body:
        yield subst
        return
    atom, rest = body[0], body[1:]
    col = None
    for j, t in enumerate(atom.args):
        if not t.is_var or t.text in subst:
            col = j
            break
    if col is None:
        candidates = db[atom.predicate]
    else:
        key = (atom.predicate, col)
        index = indexes.get(key)
        if index is None:
            index = {}
            for f in db[atom.predicate]:
                index.setdefault(f[col], []).append(f)
            indexes[key] = index
        t = atom.args[col]
        candidates = index.get(subst[t.text] if t.is_var else t.text, ())
    for fact in candidates:
        s = _match(atom, fact, subst)
        if s is not None:
            yield from _join_rest(rest, db, s, indexes)


def restrict(edb_hat: Mapping, config: Mapping[str, bool]) -> PlainRelations:
    """Keep the tuples whose PC holds under ``config``; drop the PCs.

    ``edb_hat`` maps relation names to ``(tuple, PC)`` pairs or to objects
    with ``items()`` (dicts, annotated relations, a whole database).
    """
    out: PlainRelations = {}
    for name, rel in edb_hat.items():
        pairs = rel.items() if hasattr(rel, "items") else rel
        kept = set()
        for values, pc in pairs:
            if pc.manager.evaluate(pc, config):
                kept.add(tuple(values))
        out[name] = kept
    return out


def restrict_program(program: Program, config: Mapping[str, bool], mgr: BddManager) -> Program:
    """Rules and inline facts whose PC holds under ``config``, PCs reset to True."""
    def keep(c: Clause) -> bool:
        return mgr.evaluate(pc_to_bdd(c.pc, mgr), config)

    restricted = Program(relations=dict(program.relations),
                         rules=[c for c in program.rules if keep(c)],
                         facts=[c for c in program.facts if keep(c)],
                         features=list(program.features))
    return restricted.without_pcs()


@dataclass
class Counterexample:
    configuration: Configuration
    relation: str
    missing: set[tuple[str, ...]]   # in the per-configuration result only
    extra: set[tuple[str, ...]]     # in the restricted lifted result only
    lifted_pcs: dict[tuple[str, ...], PresenceCondition] = field(default_factory=dict)

    def describe(self, delimiter: str = "\t") -> str:
        from .facts_io import format_fact
        lines = [f"configuration {self.configuration!r}: relation {self.relation} differs"]
        for values in sorted(self.missing):
            lines.append("missing " + format_fact(values, None, delimiter))
        for values in sorted(self.extra):
            lines.append("extra   " + format_fact(values, self.lifted_pcs.get(values), delimiter))
        return "\n".join(lines)


@dataclass
class CheckResult:
    passed: bool
    configurations: int
    counterexample: Counterexample | None = None
    lifted: engine.Database | None = None

    def __bool__(self):
        return self.passed


def check_theorem1(program: Program, edb_hat: Mapping, fm: PresenceCondition,
                   manager: BddManager | None = None, config: engine.EngineConfig | None = None,
                   max_features: int = DEFAULT_MAX_FEATURES,
                   max_configurations: int | None = None) -> CheckResult:
    """Compare lifted inference with plain inference in every valid configuration.

    The lifted side runs :func:`vdatalog.engine.infer` once; the plain side
    runs :func:`plain_infer` on the restricted program and facts for each
    configuration of ``fm`` over all registered features.  Stops at the
    first mismatching relation.
    """
    mgr = manager or fm.manager
    if config is None:
        config = engine.EngineConfig(feature_model=fm)
    # register every feature the program mentions before enumerating
    for c in (*program.rules, *program.facts):
        pc_to_bdd(c.pc, mgr)
    nfeatures = len(mgr.features)
    if nfeatures > max_features:
        raise ConfigurationLimitError(
            f"{nfeatures} features exceed the exhaustive-check limit of {max_features}")

    lifted = engine.infer(program, edb_hat, mgr, config)
    if not config.sat_pruning:
        lifted = engine.post_prune(lifted, fm)
    checked = 0
    for rho in mgr.enumerate_configurations(fm, limit=max_configurations):
        checked += 1
        expected = plain_infer(restrict_program(program, rho, mgr), restrict(edb_hat, rho))
        got = restrict(lifted, rho)
        for name in program.relations:
            if got[name] != expected[name]:
                cex = Counterexample(rho, name, expected[name] - got[name],
                                     got[name] - expected[name], lifted[name].to_dict())
                return CheckResult(False, checked, cex, lifted)
    return CheckResult(True, checked, None, lifted)
