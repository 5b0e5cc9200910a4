"""Lifted bottom-up inference.

Every stored tuple carries a presence condition (PC).  A rule firing on
premises with PCs ``p1 .. pn`` under a rule PC ``pr`` proposes its head with
``pr & p1 & ... & pn``; the proposal is dropped when it cannot hold in any
configuration admitted by the feature model, and otherwise merged into the
head relation by disjunction.

Evaluation is semi-naive.  A tuple belongs to the next delta exactly when
its insert enlarged its configuration set, i.e. the stored PC changed node.
Each round evaluates every rule once per body position, with that position
reading the delta and all other positions reading the full relations as
they stood at the start of the round.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field

from .pcbdd import FALSE, TRUE, BddManager, PresenceCondition
from .syntax import Clause, Program, pc_to_bdd

log = logging.getLogger(__name__)


class SymbolTable:
    """Interns constant symbols to dense integer ids."""

    def __init__(self):
        self._ids: dict[str, int] = {}
        self._names: list[str] = []

    def intern(self, name: str) -> int:
        i = self._ids.get(name)
        if i is None:
            i = len(self._names)
            self._ids[name] = i
            self._names.append(name)
        return i

    def lookup(self, name: str) -> int | None:
        return self._ids.get(name)

    def resolve(self, i: int) -> str:
        return self._names[i]

    def __len__(self):
        return len(self._names)


class AnnotatedRelation:
    """Map from ground tuples to presence conditions.

    The public methods speak in tuples of strings; tuples are stored as
    interned ids.  Each tuple has at most one entry, and re-inserting a tuple
    disjoins the PCs.
    """

    def __init__(self, name: str, arity: int, manager: BddManager,
                 symbols: SymbolTable | None = None):
        self.name = name
        self.arity = arity
        self.manager = manager
        self.symbols = symbols if symbols is not None else SymbolTable()
        self._store: dict[tuple[int, ...], PresenceCondition] = {}
        self._indexes: dict[tuple[int, ...], dict[tuple[int, ...], list[tuple[int, ...]]]] = {}

    def _encode(self, values, intern: bool) -> tuple[int, ...] | None:
        values = tuple(values)
        if len(values) != self.arity:
            raise ValueError(f"{self.name} has arity {self.arity}, got a {len(values)}-tuple")
        if intern:
            return tuple(self.symbols.intern(v) for v in values)
        ids = []
        for v in values:
            i = self.symbols.lookup(v)
            if i is None:
                return None
            ids.append(i)
        return tuple(ids)

    def _decode(self, key: tuple[int, ...]) -> tuple[str, ...]:
        resolve = self.symbols.resolve
        return tuple(resolve(i) for i in key)

    def exists(self, values) -> PresenceCondition | None:
        """Stored PC of ``values``, or ``None`` when the tuple is absent."""
        key = self._encode(values, intern=False)
        if key is None:
            return None
        return self._store.get(key)

    def insert(self, values, pc: PresenceCondition) -> bool:
        """Add ``values`` under ``pc``; return whether its configuration set grew."""
        return self._insert(self._encode(values, intern=True), pc)

    def _insert(self, key: tuple[int, ...], pc: PresenceCondition) -> bool:
        if pc.manager is not self.manager:
            raise ValueError("presence condition belongs to a different BDD manager")
        if pc.root == FALSE:
            raise ValueError(f"refusing to store an unsatisfiable PC for {self.name}{key}")
        old = self._store.get(key)
        if old is None:
            self._store[key] = pc
            for cols, index in self._indexes.items():
                index.setdefault(tuple([key[c] for c in cols]), []).append(key)
            return True
        merged = old | pc
        if merged is old:
            return False
        self._store[key] = merged
        return True

    def _index(self, cols: tuple[int, ...]):
        index = self._indexes.get(cols)
        if index is None:
            index = {}
            for key in self._store:
                index.setdefault(tuple([key[c] for c in cols]), []).append(key)
            self._indexes[cols] = index
        return index

    def items(self) -> Iterator[tuple[tuple[str, ...], PresenceCondition]]:
        for key, pc in self._store.items():
            yield self._decode(key), pc

    def tuples(self) -> set[tuple[str, ...]]:
        return {self._decode(k) for k in self._store}

    def to_dict(self) -> dict[tuple[str, ...], PresenceCondition]:
        return dict(self.items())

    def copy(self) -> AnnotatedRelation:
        other = AnnotatedRelation(self.name, self.arity, self.manager, self.symbols)
        other._store = dict(self._store)
        return other

    def __iter__(self):
        for key in self._store:
            yield self._decode(key)

    def __contains__(self, values):
        return self.exists(values) is not None

    def __len__(self):
        return len(self._store)

    def __repr__(self):
        return f"AnnotatedRelation({self.name}/{self.arity}, {len(self)} tuples)"


@dataclass
class EngineConfig:
    """Knobs for :func:`infer`.

    ``feature_model`` defaults to ``True``.  With ``sat_pruning`` off, no
    candidate is checked against the feature model; run :func:`post_prune`
    afterwards to drop facts that hold in no valid configuration.
    """

    feature_model: PresenceCondition | None = None
    sat_pruning: bool = True
    conjoin_fm_into_stored_pcs: bool = False


@dataclass
class InferenceStats:
    iterations: int = 0
    sat_checks: int = 0
    candidates: int = 0
    pruned: int = 0
    inserts: int = 0
    bdd_nodes: int = 0

    def relation_sizes(self, db: Database) -> dict[str, int]:
        return {name: len(rel) for name, rel in db.items()}


@dataclass
class Database(Mapping):
    """Result of :func:`infer`: all relations of a program, keyed by name."""

    relations: dict[str, AnnotatedRelation]
    manager: BddManager
    symbols: SymbolTable
    stats: InferenceStats = field(default_factory=InferenceStats)

    def __getitem__(self, name):
        return self.relations[name]

    def __iter__(self):
        return iter(self.relations)

    def __len__(self):
        return len(self.relations)

    def to_dict(self) -> dict[str, dict[tuple[str, ...], PresenceCondition]]:
        return {name: rel.to_dict() for name, rel in self.relations.items()}


# -- join compilation -------------------------------------------------------


@dataclass
class _Step:
    relation: str
    lookup_cols: tuple[int, ...]
    # per lookup column: ("c", const_id) or ("v", slot)
    lookup_src: tuple[tuple[str, int], ...]
    binds: tuple[tuple[int, int], ...]
    same: tuple[tuple[int, int], ...]


class CompiledRule:
    """A rule lowered to join plans over interned ids, one plan per body position."""

    def __init__(self, rule: Clause, pc: PresenceCondition, symbols: SymbolTable):
        self.rule = rule
        self.pc = pc
        slots: dict[str, int] = {}
        for atom in rule.body:
            for t in atom.args:
                if t.is_var and t.text not in slots:
                    slots[t.text] = len(slots)
        self.nslots = len(slots)
        self.head_relation = rule.head.predicate
        self.head = tuple(
            (True, slots[t.text]) if t.is_var else (False, symbols.intern(t.text))
            for t in rule.head.args
        )
        self.body_relations = [a.predicate for a in rule.body]
        self.plans = []
        for first in range(len(rule.body)):
            order = [first] + [i for i in range(len(rule.body)) if i != first]
            self.plans.append(self._plan(order, slots, symbols))
        self.full_plan = self._plan(list(range(len(rule.body))), slots, symbols)

    def _plan(self, order, slots, symbols) -> list[_Step]:
        bound: set[int] = set()
        steps = []
        for pos in order:
            atom = self.rule.body[pos]
            lookup_cols, lookup_src, binds, same = [], [], [], []
            first_col: dict[int, int] = {}
            for col, t in enumerate(atom.args):
                if not t.is_var:
                    lookup_cols.append(col)
                    lookup_src.append(("c", symbols.intern(t.text)))
                    continue
                slot = slots[t.text]
                if slot in bound:
                    lookup_cols.append(col)
                    lookup_src.append(("v", slot))
                elif slot in first_col:
                    same.append((first_col[slot], col))
                else:
                    first_col[slot] = col
                    binds.append((col, slot))
            bound.update(first_col)
            steps.append(_Step(atom.predicate, tuple(lookup_cols), tuple(lookup_src),
                               tuple(binds), tuple(same)))
        return steps

    def resolve(self, mgr: BddManager, full: Mapping[str, AnnotatedRelation],
                delta: Mapping[str, Mapping[tuple[int, ...], PresenceCondition]] | None,
                start: int = TRUE) -> Iterator[tuple[tuple[int, ...], int]]:
        """Yield ``(head key, PC root)`` for each grounding of the body.

        With ``delta`` given, only groundings that read at least one delta
        tuple are produced (one plan per position reading the delta).
        ``delta=None`` produces every grounding over ``full``.
        """
        root = mgr._and(start, self.pc.root)
        if root == FALSE:
            return
        if delta is None:
            yield from self._run(mgr, self.full_plan, full, None, root)
            return
        for plan in self.plans:
            d = delta.get(plan[0].relation)
            if d:
                yield from self._run(mgr, plan, full, d, root)

    def _run(self, mgr, plan, full, first_delta, root):
        and_ = mgr._and
        env = [0] * self.nslots
        head = self.head
        nsteps = len(plan)
        sources = []
        for k, step in enumerate(plan):
            rel = full[step.relation]
            if k == 0 and first_delta is not None:
                sources.append((first_delta, None))
            elif step.lookup_cols:
                sources.append((rel._store, rel._index(step.lookup_cols)))
            else:
                sources.append((rel._store, None))

        def rec(k, pc):
            if k == nsteps:
                yield tuple([env[v] if is_var else v for is_var, v in head]), pc
                return
            step = plan[k]
            store, index = sources[k]
            if index is not None:
                key = tuple([env[v] if kind == "v" else v for kind, v in step.lookup_src])
                candidates = index.get(key, ())
                filter_cols = ()
            else:
                candidates = store
                filter_cols = step.lookup_cols
            for tup in candidates:
                if filter_cols:
                    ok = True
                    for col, (kind, v) in zip(filter_cols, step.lookup_src):
                        if tup[col] != (env[v] if kind == "v" else v):
                            ok = False
                            break
                    if not ok:
                        continue
                if step.same and any(tup[a] != tup[b] for a, b in step.same):
                    continue
                p = and_(pc, store[tup].root)
                if p == FALSE:
                    continue
                for col, slot in step.binds:
                    env[slot] = tup[col]
                yield from rec(k + 1, p)

        yield from rec(0, root)


# -- evaluation -------------------------------------------------------------


def _normalize_facts(facts) -> Iterable:
    if hasattr(facts, "items"):
        return facts.items()
    return facts


def _empty_relations(program: Program, mgr: BddManager, symbols: SymbolTable):
    return {name: AnnotatedRelation(name, rel.arity, mgr, symbols)
            for name, rel in program.relations.items()}


def infer(program: Program, edb: Mapping[str, Iterable] | None, manager: BddManager,
          config: EngineConfig | None = None) -> Database:
    """Compute the least PC-annotated model of ``program`` over ``edb``.

    ``edb`` maps relation names to ``(tuple, PC)`` pairs, or to anything with
    an ``items()`` method producing them (dicts, :class:`AnnotatedRelation`).
    Inline program facts are added with their own PCs.  Input facts whose PC
    is unsatisfiable, or unsatisfiable under the feature model when pruning
    is on, are dropped.
    """
    config = config or EngineConfig()
    mgr = manager
    fm = config.feature_model if config.feature_model is not None else mgr.true
    if fm.manager is not mgr:
        raise ValueError("feature model belongs to a different BDD manager")
    fm_root = fm.root
    pruning = config.sat_pruning
    conjoin = config.conjoin_fm_into_stored_pcs
    symbols = SymbolTable()
    relations = _empty_relations(program, mgr, symbols)
    stats = InferenceStats()
    handle = mgr._handle
    and_, or_ = mgr._and, mgr._or

    pending: dict[str, dict[tuple[int, ...], int]] = {name: {} for name in relations}

    def propose(rel_name, key, root):
        stats.candidates += 1
        if root == FALSE:
            stats.pruned += 1
            return
        if pruning:
            stats.sat_checks += 1
            with_fm = and_(root, fm_root)
            if with_fm == FALSE:
                stats.pruned += 1
                return
            if conjoin:
                root = with_fm
        elif conjoin:
            root = and_(root, fm_root)
            if root == FALSE:
                stats.pruned += 1
                return
        bucket = pending[rel_name]
        old = bucket.get(key)
        bucket[key] = root if old is None else or_(old, root)

    def flush() -> dict[str, dict[tuple[int, ...], PresenceCondition]]:
        delta: dict[str, dict[tuple[int, ...], PresenceCondition]] = {}
        for rel_name, bucket in pending.items():
            if not bucket:
                continue
            rel = relations[rel_name]
            store = rel._store
            changed = {}
            for key, root in bucket.items():
                if rel._insert(key, handle(root)):
                    stats.inserts += 1
                    changed[key] = store[key]
            bucket.clear()
            if changed:
                delta[rel_name] = changed
        return delta

    for name, facts in (edb or {}).items():
        if name not in relations:
            raise ValueError(f"EDB relation {name} is not declared by the program")
        rel = relations[name]
        for values, pc in _normalize_facts(facts):
            if pc.manager is not mgr:
                raise ValueError("input presence condition belongs to a different BDD manager")
            propose(name, rel._encode(values, intern=True), pc.root)
    for fact in program.facts:
        key = tuple(symbols.intern(t.text) for t in fact.head.args)
        propose(fact.head.predicate, key, pc_to_bdd(fact.pc, mgr).root)

    rules = [CompiledRule(r, pc_to_bdd(r.pc, mgr), symbols) for r in program.rules]
    delta = flush()
    while delta:
        stats.iterations += 1
        for rule in rules:
            head = rule.head_relation
            for key, root in rule.resolve(mgr, relations, delta):
                propose(head, key, root)
        delta = flush()
        log.debug("round %d: %d changed tuples", stats.iterations,
                  sum(len(d) for d in delta.values()))

    stats.bdd_nodes = mgr.node_count()
    return Database(relations, mgr, symbols, stats)


def resolve_rule(rule: Clause, relations: Mapping[str, AnnotatedRelation],
                 delta: Mapping[str, AnnotatedRelation] | None,
                 manager: BddManager) -> Iterator[tuple[tuple[str, ...], PresenceCondition]]:
    """Ground ``rule`` against ``relations`` and yield ``(head tuple, PC)`` pairs.

    The PC is the rule PC conjoined with every matched premise PC, without
    the feature model.  When ``delta`` is given, only groundings touching at
    least one delta tuple are produced.  All relations must share one
    symbol table.
    """
    symbols = None
    for rel in relations.values():
        symbols = rel.symbols
        break
    if symbols is None:
        return
    compiled = CompiledRule(rule, pc_to_bdd(rule.pc, manager), symbols)
    delta_ids = None
    if delta is not None:
        delta_ids = {}
        for name, rel in delta.items():
            enc = relations[name]._encode
            delta_ids[name] = {enc(values, intern=True): pc for values, pc in _normalize_facts(rel)}
    for key, root in compiled.resolve(manager, relations, delta_ids):
        yield tuple(symbols.resolve(i) for i in key), manager._handle(root)


def post_prune(db: Database, fm: PresenceCondition) -> Database:
    """Drop every tuple whose PC is unsatisfiable together with ``fm``.

    Surviving PCs are kept unchanged.
    """
    mgr = db.manager
    pruned = {}
    for name, rel in db.relations.items():
        out = AnnotatedRelation(name, rel.arity, mgr, rel.symbols)
        for key, pc in rel._store.items():
            if (pc & fm).satisfiable:
                out._store[key] = pc
        pruned[name] = out
    return Database(pruned, mgr, db.symbols, db.stats)
