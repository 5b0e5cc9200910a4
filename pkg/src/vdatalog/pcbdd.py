"""Presence conditions as reduced ordered BDDs.

Nodes live in one store per :class:`BddManager` and are identified by
integers: ``0`` is the false terminal, ``1`` the true terminal, interior
nodes are allocated on demand.  A unique table keyed by
``(var, low, high)`` guarantees that every Boolean function has exactly one
node, so equivalence is integer comparison and satisfiability is a check
against the false terminal.

:class:`PresenceCondition` is the user-facing handle.  The manager interns
one handle per root node, which makes ``a is b`` the same test as logical
equivalence.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Mapping

from .errors import ConfigurationLimitError

FALSE = 0
TRUE = 1
TERMINAL_LEVEL = 1 << 62

_AND = 0
_OR = 1
_NOT = 2


class FeatureTable:
    """Feature names in registration order; the order is the BDD variable order."""

    def __init__(self, names=()):
        self.names: list[str] = []
        self.index: dict[str, int] = {}
        for name in names:
            self.register(name)

    def register(self, name: str) -> int:
        pos = self.index.get(name)
        if pos is None:
            pos = len(self.names)
            self.names.append(name)
            self.index[name] = pos
        return pos

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self.index

    def __iter__(self):
        return iter(self.names)


class Configuration(Mapping):
    """A total truth assignment over a fixed tuple of features.

    Immutable and hashable, so configurations can key dictionaries.
    """

    __slots__ = ("features", "values", "_lookup")

    def __init__(self, features, values):
        features = tuple(features)
        values = tuple(bool(v) for v in values)
        if len(features) != len(values):
            raise ValueError("features and values differ in length")
        self.features = features
        self.values = values
        self._lookup = dict(zip(features, values))

    @classmethod
    def from_mapping(cls, assignment: Mapping[str, bool], features=None) -> Configuration:
        if features is None:
            features = list(assignment)
        return cls(features, [assignment[f] for f in features])

    def __getitem__(self, name):
        return self._lookup[name]

    def __iter__(self):
        return iter(self.features)

    def __len__(self):
        return len(self.features)

    def __hash__(self):
        return hash((self.features, self.values))

    def __eq__(self, other):
        if isinstance(other, Configuration):
            return self.features == other.features and self.values == other.values
        return NotImplemented

    def enabled(self) -> list[str]:
        return [f for f, v in zip(self.features, self.values) if v]

    def __repr__(self):
        body = ", ".join(f"{f}={int(v)}" for f, v in zip(self.features, self.values))
        return "{" + body + "}"


class PresenceCondition:
    """Canonical handle for one Boolean function over features.

    Obtain instances from a :class:`BddManager`; never construct directly.
    Handles are interned, so identity (``is``) coincides with equivalence.
    The operators ``&``, ``|`` and ``~`` forward to the owning manager.
    """

    __slots__ = ("root", "manager")

    def __init__(self, root: int, manager: BddManager):
        self.root = root
        self.manager = manager

    def __and__(self, other):
        return self.manager.pc_and(self, other)

    def __or__(self, other):
        return self.manager.pc_or(self, other)

    def __invert__(self):
        return self.manager.pc_not(self)

    @property
    def is_true(self) -> bool:
        return self.root == TRUE

    @property
    def is_false(self) -> bool:
        return self.root == FALSE

    @property
    def satisfiable(self) -> bool:
        return self.root != FALSE

    def implies(self, other: PresenceCondition) -> bool:
        return self.manager.implies(self, other)

    def __str__(self):
        return self.manager.to_text(self)

    def __repr__(self):
        return f"PresenceCondition({self.manager.to_text(self)})"

    def __reduce__(self):
        raise TypeError("PresenceCondition handles are bound to a manager and cannot be pickled")


class BddManager:
    """Hash-consed node store plus an operation cache.

    Nodes are never freed and the cache is never invalidated; both live as
    long as the manager.  Not thread-safe: serialize all node-creating calls.
    """

    def __init__(self, features=()):
        self.features = FeatureTable()
        self._var: list[int] = [TERMINAL_LEVEL, TERMINAL_LEVEL]
        self._low: list[int] = [FALSE, TRUE]
        self._high: list[int] = [FALSE, TRUE]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._cache: dict[tuple[int, int, int], int] = {}
        self._handles: dict[int, PresenceCondition] = {}
        self._true = self._handle(TRUE)
        self._false = self._handle(FALSE)
        for name in features:
            self.mk_var(name)

    # -- node level -------------------------------------------------------

    def _handle(self, root: int) -> PresenceCondition:
        pc = self._handles.get(root)
        if pc is None:
            pc = PresenceCondition(root, self)
            self._handles[root] = pc
        return pc

    def _mk(self, var: int, low: int, high: int) -> int:
        if low == high:
            return low
        key = (var, low, high)
        node = self._unique.get(key)
        if node is None:
            node = len(self._var)
            self._var.append(var)
            self._low.append(low)
            self._high.append(high)
            self._unique[key] = node
        return node

    def _and(self, a: int, b: int) -> int:
        if a == FALSE or b == FALSE:
            return FALSE
        if a == TRUE or a == b:
            return b
        if b == TRUE:
            return a
        if a > b:
            a, b = b, a
        key = (_AND, a, b)
        res = self._cache.get(key)
        if res is not None:
            return res
        va, vb = self._var[a], self._var[b]
        if va == vb:
            res = self._mk(va, self._and(self._low[a], self._low[b]),
                           self._and(self._high[a], self._high[b]))
        elif va < vb:
            res = self._mk(va, self._and(self._low[a], b), self._and(self._high[a], b))
        else:
            res = self._mk(vb, self._and(a, self._low[b]), self._and(a, self._high[b]))
        self._cache[key] = res
        return res

    def _or(self, a: int, b: int) -> int:
        if a == TRUE or b == TRUE:
            return TRUE
        if a == FALSE or a == b:
            return b
        if b == FALSE:
            return a
        if a > b:
            a, b = b, a
        key = (_OR, a, b)
        res = self._cache.get(key)
        if res is not None:
            return res
        va, vb = self._var[a], self._var[b]
        if va == vb:
            res = self._mk(va, self._or(self._low[a], self._low[b]),
                           self._or(self._high[a], self._high[b]))
        elif va < vb:
            res = self._mk(va, self._or(self._low[a], b), self._or(self._high[a], b))
        else:
            res = self._mk(vb, self._or(a, self._low[b]), self._or(a, self._high[b]))
        self._cache[key] = res
        return res

    def _not(self, a: int) -> int:
        if a <= TRUE:
            return TRUE - a
        key = (_NOT, a, a)
        res = self._cache.get(key)
        if res is None:
            res = self._mk(self._var[a], self._not(self._low[a]), self._not(self._high[a]))
            self._cache[key] = res
        return res

    def _check(self, *pcs: PresenceCondition) -> None:
        for pc in pcs:
            if pc.manager is not self:
                raise ValueError("presence condition belongs to a different BDD manager")

    # -- presence conditions ---------------------------------------------

    def mk_var(self, name: str) -> PresenceCondition:
        """Return the PC of the single feature ``name``, registering it if unseen."""
        var = self.features.register(name)
        return self._handle(self._mk(var, FALSE, TRUE))

    def pc_true(self) -> PresenceCondition:
        return self._true

    def pc_false(self) -> PresenceCondition:
        return self._false

    @property
    def true(self) -> PresenceCondition:
        return self._true

    @property
    def false(self) -> PresenceCondition:
        return self._false

    def pc_and(self, a: PresenceCondition, b: PresenceCondition) -> PresenceCondition:
        self._check(a, b)
        return self._handle(self._and(a.root, b.root))

    def pc_or(self, a: PresenceCondition, b: PresenceCondition) -> PresenceCondition:
        self._check(a, b)
        return self._handle(self._or(a.root, b.root))

    def pc_not(self, a: PresenceCondition) -> PresenceCondition:
        self._check(a)
        return self._handle(self._not(a.root))

    def conjoin(self, pcs) -> PresenceCondition:
        root = TRUE
        for pc in pcs:
            self._check(pc)
            root = self._and(root, pc.root)
            if root == FALSE:
                break
        return self._handle(root)

    def disjoin(self, pcs) -> PresenceCondition:
        root = FALSE
        for pc in pcs:
            self._check(pc)
            root = self._or(root, pc.root)
            if root == TRUE:
                break
        return self._handle(root)

    def ite(self, f: PresenceCondition, g: PresenceCondition, h: PresenceCondition) -> PresenceCondition:
        self._check(f, g, h)
        return self._handle(self._or(self._and(f.root, g.root),
                                     self._and(self._not(f.root), h.root)))

    def implies(self, a: PresenceCondition, b: PresenceCondition) -> bool:
        self._check(a, b)
        return self._and(a.root, self._not(b.root)) == FALSE

    def sat(self, a: PresenceCondition) -> bool:
        return a.root != FALSE

    def evaluate(self, a: PresenceCondition, config: Mapping[str, bool]) -> bool:
        """Walk the diagram under ``config``.

        ``config`` must assign every feature tested on the walked path;
        a missing feature raises ``ValueError``.
        """
        node = a.root
        names = self.features.names
        while node > TRUE:
            name = names[self._var[node]]
            try:
                value = config[name]
            except KeyError:
                raise ValueError(f"configuration does not assign feature {name!r}") from None
            node = self._high[node] if value else self._low[node]
        return node == TRUE

    def sat_count(self, a: PresenceCondition, nvars: int | None = None) -> int:
        """Number of satisfying assignments over the first ``nvars`` features."""
        if nvars is None:
            nvars = len(self.features)
        memo: dict[int, int] = {}

        def level(node):
            v = self._var[node]
            return nvars if v == TERMINAL_LEVEL else v

        def count(node):
            # models of the sub-function over variables level(node)..nvars-1
            if node <= TRUE:
                return node
            res = memo.get(node)
            if res is None:
                lv = level(node)
                lo, hi = self._low[node], self._high[node]
                res = (count(lo) << (level(lo) - lv - 1)) + (count(hi) << (level(hi) - lv - 1))
                memo[node] = res
            return res

        return count(a.root) << level(a.root)

    def enumerate_configurations(self, fm: PresenceCondition, limit: int | None = None,
                                 features=None) -> Iterator[Configuration]:
        """Yield every total assignment satisfying ``fm``.

        Assignments range over all registered features (or ``features``, which
        must include every feature ``fm`` depends on).  Order is lexicographic
        in variable order with absent before present.  Raises
        :class:`ConfigurationLimitError` up front if more than ``limit``
        configurations would be produced.
        """
        self._check(fm)
        if features is None:
            names = tuple(self.features.names)
        else:
            names = tuple(features)
            for v in self.support(fm):
                if v not in names:
                    raise ValueError(f"feature {v!r} of the formula is not enumerated")
        if limit is not None:
            total = self._count_over(fm, names)
            if total > limit:
                raise ConfigurationLimitError(
                    f"{total} configurations exceed the limit of {limit}")
        return self._enumerate(fm, names)

    def _count_over(self, fm, names):
        if tuple(names) == tuple(self.features.names[:len(names)]):
            return self.sat_count(fm, len(names))
        return sum(1 for _ in self._enumerate(fm, names))

    def _enumerate(self, fm, names):
        n = len(names)
        if tuple(names) != tuple(self.features.names[:n]):
            for bits in itertools.product((False, True), repeat=n):
                config = Configuration(names, bits)
                if self.evaluate(fm, config):
                    yield config
            return
        bits: list[bool] = [False] * n

        def walk(level, node):
            if node == FALSE:
                return
            if level == n:
                yield Configuration(names, bits)
                return
            if self._var[node] == level:
                lo, hi = self._low[node], self._high[node]
            else:
                lo = hi = node
            bits[level] = False
            yield from walk(level + 1, lo)
            bits[level] = True
            yield from walk(level + 1, hi)

        yield from walk(0, fm.root)

    def support(self, a: PresenceCondition) -> list[str]:
        """Feature names the function actually depends on, in variable order."""
        seen: set[int] = set()
        vars_: set[int] = set()
        stack = [a.root]
        while stack:
            node = stack.pop()
            if node <= TRUE or node in seen:
                continue
            seen.add(node)
            vars_.add(self._var[node])
            stack.append(self._low[node])
            stack.append(self._high[node])
        return [self.features.names[v] for v in sorted(vars_)]

    def cubes(self, a: PresenceCondition) -> list[list[tuple[str, bool]]]:
        """Paths to the true terminal as lists of ``(feature, polarity)`` literals."""
        names = self.features.names
        out: list[list[tuple[str, bool]]] = []

        def walk(node, path):
            if node == FALSE:
                return
            if node == TRUE:
                out.append(list(path))
                return
            name = names[self._var[node]]
            path.append((name, False))
            walk(self._low[node], path)
            path[-1] = (name, True)
            walk(self._high[node], path)
            path.pop()

        walk(a.root, [])
        return out

    def to_text(self, a: PresenceCondition) -> str:
        """Sum-of-products rendering that parses back to the same function."""
        if a.root == TRUE:
            return "True"
        if a.root == FALSE:
            return "False"
        terms = []
        cubes = self.cubes(a)
        for cube in cubes:
            lits = [name if pos else "!" + name for name, pos in cube]
            term = " /\\ ".join(lits)
            if len(cubes) > 1 and len(lits) > 1:
                term = f"({term})"
            terms.append(term)
        return " \\/ ".join(terms)

    # -- introspection ----------------------------------------------------

    def node_count(self) -> int:
        """Nodes allocated so far, terminals included."""
        return len(self._var)

    def node(self, index: int) -> tuple[int, int, int]:
        return self._var[index], self._low[index], self._high[index]

    def reachable(self, a: PresenceCondition) -> list[int]:
        seen = set()
        stack = [a.root]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            if node > TRUE:
                stack.append(self._low[node])
                stack.append(self._high[node])
        return sorted(seen)

    def dump(self) -> Iterator[str]:
        """Node table, one ``id var-name low-id high-id`` line per node."""
        yield "0\tFalse\t-\t-"
        yield "1\tTrue\t-\t-"
        names = self.features.names
        for i in range(2, len(self._var)):
            yield f"{i}\t{names[self._var[i]]}\t{self._low[i]}\t{self._high[i]}"

    def check_invariants(self) -> None:
        """Assert ordering, reduction and uniqueness over the whole store."""
        seen = set()
        for i in range(2, len(self._var)):
            v, lo, hi = self._var[i], self._low[i], self._high[i]
            assert lo != hi, f"node {i} is redundant"
            assert v < self._var[lo] and v < self._var[hi], f"node {i} violates the order"
            key = (v, lo, hi)
            assert key not in seen, f"node {i} duplicates another node"
            seen.add(key)
            assert self._unique[key] == i


def equivalent_under(a: PresenceCondition, b: PresenceCondition, fm: PresenceCondition) -> bool:
    """True iff ``a`` and ``b`` agree on every configuration allowed by ``fm``."""
    return (a & fm) is (b & fm)
