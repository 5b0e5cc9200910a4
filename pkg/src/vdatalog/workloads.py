"""Generated programs, fact sets and feature models for tests and experiments."""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .facts_io import FACT_SUFFIX, format_fact
from .pcbdd import BddManager, PresenceCondition
from .syntax import (TRUE_EXPR, PcAnd, PcExpr, PcId, PcNot, PcOr, Program, parse_program,
                     pc_to_bdd, print_pc)

_EDGE_DECLS = """\
.decl Edge(a: symbol, b: symbol)
.decl Path(a: symbol, b: symbol)
.input Edge
.output Path
"""

PROGRAMS = {
    "tc_right": _EDGE_DECLS + """\
Path(x, y) :- Edge(x, y){0}.
Path(x, z) :- Edge(x, y), Path(y, z){1}.
""",
    "tc_left": _EDGE_DECLS + """\
Path(x, y) :- Edge(x, y){0}.
Path(x, z) :- Path(x, y), Edge(y, z){1}.
""",
    "tc_nonlinear": _EDGE_DECLS + """\
Path(x, y) :- Edge(x, y){0}.
Path(x, z) :- Path(x, y), Path(y, z){1}.
""",
    "even_odd": """\
.decl Edge(a: symbol, b: symbol)
.decl Odd(a: symbol, b: symbol)
.decl Even(a: symbol, b: symbol)
.input Edge
.output Odd, Even
Odd(x, y) :- Edge(x, y){0}.
Even(x, z) :- Odd(x, y), Edge(y, z){1}.
Odd(x, z) :- Even(x, y), Edge(y, z){2}.
""",
    "cycles": _EDGE_DECLS + """\
.decl OnCycle(a: symbol)
.decl HasCycle()
.decl FromStart(a: symbol)
.output OnCycle, HasCycle, FromStart
Edge(N0, N1){0}.
Path(x, y) :- Edge(x, y).
Path(x, z) :- Edge(x, y), Path(y, z){1}.
OnCycle(x) :- Path(x, x){2}.
HasCycle() :- OnCycle(_).
FromStart(y) :- Path(N0, y).
""",
}


def feature_names(n: int) -> list[str]:
    return [f"F{i}" for i in range(n)]


def random_pc_expr(rng: random.Random, features, depth: int = 2) -> PcExpr:
    """Random formula tree; leaves are features, inner nodes !, /\\ and \\/."""
    if depth <= 0 or rng.random() < 0.3:
        leaf: PcExpr = PcId(rng.choice(features))
        return PcNot(leaf) if rng.random() < 0.3 else leaf
    kind = rng.random()
    if kind < 0.15:
        return PcNot(random_pc_expr(rng, features, depth - 1))
    left = random_pc_expr(rng, features, depth - 1)
    right = random_pc_expr(rng, features, depth - 1)
    return PcAnd(left, right) if kind < 0.6 else PcOr(left, right)


def random_fact_pc(rng: random.Random, features, p_true: float = 0.4) -> PcExpr:
    if rng.random() < p_true:
        return TRUE_EXPR
    return random_pc_expr(rng, features, depth=2)


@dataclass
class Instance:
    name: str
    program: Program
    program_text: str
    edb: dict[str, list[tuple[tuple[str, ...], PresenceCondition]]]
    fm: PresenceCondition
    fm_text: str
    manager: BddManager


def random_program_text(rng: random.Random, kind: str, features, p_rule_pc: float = 0.3) -> str:
    template = PROGRAMS[kind]
    slots = []
    for _ in range(3):
        if features and rng.random() < p_rule_pc:
            slots.append(" @ " + print_pc(random_pc_expr(rng, features, depth=1)))
        else:
            slots.append("")
    return template.format(*slots)


def random_instance(rng: random.Random, max_nodes: int = 30, max_edges: int = 100,
                    max_features: int = 6, kind: str | None = None,
                    name: str = "random") -> Instance:
    """A random digraph with random PCs, a random program and a random feature model."""
    kind = kind or rng.choice(sorted(PROGRAMS))
    nfeat = rng.randint(1, max_features)
    features = feature_names(nfeat)
    nodes = rng.randint(2, max_nodes)
    nedges = rng.randint(1, min(max_edges, nodes * nodes))
    mgr = BddManager(features)
    text = random_program_text(rng, kind, features)
    program = parse_program(text, source=name)
    for f in program.features:
        mgr.mk_var(f)
    edges = []
    for _ in range(nedges):
        a, b = rng.randrange(nodes), rng.randrange(nodes)
        pc = pc_to_bdd(random_fact_pc(rng, features), mgr)
        if pc.satisfiable:
            edges.append(((f"N{a}", f"N{b}"), pc))
    r = rng.random()
    if r < 0.2:
        fm_expr: PcExpr = TRUE_EXPR
    elif r < 0.4:
        fm_expr = exactly_one(features[: max(2, nfeat // 2)] if nfeat > 1 else features)
    else:
        fm_expr = random_pc_expr(rng, features, depth=3)
    fm = pc_to_bdd(fm_expr, mgr)
    return Instance(name, program, text, {"Edge": edges}, fm, print_pc(fm_expr), mgr)


def exactly_one(features) -> PcExpr:
    """At least one of ``features`` and no two together."""
    expr: PcExpr = PcId(features[0])
    for f in features[1:]:
        expr = PcOr(expr, PcId(f))
    for i, a in enumerate(features):
        for b in features[i + 1:]:
            expr = PcAnd(expr, PcNot(PcAnd(PcId(a), PcId(b))))
    return expr


def travel_instance() -> Instance:
    """The four-city example with Air/Land/Sea edges."""
    text = PROGRAMS["tc_right"].format("", "")
    mgr = BddManager()
    program = parse_program(text, source="travel")
    sea, air, land = mgr.mk_var("Sea"), mgr.mk_var("Air"), mgr.mk_var("Land")
    edb = {"Edge": [(("Athens", "Rome"), sea), (("Rome", "Toronto"), air),
                    (("NYC", "Athens"), ~land), (("Toronto", "NYC"), land)]}
    fm_expr = exactly_one(["Air", "Land", "Sea"])
    return Instance("travel", program, text, edb, pc_to_bdd(fm_expr, mgr),
                    print_pc(fm_expr), mgr)


def overhead_instance(rng: random.Random, nfeatures: int = 10, nedges: int = 10_000,
                      cluster_nodes: int = 8, cluster_edges: int = 10,
                      p_annotated: float = 0.3) -> Instance:
    """Large transitive-closure workload made of many small random DAG clusters.

    A fraction ``p_annotated`` of edges carries a one- or two-literal PC.
    The feature model ties the last four features to the first four, which
    leaves 2**(nfeatures - 4) valid configurations.
    """
    features = feature_names(nfeatures)
    mgr = BddManager(features)
    text = PROGRAMS["tc_right"].format("", "")
    program = parse_program(text, source="overhead")
    edges = []
    cluster = 0
    while len(edges) < nedges:
        seen = set()
        k = min(cluster_edges, nedges - len(edges))
        while len(seen) < k:
            a, b = sorted(rng.sample(range(cluster_nodes), 2))
            seen.add((a, b))
        for a, b in sorted(seen):
            if rng.random() < p_annotated:
                lits = [PcId(f) if rng.random() < 0.7 else PcNot(PcId(f))
                        for f in rng.sample(features, rng.randint(1, 2))]
                expr: PcExpr = lits[0] if len(lits) == 1 else PcAnd(lits[0], lits[1])
                pc = pc_to_bdd(expr, mgr)
            else:
                pc = mgr.true
            edges.append(((f"C{cluster}_{a}", f"C{cluster}_{b}"), pc))
        cluster += 1
    fm_expr: PcExpr = TRUE_EXPR
    for i in range(min(4, nfeatures // 2)):
        a, b = PcId(features[i]), PcId(features[nfeatures - 1 - i])
        iff = PcOr(PcAnd(a, b), PcAnd(PcNot(a), PcNot(b)))
        fm_expr = iff if fm_expr is TRUE_EXPR else PcAnd(fm_expr, iff)
    return Instance("overhead", program, text, {"Edge": edges}, pc_to_bdd(fm_expr, mgr),
                    print_pc(fm_expr), mgr)


def write_bundle(instance: Instance, directory, delimiter: str = "\t") -> dict[str, Path]:
    """Write ``program.dl``, ``facts/<Rel>.facts`` and ``fm.pc`` under ``directory``."""
    root = Path(directory)
    (root / "facts").mkdir(parents=True, exist_ok=True)
    paths = {"program": root / "program.dl", "facts": root / "facts", "fm": root / "fm.pc"}
    paths["program"].write_text(instance.program_text, encoding="utf-8")
    paths["fm"].write_text(instance.fm_text + "\n", encoding="utf-8")
    for rel in instance.program.inputs:
        lines = [format_fact(v, pc, delimiter) + "\n" for v, pc in instance.edb.get(rel.name, [])]
        (root / "facts" / (rel.name + FACT_SUFFIX)).write_text("".join(lines), encoding="utf-8")
    return paths
