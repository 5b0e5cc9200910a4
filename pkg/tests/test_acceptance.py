"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[acceptance N] PASS|FAIL ...`` line to the
terminal (even under output capture) before asserting.
"""

import io
import random
import time
from contextlib import contextmanager

from vdatalog import workloads
from vdatalog.cli import RunOptions, load_feature_model, run
from vdatalog.engine import AnnotatedRelation, EngineConfig, infer, post_prune
from vdatalog.facts_io import load_inputs, read_facts, write_facts
from vdatalog.oracle import check_theorem1, naive_infer, restrict
from vdatalog.pcbdd import BddManager, equivalent_under
from vdatalog.syntax import (PcAnd, PcFalse, PcId, PcNot, PcOr, PcTrue, parse_program, pc_to_bdd)

from helpers import FEATURES8, TRAVEL, assignments, truth, truth_table

SUITE_SEEDS = range(200)


@contextmanager
def criterion(capsys, number, title):
    note = {}
    ok = False
    try:
        yield note
        ok = True
    finally:
        extra = " ".join(f"{k}={v}" for k, v in note.items())
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'} {title} {extra}".rstrip())


def suite_instances():
    yield workloads.travel_instance()
    for seed in SUITE_SEEDS:
        yield workloads.random_instance(random.Random(seed), max_nodes=30, max_edges=100,
                                        max_features=6, name=f"random-{seed}")


# -- 1 ---------------------------------------------------------------------

def test_motivating_example(capsys):
    with criterion(capsys, 1, "motivating example golden output") as note:
        start = time.perf_counter()
        program = parse_program((TRAVEL / "travel.dl").read_text(), source="travel.dl")
        mgr = BddManager()
        edb = load_inputs(program, TRAVEL / "facts", mgr)
        fm = load_feature_model(TRAVEL / "travel.fm", mgr)
        db = infer(program, edb, mgr, EngineConfig(feature_model=fm))
        elapsed = time.perf_counter() - start
        note["seconds"] = f"{elapsed:.3f}"

        sea, air, land = mgr.mk_var("Sea"), mgr.mk_var("Air"), mgr.mk_var("Land")
        expected = {
            ("Athens", "Rome"): sea,
            ("Rome", "Toronto"): air,
            ("NYC", "Athens"): ~land,
            ("Toronto", "NYC"): land,
            ("NYC", "Rome"): sea,
        }
        got = db["Path"].to_dict()
        assert set(got) == set(expected)
        for values, pc in expected.items():
            assert equivalent_under(got[values], pc, fm), values
        for crossed in [("Athens", "Toronto"), ("Rome", "NYC"), ("Toronto", "Athens")]:
            assert crossed not in got
        assert elapsed < 1.0


# -- 2 ---------------------------------------------------------------------

def test_differential_suite(capsys):
    with criterion(capsys, 2, "lifted result equals per-configuration results") as note:
        start = time.perf_counter()
        instances = configurations = 0
        for inst in suite_instances():
            result = check_theorem1(inst.program, inst.edb, inst.fm, inst.manager)
            assert result.passed, f"{inst.name}: {result.counterexample.describe()}"
            if inst.name == "travel":
                assert result.configurations == 3
            instances += 1
            configurations += result.configurations
        elapsed = time.perf_counter() - start
        note.update(instances=instances, configurations=configurations,
                    seconds=f"{elapsed:.1f}")
        assert instances == 201
        assert elapsed < 60.0


# -- 3 ---------------------------------------------------------------------

def test_plain_degeneration(capsys):
    with criterion(capsys, 3, "all-True PCs reduce to plain Datalog") as note:
        checked = 0
        for inst in suite_instances():
            program = inst.program.without_pcs()
            mgr = BddManager()
            plain_edb = {name: {v for v, _ in pairs} for name, pairs in inst.edb.items()}
            edb = {name: [(v, mgr.true) for v in sorted(vs)] for name, vs in plain_edb.items()}
            db = infer(program, edb, mgr, EngineConfig(feature_model=mgr.true))
            expected = naive_infer(program, plain_edb)
            for name in program.relations:
                assert db[name].tuples() == expected[name], (inst.name, name)
                assert all(pc is mgr.true for _, pc in db[name].items())
            checked += 1
        note["instances"] = checked


# -- 4 ---------------------------------------------------------------------

def test_pruning_equivalence(capsys):
    with criterion(capsys, 4, "post-pruning matches inline pruning") as note:
        checked = 0
        for inst in suite_instances():
            mgr, fm = inst.manager, inst.fm
            on = infer(inst.program, inst.edb, mgr, EngineConfig(feature_model=fm))
            off = post_prune(infer(inst.program, inst.edb, mgr,
                                   EngineConfig(feature_model=fm, sat_pruning=False)), fm)
            for name in inst.program.relations:
                a, b = on[name].to_dict(), off[name].to_dict()
                assert set(a) == set(b), (inst.name, name)
                for values in a:
                    assert equivalent_under(a[values], b[values], fm), (inst.name, name, values)
            checked += 1
        note["instances"] = checked


# -- 5 ---------------------------------------------------------------------

def random_formula(rng, depth):
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.05:
            return PcTrue()
        if r < 0.1:
            return PcFalse()
        return PcId(rng.choice(FEATURES8))
    op = rng.random()
    if op < 0.2:
        return PcNot(random_formula(rng, depth - 1))
    cls = PcAnd if op < 0.6 else PcOr
    return cls(random_formula(rng, depth - 1), random_formula(rng, depth - 1))


def rewrite(e, rng):
    """An equivalent formula with a different syntax tree."""
    if isinstance(e, PcNot):
        inner = e.operand
        if isinstance(inner, PcAnd) and rng.random() < 0.7:
            return PcOr(PcNot(rewrite(inner.left, rng)), PcNot(rewrite(inner.right, rng)))
        if isinstance(inner, PcOr) and rng.random() < 0.7:
            return PcAnd(PcNot(rewrite(inner.left, rng)), PcNot(rewrite(inner.right, rng)))
        if isinstance(inner, PcNot):
            return rewrite(inner.operand, rng)
        return PcNot(rewrite(inner, rng))
    if isinstance(e, (PcAnd, PcOr)):
        left, right = rewrite(e.left, rng), rewrite(e.right, rng)
        other = PcOr if isinstance(e, PcAnd) else PcAnd
        r = rng.random()
        if r < 0.3:
            left, right = right, left
        elif r < 0.5 and isinstance(right, other):
            # a op (b other c) == (a op b) other (a op c)
            cls = type(e)
            return other(cls(left, right.left), cls(left, right.right))
        return type(e)(left, right)
    if isinstance(e, PcId) and rng.random() < 0.3:
        return PcNot(PcNot(e))
    return e


def test_bdd_properties(capsys):
    with criterion(capsys, 5, "BDD canonicity and algebra") as note:
        rng = random.Random(2024)
        envs = list(assignments(FEATURES8))
        equivalent_pairs = 0
        for i in range(1000):
            m = BddManager(FEATURES8)
            f = random_formula(rng, 5)
            g = rewrite(f, rng) if i % 2 == 0 else random_formula(rng, 5)
            same = truth_table(f, FEATURES8) == truth_table(g, FEATURES8)
            equivalent_pairs += same
            pf, pg = pc_to_bdd(f, m), pc_to_bdd(g, m)
            assert same == (pf is pg), (f, g)
            # sat/eval agree with exhaustive enumeration
            table = [truth(f, env) for env in envs]
            assert m.sat(pf) == any(table)
            assert [m.evaluate(pf, env) for env in envs] == table
            assert m.sat_count(pf) == sum(table)
            h = pc_to_bdd(random_formula(rng, 4), m)
            assert ~(pf & pg) is ~pf | ~pg
            assert ~(pf | pg) is ~pf & ~pg
            assert pf & (pg | h) is (pf & pg) | (pf & h)
            assert pf | (pg & h) is (pf | pg) & (pf | h)
            m.check_invariants()
        note.update(pairs=1000, equivalent=equivalent_pairs)
        assert equivalent_pairs >= 500


# -- 6 ---------------------------------------------------------------------

def test_io_roundtrip(capsys, tmp_path):
    with criterion(capsys, 6, "fact file round trip") as note:
        relations = 0
        for inst in suite_instances():
            mgr = inst.manager
            db = infer(inst.program, inst.edb, mgr, EngineConfig(feature_model=inst.fm))
            for rel in db.values():
                path = tmp_path / f"{rel.name}.csv"
                write_facts(path, rel)
                decl = inst.program.relations[rel.name]
                back = AnnotatedRelation(rel.name, rel.arity, mgr)
                for rec in read_facts(path, decl):
                    assert back.exists(rec.values) is None
                    back.insert(rec.values, pc_to_bdd(rec.pc, mgr))
                assert back.to_dict() == rel.to_dict(), (inst.name, rel.name)
                relations += 1

        plain = tmp_path / "plain"
        plain.mkdir()
        (plain / "Edge.facts").write_text("Athens\tRome\nRome\tToronto\n\"a\tb\"\t\"@\"\n")
        program = parse_program((TRAVEL / "travel.dl").read_text())
        mgr = BddManager()
        edb = load_inputs(program, plain, mgr)
        assert dict(edb["Edge"]) == {("Athens", "Rome"): mgr.true, ("Rome", "Toronto"): mgr.true,
                                     ("a\tb", "@"): mgr.true}
        note["relations"] = relations


# -- 7 ---------------------------------------------------------------------

def _cli_seconds(paths, out_dir, ignore_pcs, repeats=3):
    best = None
    for _ in range(repeats):
        opts = RunOptions(program=str(paths["program"]), fact_dir=str(paths["facts"]),
                          output_dir=str(out_dir), fm=str(paths["fm"]), ignore_pcs=ignore_pcs)
        start = time.perf_counter()
        assert run(opts, io.StringIO(), io.StringIO()) == 0
        elapsed = time.perf_counter() - start
        best = elapsed if best is None else min(best, elapsed)
    return best


def test_overhead(capsys, tmp_path):
    with criterion(capsys, 7, "lifted overhead") as note:
        inst = workloads.overhead_instance(random.Random(7), nfeatures=10, nedges=10_000)
        assert len(inst.manager.features) == 10 and len(inst.edb["Edge"]) == 10_000
        paths = workloads.write_bundle(inst, tmp_path / "bundle")
        out = tmp_path / "out"
        out.mkdir()

        lifted = _cli_seconds(paths, out, ignore_pcs=False)
        plain = _cli_seconds(paths, out, ignore_pcs=True)

        configs = list(inst.manager.enumerate_configurations(inst.fm))
        program = inst.program.without_pcs()
        start = time.perf_counter()
        for rho in configs:
            mgr = BddManager()
            edb = {name: [(v, mgr.true) for v in sorted(vs)]
                   for name, vs in restrict(inst.edb, rho).items()}
            infer(program, edb, mgr, EngineConfig(feature_model=mgr.true))
        per_config = time.perf_counter() - start

        note.update(lifted_s=f"{lifted:.2f}", ignore_pcs_s=f"{plain:.2f}",
                    overhead=f"{lifted / plain:.2f}x", configurations=len(configs),
                    per_config_s=f"{per_config:.2f}", savings=f"{per_config / lifted:.1f}x")
        assert len(configs) >= 64
        assert lifted <= 3 * plain
        assert per_config >= 10 * lifted
