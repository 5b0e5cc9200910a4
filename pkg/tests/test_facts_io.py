import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vdatalog import workloads
from vdatalog.engine import AnnotatedRelation, EngineConfig, infer
from vdatalog.errors import FactFileError
from vdatalog.facts_io import (format_fact, load_inputs, parse_fact_line, read_facts,
                               split_fields, write_facts)
from vdatalog.pcbdd import BddManager
from vdatalog.syntax import TRUE_EXPR, PcId, PcNot, Relation, parse_program, pc_to_bdd

from helpers import FEATURES8, TRAVEL, pc_exprs

EDGE = Relation("Edge", ("a", "b"))


def test_read_travel_edges(tmp_path):
    records = read_facts(TRAVEL / "facts" / "Edge.facts", EDGE)
    assert records[0].values == ("Athens", "Rome")
    assert records[0].pc == PcId("Sea")
    assert records[2].pc == PcNot(PcId("Land"))


def test_default_pc():
    assert parse_fact_line("Athens\tRome", 2).pc == TRUE_EXPR


def test_arity_error_has_line(tmp_path):
    path = tmp_path / "Edge.facts"
    path.write_text("a\tb\n\na\tb\tc\n")
    with pytest.raises(FactFileError) as exc:
        read_facts(path, EDGE)
    assert exc.value.line == 3
    assert "expected 2 fields, found 3" in str(exc.value)


def test_pc_error_has_line_and_column(tmp_path):
    path = tmp_path / "Edge.facts"
    path.write_text("a\tb\t@Sea\na\tb\t@Sea /\\ )\n")
    with pytest.raises(FactFileError) as exc:
        read_facts(path, EDGE)
    assert (exc.value.line, exc.value.column) == (2, 13)


def test_missing_file(tmp_path):
    with pytest.raises(FactFileError):
        read_facts(tmp_path / "nope.facts", EDGE)


def test_quoting():
    assert split_fields('"a\tb"\t"x""y"\t', "\t") == [("a\tb", True, 0), ('x"y', True, 6), ("", False, 13)]
    rec = parse_fact_line('"@odd"\tb', 2)
    assert rec.values == ("@odd", "b") and rec.pc == TRUE_EXPR
    with pytest.raises(FactFileError):
        parse_fact_line('"a\tb', 2)


def test_write_travel_path_line(travel_mgr):
    m = travel_mgr
    assert format_fact(("NYC", "Rome"), m.mk_var("Sea")) == "NYC\tRome\t@Sea"
    assert format_fact(("a", "b"), m.true) == "a\tb"
    assert format_fact((), m.mk_var("Sea")) == "()\t@Sea"
    assert format_fact(("a\tb", "@c", ""), None) == '"a\tb"\t"@c"\t""'


def test_write_sorted_and_deterministic(tmp_path, mgr):
    rel = AnnotatedRelation("Edge", 2, mgr)
    for t in [("b", "a"), ("a", "c"), ("a", "b")]:
        rel.insert(t, mgr.true)
    write_facts(tmp_path / "1.csv", rel)
    write_facts(tmp_path / "2.csv", rel)
    data = (tmp_path / "1.csv").read_bytes()
    assert data == (tmp_path / "2.csv").read_bytes()
    assert data == b"a\tb\na\tc\nb\ta\n"


def test_plain_mode_omits_pcs(tmp_path, mgr):
    rel = AnnotatedRelation("Edge", 2, mgr)
    rel.insert(("a", "b"), mgr.mk_var("f"))
    write_facts(tmp_path / "out.csv", rel, with_pcs=False)
    assert (tmp_path / "out.csv").read_text() == "a\tb\n"


def test_plain_file_matches_plain_tsv_reader(tmp_path):
    path = tmp_path / "Edge.facts"
    path.write_text("a\tb\nc\td\n")
    records = read_facts(path, EDGE)
    plain = [tuple(line.split("\t")) for line in path.read_text().splitlines()]
    assert [r.values for r in records] == plain
    assert all(r.pc == TRUE_EXPR for r in records)


def test_nullary_roundtrip(tmp_path, mgr):
    rel = AnnotatedRelation("Flag", 0, mgr)
    rel.insert((), mgr.mk_var("f") | mgr.mk_var("g"))
    write_facts(tmp_path / "Flag.csv", rel)
    (rec,) = read_facts(tmp_path / "Flag.csv", Relation("Flag", ()))
    assert rec.values == ()
    assert pc_to_bdd(rec.pc, mgr) is rel.exists(())


def test_custom_delimiter(tmp_path, mgr):
    rel = AnnotatedRelation("Edge", 2, mgr)
    rel.insert(("a,b", "c"), mgr.mk_var("f") & ~mgr.mk_var("g"))
    write_facts(tmp_path / "e.csv", rel, delimiter=",")
    text = (tmp_path / "e.csv").read_text()
    assert text == '"a,b",c,@f /\\ !g\n'
    (rec,) = read_facts(tmp_path / "e.csv", EDGE, delimiter=",")
    assert rec.values == ("a,b", "c")


def test_load_inputs_registers_features_in_file_order(tmp_path):
    prog = parse_program((TRAVEL / "travel.dl").read_text())
    m = BddManager()
    edb = load_inputs(prog, TRAVEL / "facts", m)
    assert m.features.names == ["Sea", "Air", "Land"]
    assert len(edb["Edge"]) == 4
    with pytest.raises(FactFileError):
        load_inputs(prog, tmp_path, m)


def _roundtrip(rel, tmp_path, mgr):
    path = tmp_path / "rel.csv"
    write_facts(path, rel)
    decl = Relation(rel.name, tuple(f"c{i}" for i in range(rel.arity)))
    back = AnnotatedRelation(rel.name, rel.arity, mgr)
    for rec in read_facts(path, decl):
        back.insert(rec.values, pc_to_bdd(rec.pc, mgr))
    return back.to_dict()


def test_roundtrip_inferred_output(tmp_path):
    inst = workloads.travel_instance()
    db = infer(inst.program, inst.edb, inst.manager, EngineConfig(feature_model=inst.fm))
    for rel in db.values():
        assert _roundtrip(rel, tmp_path, inst.manager) == rel.to_dict()


symbols = st.text(alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\n\r"),
                  max_size=6)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.tuples(symbols, symbols), pc_exprs(max_leaves=6)), max_size=12))
def test_roundtrip_property(tmp_path_factory, rows):
    tmp_path = tmp_path_factory.mktemp("rt")
    mgr = BddManager(FEATURES8)
    rel = AnnotatedRelation("R", 2, mgr)
    for values, e in rows:
        pc = pc_to_bdd(e, mgr)
        if pc.satisfiable:
            rel.insert(values, pc)
    assert _roundtrip(rel, tmp_path, mgr) == rel.to_dict()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_roundtrip_random_instances(tmp_path_factory, seed):
    tmp_path = tmp_path_factory.mktemp("rti")
    inst = workloads.random_instance(random.Random(seed), max_nodes=10, max_edges=30)
    db = infer(inst.program, inst.edb, inst.manager, EngineConfig(feature_model=inst.fm))
    for rel in db.values():
        assert _roundtrip(rel, tmp_path, inst.manager) == rel.to_dict()
