import pytest
from hypothesis import given, settings, strategies as st

from natdual.catalog import load_catalog
from natdual.errors import ElaborationError
from natdual.speclang import (elaborate, load, parse, serialize, serialize_catalog,
                              serialize_relation)


def test_minimal_algebra():
    doc = parse("algebra two { size 2 op j/2 = [0 1 1 1] }")
    assert doc.ok and len(doc.declarations) == 1
    A = elaborate(doc).algebras["two"]
    assert A.apply("j", 1, 0) == 1


def test_value_out_of_range():
    doc = parse("algebra a {\n  size 3\n  op f/1 = [0 1 3]\n}")
    assert [d.message for d in doc.diagnostics] == ["value 3 exceeds carrier 3"]
    assert (doc.diagnostics[0].span.line, doc.diagnostics[0].span.col) == (3, 17)


def test_duplicate_name_has_both_spans():
    doc = parse("algebra a { size 1 }\nalgebra a { size 1 }")
    (d,) = doc.diagnostics
    assert "duplicate" in d.message and str(d.span) == "2:9"
    assert [str(sp) for sp, _ in d.related] == ["1:9"]


def test_expected_tokens_and_recovery():
    text = "algebra a { size 2 op j/2 = [0 1 1 }\nalgebra b { size 1 }\nego e over b { rel r/1 = {(0)} }"
    doc = parse(text)
    assert doc.diagnostics[0].expected == ("']'",)
    assert [d.name for d in doc.declarations] == ["b", "e"]


def test_recovery_after_garbage():
    doc = parse("zap zap\nalgebra b { size 1 }\nalgebra c { size = }\nalgebra d { size 1 }")
    assert [d.name for d in doc.declarations] == ["b", "d"]
    assert [d.span.line for d in doc.diagnostics] == [1, 3]


def test_diagnostics_ordered():
    doc = parse("algebra a { size 2 op f/1 = [5 0] op f/1 = [0 0] }\nego e over a { rel r/2 = {(0)} }")
    spans = [(d.span.line, d.span.col) for d in doc.diagnostics]
    assert spans == sorted(spans) and len(spans) == 3


def test_undefined_algebra():
    with pytest.raises(ElaborationError) as ei:
        load("ego e over nowhere { }")
    assert "undefined algebra" in str(ei.value)


def test_unknown_operation_in_check():
    with pytest.raises(ElaborationError) as ei:
        load("algebra a { size 1 }\ncheck c { frobnicate algebra=a ; }")
    assert "unknown operation 'frobnicate'" in str(ei.value)


def test_non_algebraic_ego_and_opt_out():
    text = "algebra a { size 2 op j/2 = [0 1 1 1] }\nego e over a { op n/1 = [1 0] }"
    with pytest.raises(ElaborationError):
        load(text)
    assert "e" in load(text, verify=False).egos


def test_catalog_round_trip():
    el = load(serialize_catalog())
    for e in load_catalog():
        got = el.algebras[e.id] if e.kind == "algebra" else el.egos[e.id]
        assert got == e.obj, e.id
        assert serialize(got) == serialize(e.obj)


def test_relation_and_check_plan():
    text = """
    # comment
    algebra two { size 2 labels lo hi op j/2 = [0 1 1 1] }
    rel le/2 on two = {(0,0) (0,1) (1,1)}
    ego T over two { rel le }
    check plan { duality algebra=two ego=T expect=iso ; entails ego=T rel=le ; }
    """
    el = load(text)
    assert el.egos["T"].R["le"] == el.relations["le"][0]
    assert [c.name for c in el.checks["plan"]] == ["duality", "entails"]
    r, on = el.relations["le"]
    assert parse(serialize_relation("le", r, on)).ok


@settings(max_examples=50, deadline=None)
@given(st.text(alphabet="algebraego{}()[]=/,;# 0123abc\n", max_size=80))
def test_parse_is_total(text):
    doc = parse(text)
    spans = [(d.span.line, d.span.col) for d in doc.diagnostics]
    assert spans == sorted(spans)
