import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from natdual.catalog import get, three_T
from natdual.structures import (AlterEgo, ClosureSystem, FiniteStructure, PartialOperation,
                                enumerate_substructures, graph_of, is_algebraic_over, is_morphism,
                                power_points, struct_morphisms, substructure_generate)


def test_graph_of():
    assert graph_of(np.array([0, 0, 2])).tuples == {(0, 0), (1, 0), (2, 2)}
    assert graph_of(np.array(1)).tuples == {(1,)}
    assert graph_of(PartialOperation(1, {(1,): 2})).tuples == {(1, 2)}


def test_three_T_endomorphisms():
    # f and g do not commute (f(g(d)) = 1, g(f(d)) = 0), so only the
    # constants and the identity preserve both
    T = three_T()
    got = struct_morphisms(T.structure(), T.structure()).tolist()
    assert got == [[0, 0, 0], [0, 1, 2], [2, 2, 2]]


@pytest.mark.parametrize("ego_id", ["three-T", "three-T-sigma", "three-T-h", "stone-3-T",
                                    "priestley-2", "slat-T-iv", "z-2-T"])
def test_morphisms_match_brute_force(ego_id):
    ego = get(ego_id)
    for k in (1, 2):
        subs = enumerate_substructures(ego, k).structures
        for X in subs[:: max(1, len(subs) // 8)]:
            if ego.size ** X.size > 20000:
                continue
            got = [tuple(r) for r in struct_morphisms(X, ego.structure()).tolist()]
            assert got == oracles.morphisms(X, ego)


def test_closed_set_counts():
    assert len(enumerate_substructures(three_T(), 1).masks) == 4
    counts = [len(enumerate_substructures(three_T("sigma"), k).masks) for k in (1, 2)]
    assert counts == [3, 15]
    assert len(enumerate_substructures(three_T("h"), 2).masks) == 62


def _brute_closed(ego, k):
    pts = power_points(ego.size, k)
    ops = [s.dense for s in ego.symbols if s.kind != "R"]
    out = []
    for bits in range(1, 1 << len(pts)):
        rows = {tuple(pts[i]) for i in range(len(pts)) if bits >> i & 1}
        ok = True
        for op in ops:
            for args in itertools.product(sorted(rows), repeat=op.ndim):
                v = tuple(int(op[tuple(a[c] for a in args)]) for c in range(k))
                if -1 not in v and v not in rows:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(bits)
    return out


@pytest.mark.parametrize("ego_id,k", [("three-T-sigma", 2), ("three-T-h", 1), ("z-2-T", 2),
                                      ("slat-T-iv", 2), ("stone-3-T", 1)])
def test_closed_sets_match_brute_force(ego_id, k):
    ego = get(ego_id)
    assert sorted(enumerate_substructures(ego, k).masks) == _brute_closed(ego, k)


def test_truncated_enumeration():
    res = enumerate_substructures(three_T("h"), 2, max_count=10)
    assert res.truncated and len(res.masks) <= 10


@settings(max_examples=40, deadline=None)
@given(st.sets(st.integers(0, 8), min_size=1))
def test_closure_is_closure(S):
    ego = three_T("h")
    cs = ClosureSystem(ego, 2)
    mask = sum(1 << i for i in S)
    c = cs.close(mask)
    assert c & mask == mask and cs.close(c) == c
    X = substructure_generate(ego, 2, power_points(3, 2)[sorted(S)])
    assert X.size == bin(c).count("1")
    assert X.closure_violation() is None


def test_algebraicity_report_flags_bad_relation():
    A = get("dl-2")
    bad = AlterEgo("bad", A, R={"neq": [(0, 1), (1, 0)]})
    rep = is_algebraic_over(bad)
    assert not rep.ok and rep.failures()[0][0] == "neq"


def test_is_morphism():
    T = get("three-T")
    X = T.structure()
    assert is_morphism(X, X, [0, 1, 2])
    assert not is_morphism(X, X, [2, 1, 0])


def test_ego_equality():
    assert three_T("h") == three_T("h")
    assert three_T("h") != three_T("sigma")
