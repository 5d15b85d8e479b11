import itertools

import numpy as np
import pytest

import oracles
from natdual.catalog import chain_dl, get, three_T
from natdual.duality import (InjectivityWitness, ProductDual, check_duality_on, check_fullness_on,
                             components, dual_of_algebra, dual_of_structure, find_majority,
                             search_injectivity_failure, verify_injectivity_witness)
from natdual.endo import endo_ego
from natdual.structures import FiniteStructure, enumerate_substructures, power_points


def _duality_oracle(A, ego):
    """iso iff the morphisms D(A) -> ego are exactly the evaluations."""
    D = dual_of_algebra(A, ego)
    assert [tuple(r) for r in D.points.tolist()] == oracles.homs(A, ego.over)
    evals = {tuple(int(v) for v in D.points[:, a]) for a in range(A.size)}
    if len(evals) < A.size:
        return "notInjective"
    return "iso" if set(oracles.morphisms(D, ego)) == evals else "notSurjective"


@pytest.mark.parametrize("alg,ego", [("dl-2", "three-T"), ("dl-3", "three-T"), ("dl-2x2", "three-T"),
                                     ("dl-4", "priestley-2"), ("dl-3", "priestley-2"),
                                     ("z-4", "z-2-T"), ("z-3", "z-3-T"), ("stone-3", "stone-3-T")])
def test_duality_matches_oracle(alg, ego):
    A, E = get(alg), get(ego)
    assert check_duality_on(A, E).kind == _duality_oracle(A, E)


def test_endodual_case_A():
    v = check_duality_on(get("ds-2"), endo_ego(get("ds-3")))
    assert v.kind == "notSurjective" and v.counts == (2, 3)
    assert _duality_oracle(get("ds-2"), endo_ego(get("ds-3"))) == "notSurjective"


def test_not_in_quasivariety():
    v = check_duality_on(get("z-4"), get("z-2-T"))
    assert v.kind == "notInjective" and v.witness == (0, 2)


def test_components_and_product():
    ego = three_T("h")
    for X in enumerate_substructures(ego, 2).structures[::5]:
        PD = ProductDual(X)
        rows = PD.expand(10 ** 6)
        assert [tuple(r) for r in rows.tolist()] == oracles.morphisms(X, ego)
        comps = components(X)
        assert sorted(x for c in comps for x in c) == list(range(X.size))


def _fullness_oracle(X):
    E = dual_of_structure(X)
    M = X.ego.over
    H = set(oracles.homs(E, M))
    evals = [tuple(int(v) for v in E.points[:, y]) for y in range(X.size)]
    if len(set(evals)) < len(evals):
        return "notInjective"
    return "iso" if H == set(evals) else "notSurjective"


def test_fullness_matches_oracle_small():
    ego = three_T("sigma")
    for X in enumerate_substructures(ego, 2).structures:
        if dual_of_structure(X).size > 6:
            continue
        assert check_fullness_on(X).kind == _fullness_oracle(X)


def test_fullness_detects_failure():
    # (3; f, g) alone is not full: some closed subsets of its square fail
    T = three_T()
    seen = set()
    for X in enumerate_substructures(T, 2).structures:
        if dual_of_structure(X).size > 7:
            continue
        v = check_fullness_on(X)
        assert v.kind == _fullness_oracle(X)
        seen.add(v.kind)
    assert seen == {"iso", "notSurjective"}


@pytest.mark.parametrize("ego_id", ["three-T-sigma", "three-T-h", "median-2-T"])
def test_bp_agrees_with_direct(ego_id):
    ego = get(ego_id)
    for X in enumerate_substructures(ego, 2).structures:
        a = check_fullness_on(X, method="direct")
        b = check_fullness_on(X, method="bp")
        assert (a.kind, a.counts, a.witness) == (b.kind, b.counts, b.witness)


def test_find_majority():
    assert find_majority(chain_dl(2)) is not None
    assert find_majority(get("disc-4")) is not None
    assert find_majority(get("z-3")) is None


def test_injectivity_three_T_h():
    r = search_injectivity_failure(three_T("h"), 2, 9)
    w = r.witness
    assert w is not None and verify_injectivity_witness(three_T("h"), w)
    # a forged witness is rejected
    bad = InjectivityWitness(w.k, w.Y, w.X, tuple(w.phi[::-1]) if len(set(w.phi)) > 1 else w.phi)
    assert not verify_injectivity_witness(three_T("h"), bad) or bad.phi == w.phi


def test_injectivity_brute_force_k1():
    # every pair X <= Y of closed subsets of ego^1, all maps checked
    for ego_id in ("three-T-h", "three-T-sigma", "slat-T-iv", "z-3-T"):
        ego = get(ego_id)
        subs = enumerate_substructures(ego, 1)
        fail = False
        for X, xm in zip(subs.structures, subs.masks):
            for Y, ym in zip(subs.structures, subs.masks):
                if xm & ~ym or xm == ym:
                    continue
                pos = [Y.index_of(r) for r in X.points]
                ext = {tuple(phi[p] for p in pos) for phi in oracles.morphisms(Y, ego)}
                if any(phi not in ext for phi in oracles.morphisms(X, ego)):
                    fail = True
        got = search_injectivity_failure(ego, 1, 3).witness is not None
        assert got == fail, ego_id
