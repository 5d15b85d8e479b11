import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from natdual.algebra import (FiniteAlgebra, Relation, all_subuniverses, compose, free_algebra,
                             generate_subpower, hom_enumerate, in_quasivariety, is_hom, is_retract_of,
                             power, product, subalgebra, subpower_algebra, subuniverse_generate,
                             term_clone)
from natdual.catalog import chain_dl, cyclic_group, get
from natdual.errors import NotAlgebraic, SizeBoundExceeded


@st.composite
def small_algebras(draw):
    n = draw(st.integers(1, 3))
    ops = {}
    for i, ar in enumerate(draw(st.lists(st.integers(0, 2), min_size=1, max_size=2))):
        vals = draw(st.lists(st.integers(0, n - 1), min_size=n ** ar, max_size=n ** ar))
        ops[f"o{i}"] = np.array(vals).reshape((n,) * ar)
    return FiniteAlgebra("rnd", n, ops)



def test_subuniverse_examples():
    assert subuniverse_generate(cyclic_group(4), {2}) == frozenset({0, 2})
    assert subuniverse_generate(chain_dl(3), set()) == frozenset({0, 2})


def test_hom_examples():
    assert hom_enumerate(chain_dl(3), chain_dl(2)) == [(0, 0, 1), (0, 1, 1)]
    assert len(hom_enumerate(cyclic_group(2), cyclic_group(4))) == 2


@settings(max_examples=60, deadline=None)
@given(small_algebras(), st.data())
def test_homs_match_brute_force(A, data):
    n = data.draw(st.integers(1, 3))
    ops = {}
    for sym, arr in A.ops.items():
        vals = data.draw(st.lists(st.integers(0, n - 1), min_size=n ** arr.ndim, max_size=n ** arr.ndim))
        ops[sym] = np.array(vals).reshape((n,) * arr.ndim)
    B = FiniteAlgebra("rnd2", n, ops)
    assert hom_enumerate(A, B) == oracles.homs(A, B)


@settings(max_examples=60, deadline=None)
@given(small_algebras(), st.sets(st.integers(0, 2)))
def test_closure_matches_brute_force(A, S):
    S = {x for x in S if x < A.size}
    assert subuniverse_generate(A, S) == oracles.closure(A, S)


def test_term_clone_sizes():
    assert len(term_clone(chain_dl(3), 1)) == 3
    assert len(term_clone(chain_dl(2, False), 1)) == 1
    for A, k in ((chain_dl(2, False), 2), (chain_dl(3), 1), (cyclic_group(3), 2)):
        assert {t.values for t in term_clone(A, k)} == oracles.term_ops(A, k)


def test_free_algebra_sizes():
    L = chain_dl(2, False)
    assert [free_algebra(L, k)[0].size for k in (1, 2, 3)] == [1, 4, 18]
    assert free_algebra(cyclic_group(4), 2)[0].size == 16
    F, gens = free_algebra(L, 2)
    # generators are the projections
    assert sorted(tuple(F.points[g]) for g in gens) == [(0, 0, 1, 1), (0, 1, 0, 1)]


def test_retract():
    L, L3 = chain_dl(2, False), chain_dl(3, False)
    q, p = is_retract_of(L3, free_algebra(L, 3)[0])
    F3 = free_algebra(L, 3)[0]
    assert is_hom(L3, F3, q) and is_hom(F3, L3, p)
    assert compose(p, q) == (0, 1, 2)
    assert is_retract_of(L3, free_algebra(L, 2)[0]) is None


def test_power_and_product():
    A = chain_dl(2)
    P = power(A, 2)
    assert P.size == 4 and P.apply("join", 1, 2) == 3
    B = product(A, chain_dl(3))
    assert B.size == 6 and B.labels[5] == "1_1"
    assert oracles.is_hom(B, A, tuple(x // 3 for x in range(6)))


def test_subpower_rejects_nonclosed():
    A = chain_dl(2)
    with pytest.raises(NotAlgebraic):
        subpower_algebra(A, np.array([[0, 1], [1, 0]]), "x")
    with pytest.raises(NotAlgebraic):
        subalgebra(A, [1])


def test_quasivariety():
    ok, pair = in_quasivariety(chain_dl(4), chain_dl(2))
    assert ok and pair is None
    ok, pair = in_quasivariety(cyclic_group(4), cyclic_group(2))
    assert not ok and pair == (0, 2)


def test_all_subuniverses_against_brute_force():
    A = chain_dl(2)
    for n in (1, 2):
        got = {r.tuples for r in all_subuniverses(A, n)}
        pts = list(itertools.product(range(2), repeat=n))
        want = set()
        for bits in range(1, 1 << len(pts)):
            rows = {pts[i] for i in range(len(pts)) if bits >> i & 1}
            if oracles.is_subuniverse_rows(A, rows):
                want.add(frozenset(rows))
        assert got == want
    assert len(all_subuniverses(A, 3)) == 29


def test_size_bound():
    from natdual.config import DEFAULT
    with pytest.raises(SizeBoundExceeded):
        free_algebra(chain_dl(2, False), 3, bounds=DEFAULT.with_(max_carrier=10))


def test_generate_subpower_lex_sorted():
    rows = generate_subpower(cyclic_group(3), np.array([[1, 2]]))
    assert rows.tolist() == sorted(rows.tolist()) and len(rows) == 3


def test_relation_carrier_check():
    with pytest.raises(ValueError):
        Relation.of([(0, 3)]).check_carrier(3)
