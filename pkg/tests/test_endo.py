import pytest

import oracles
from natdual.algebra import term_clone
from natdual.catalog import chain_dl, get
from natdual.endo import (EndoMonoid, commutes_with_end, double_stone_core, endo_ego, endomorphisms,
                          is_k_endoprimal, pad_table, verify_endoprimality_witness)


def test_end_monoids():
    assert endomorphisms(chain_dl(3)).elements == [(0, 0, 2), (0, 1, 2), (0, 2, 2)]
    assert endomorphisms(chain_dl(2, False)).elements == [(0, 0), (0, 1), (1, 1)]
    with pytest.raises(AssertionError):
        EndoMonoid(2, [(1, 0)])


@pytest.mark.parametrize("alg,k", [("dl-3", 1), ("dl-2", 2), ("lat-2", 2), ("ds-3", 1), ("z-3", 1),
                                   ("dl-3", 2)])
def test_endoprimality_matches_oracle(alg, k):
    A = get(alg)
    want = set(oracles.end_preserving(A, k)) == {t.values for t in term_clone(A, k)}
    v = is_k_endoprimal(A, k)
    assert v.holds == want
    if not v.holds:
        assert verify_endoprimality_witness(A, k, v.witness)


def test_lat2_not_3_endoprimal():
    v = is_k_endoprimal(chain_dl(2, False), 3)
    assert not v.holds and v.clone_size == 18
    assert v.witness == (0, 0, 0, 0, 1, 0, 0, 1)
    assert verify_endoprimality_witness(chain_dl(2, False), 3, v.witness)
    assert not verify_endoprimality_witness(chain_dl(2, False), 3, (0, 0, 0, 0, 0, 0, 1, 1))


def test_pad_table():
    M = chain_dl(2, False)
    join = (0, 1, 1, 1)
    padded = pad_table(M, 2, join)
    assert len(padded) == 8 and commutes_with_end(M, 3, padded)


def test_double_stone_cores():
    labels = lambda L: [L.labels[x] for x in sorted(double_stone_core(L))]
    assert labels(get("ds-2")) == []
    assert labels(get("ds-3")) == ["a"]
    assert labels(get("ds-4")) == ["a", "b"]
    assert labels(get("ds-5")) == ["a", "b", "c"]


def test_endo_ego_is_algebraic():
    from natdual.structures import is_algebraic_over
    assert is_algebraic_over(endo_ego(get("ds-3x2"))).ok
