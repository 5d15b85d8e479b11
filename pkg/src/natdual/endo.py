"""Endomorphism monoids, k-endoprimality and endodualisability on a test algebra."""
import itertools
from dataclasses import dataclass

import numpy as np

from .algebra import hom_enumerate, term_clone
from .config import DEFAULT
from .duality import check_duality_on
from .structures import AlterEgo, FiniteStructure, power_points, struct_problem


@dataclass
class EndoMonoid:
    size: int
    elements: list          # value tuples, lexicographic

    def __post_init__(self):
        ident = tuple(range(self.size))
        els = set(self.elements)
        if ident not in els:
            raise AssertionError("identity missing from End")
        for f, g in itertools.product(self.elements, repeat=2):
            if tuple(f[x] for x in g) not in els:
                raise AssertionError("End not closed under composition")

    def __len__(self):
        return len(self.elements)


def endomorphisms(M, bounds=DEFAULT):
    return EndoMonoid(M.size, hom_enumerate(M, M, bounds=bounds))


def endo_ego(M, name=None, bounds=DEFAULT):
    """The alter ego whose only structure is End(M)."""
    G = {f"e{i}": np.array(h) for i, h in enumerate(endomorphisms(M, bounds).elements)}
    return AlterEgo(name or f"end-{M.name}", M, G=G)


@dataclass
class EndoprimalityVerdict:
    k: int
    holds: bool
    witness: tuple = None       # k-ary table, values in lexicographic argument order
    clone_size: int = 0


def end_preserving_problem(M, k, bounds=DEFAULT):
    """CSP over the cells of a k-ary table whose solutions commute with End(M)."""
    ego = endo_ego(M, bounds=bounds)
    X = FiniteStructure(ego, power_points(M.size, k))
    return struct_problem(X, ego.structure())


def is_k_endoprimal(M, k, bounds=DEFAULT):
    """Is every k-ary End(M)-preserving operation a term operation?

    The term tables are among the End-preserving ones, so the first
    |clone| + 1 solutions in lexicographic order contain the smallest
    non-term table whenever there is one.
    """
    clone = {t.values for t in term_clone(M, k, bounds)}
    p = end_preserving_problem(M, k, bounds)
    sols = p.solve(limit=len(clone) + 1)
    for row in sols.tolist():
        t = tuple(row)
        if t not in clone:
            return EndoprimalityVerdict(k, False, t, len(clone))
    return EndoprimalityVerdict(k, True, None, len(clone))


def commutes_with_end(M, k, table, bounds=DEFAULT):
    arr = np.asarray(table, dtype=np.int64).reshape((M.size,) * k)
    for e in endomorphisms(M, bounds).elements:
        e = np.asarray(e)
        for args in itertools.product(range(M.size), repeat=k):
            if e[arr[args]] != arr[tuple(e[a] for a in args)]:
                return False
    return True


def verify_endoprimality_witness(M, k, table, bounds=DEFAULT):
    """The table commutes with End(M) and is not a k-ary term operation."""
    clone = {t.values for t in term_clone(M, k, bounds)}
    return commutes_with_end(M, k, table, bounds) and tuple(table) not in clone


def pad_table(M, k, table, extra=1):
    """The same operation with ``extra`` dummy variables appended."""
    arr = np.asarray(table, dtype=np.int64).reshape((M.size,) * k)
    out = np.broadcast_to(arr.reshape(arr.shape + (1,) * extra), (M.size,) * (k + extra))
    return tuple(int(x) for x in out.ravel())


def is_endodualisable_on(M, A, bounds=DEFAULT):
    """Does End(M) yield a duality on the single algebra A?"""
    return check_duality_on(A, endo_ego(M, bounds=bounds), bounds)


def double_stone_core(L):
    """K(L) = {x : x* = 0 and x+ = 1}."""
    bot, top = int(L.ops["bot"]), int(L.ops["top"])
    return frozenset(x for x in range(L.size)
                     if L.apply("star", x) == bot and L.apply("plus", x) == top)
