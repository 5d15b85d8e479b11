"""Compiled vs pure-Python kernel on the searches the workbench spends its
time in.  Both backends must return identical results; the script checks
that before timing.

    python benchmarks/bench_kernel.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from natdual import kernel
from natdual.algebra import FiniteAlgebra, Relation, hom_enumerate, power
from natdual.catalog import get
from natdual.duality import check_fullness_on
from natdual.structures import (AlterEgo, ClosureSystem, FiniteStructure, enumerate_substructures,
                                power_points, struct_problem)


def _homs():
    A, M = power(get("dl-3"), 2), get("dl-3")
    return len(hom_enumerate(A, M))


def _monotone_problem(n=5):
    le = Relation.of([(0, 0), (0, 1), (1, 1)])
    ego = AlterEgo("le", FiniteAlgebra("2", 2, {}), R={"le": le})
    return struct_problem(FiniteStructure(ego, power_points(2, n)), ego.structure())


def _monotone():
    # all monotone Boolean functions of 5 variables: 7581 solutions on 32 cells
    return len(_monotone_problem().solve())


def _closed_sets():
    return len(ClosureSystem(get("three-T-sigma"), 3).closed_sets()[0])


def _closure_calls():
    cs = ClosureSystem(get("three-T-h"), 3)
    rng = np.random.default_rng(0)
    starts = rng.integers(0, 1 << cs.n, size=2000, dtype=np.int64).tolist()
    return sum(bin(cs.close(int(s))).count("1") for s in starts)


def _fullness():
    ego = get("three-T-h")
    return sum(check_fullness_on(X).ok for X in enumerate_substructures(ego, 2).structures)


CASES = [
    ("homs dl-3^2 -> dl-3", _homs),
    ("monotone maps 2^5 -> 2", _monotone),
    ("closed subsets of (3-T-sigma)^3", _closed_sets),
    ("2000 closures in (3-T-h)^3", _closure_calls),
    ("fullness on (3-T-h)^2", _fullness),
]


def timed(fn, repeat):
    fn()  # warm caches (catalog, tables)
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    try:
        kernel.use_backend("cython")
    except ImportError:
        print("compiled kernel not built; nothing to compare")
        return 1
    print(f"{'case':36s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s}")
    for name, fn in CASES:
        kernel.use_backend("cython")
        tc, rc = timed(fn, args.repeat)
        kernel.use_backend("python")
        tp, rp = timed(fn, args.repeat)
        assert rc == rp, (name, rc, rp)
        print(f"{name:36s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}x")
    kernel.use_backend("cython")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
