import itertools
import random

import pytest

from natdual import kernel
from natdual.kernel import Problem

BACKENDS = ["python"]
try:
    from natdual import _ckernel  # noqa: F401
    BACKENDS.append("cython")
except ImportError:
    pass


@pytest.fixture(params=BACKENDS)
def backend(request):
    old = kernel.BACKEND
    kernel.use_backend(request.param)
    yield request.param
    kernel.use_backend(old)


def _random_problem(rng):
    n, m = rng.randint(1, 5), rng.randint(1, 4)
    p = Problem(n, m)
    cons = []
    for c in range(rng.randint(0, 5)):
        k = rng.randint(1, 3)
        sc = [rng.randrange(n) for _ in range(k)]
        if rng.random() < 0.5:
            allowed = {t for t in itertools.product(range(m), repeat=k) if rng.random() < 0.6}
            p.add(p.relation(("r", c), k, allowed), sc)
            cons.append(("r", sc, allowed))
        else:
            vals = [rng.randrange(-1, m) for _ in range(m ** (k - 1))]
            p.add(p.function(("f", c), k - 1, vals), sc)
            cons.append(("f", sc, vals))
    if rng.random() < 0.3:
        p.restrict(0, [0])
    return p, cons


def _brute(p, cons):
    out = []
    for a in itertools.product(range(p.m), repeat=p.n):
        if not all(p.domains[v] >> a[v] & 1 for v in range(p.n)):
            continue
        ok = True
        for kind, sc, tab in cons:
            if kind == "r":
                ok &= tuple(a[v] for v in sc) in tab
            else:
                idx = 0
                for v in sc[:-1]:
                    idx = idx * p.m + a[v]
                ok &= tab[idx] == a[sc[-1]]
        if ok:
            out.append(a)
    return out


def test_solve_matches_brute_force(backend):
    rng = random.Random(1)
    for _ in range(300):
        p, cons = _random_problem(rng)
        brute = _brute(p, cons)
        assert [tuple(r) for r in p.solve()] == brute
        assert [tuple(r) for r in p.solve(limit=2)] == brute[:2]


def test_backends_agree_on_close_mask():
    if "cython" not in BACKENDS:
        pytest.skip("compiled core not built")
    from natdual import _ckernel, _pykernel
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(1, 20)
        unary = [[rng.randrange(-1, n) for _ in range(n)] for _ in range(rng.randint(0, 2))]
        binary = [[rng.randrange(-1, n) for _ in range(n * n)] for _ in range(rng.randint(0, 2))]
        start = rng.getrandbits(n)
        assert _ckernel.close_mask(start, unary, binary, n) == _pykernel.close_mask(start, unary, binary, n)


def test_env_var_forces_python(monkeypatch):
    import importlib
    monkeypatch.setenv("NATDUAL_PURE_PYTHON", "1")
    k2 = importlib.reload(kernel)
    try:
        assert k2.BACKEND == "python"
    finally:
        monkeypatch.delenv("NATDUAL_PURE_PYTHON")
        importlib.reload(kernel)


def test_first_and_fix():
    p = Problem(2, 3)
    p.add(p.relation("lt", 2, {(0, 1), (0, 2), (1, 2)}), [0, 1])
    assert p.first() is not None
    p.fix(1, 0)
    assert p.first() is None
