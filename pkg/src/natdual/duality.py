"""The hom-functors D and E at the finite level and the duality, fullness
and injectivity verdicts built on them.

All verdicts are finite-level: topology is discrete and omitted.
"""
from dataclasses import dataclass, field

import numpy as np

from .algebra import hom_enumerate, in_quasivariety, is_hom, subpower_algebra
from .config import DEFAULT
from .errors import EmptyHomset, SizeBoundExceeded
from .structures import (ClosureSystem, FiniteStructure, canonical_key, pointwise_tuples,
                         struct_morphisms, struct_problem)

SCOPE = "finite-level"


@dataclass
class DualityVerdict:
    kind: str                  # "iso", "notInjective" or "notSurjective"
    counts: tuple              # (evaluations, all morphisms); None when not enumerated
    witness: object = None
    method: str = "direct"
    detail: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.kind == "iso"


# --------------------------------------------------------------------------
# D(A)

def dual_of_algebra(A, ego, bounds=DEFAULT):
    """D(A) = hom(A, M) as a substructure of ego^|A| (rows are homs)."""
    homs = hom_enumerate(A, ego.over, bounds=bounds)
    pts = np.array(homs, dtype=np.int64).reshape(len(homs), A.size)
    D = FiniteStructure(ego, pts, name=f"D({A.name})", labels=[f"h{i}" for i in range(len(homs))])
    bad = D.closure_violation()
    if bad is not None:
        # the ego is not algebraic over M if this happens
        raise AssertionError(f"D({A.name}) not closed under {bad[0]}")
    return D


def check_duality_on(A, ego, bounds=DEFAULT):
    """Is e_A : A -> ED(A) an isomorphism?"""
    member, pair = in_quasivariety(A, ego.over, bounds=bounds)
    if not member:
        return DualityVerdict("notInjective", (None, None), witness=pair)
    D = dual_of_algebra(A, ego, bounds)
    target = ego.structure()
    evals = {tuple(int(v) for v in D.points[:, a]) for a in range(A.size)}
    try:
        morphs = [tuple(r) for r in struct_morphisms(D, target, bounds=bounds).tolist()]
        total = len(morphs)
    except SizeBoundExceeded:
        # the first |A|+1 morphisms in lexicographic order must contain any
        # non-evaluation that precedes the evaluations; enough for a witness
        p = struct_problem(D, target)
        morphs = [tuple(r) for r in p.solve(limit=len(evals) + 1).tolist()]
        total = None
    have = set(morphs)
    missing = evals - have
    if missing:
        raise AssertionError(f"evaluation {sorted(missing)[0]} is not a morphism")
    for m in morphs:
        if m not in evals:
            return DualityVerdict("notSurjective", (len(evals), total), witness=m,
                                  detail={"dual_size": D.size})
    return DualityVerdict("iso", (len(evals), total), detail={"dual_size": D.size})


# --------------------------------------------------------------------------
# E(X), held as a product over connected components of X

def components(X):
    """Connected components of the hypergraph whose edges are the tuples
    of X in some relation or operation graph."""
    parent = list(range(X.size))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for sym in X.ego.symbols:
        if sym.arity < 2:
            continue
        for tup in pointwise_tuples(X.points, X.ego.rel_table(sym)).tolist():
            r0 = find(tup[0])
            for t in tup[1:]:
                r1 = find(t)
                if r1 != r0:
                    parent[r1] = r0
    groups = {}
    for x in range(X.size):
        groups.setdefault(find(x), []).append(x)
    return sorted(groups.values())


class ProductDual:
    """E(X) = product of E(C) over components C, never expanded."""

    def __init__(self, X, bounds=DEFAULT):
        self.X = X
        self.m = X.ego.size
        self.comps = components(X)
        target = X.ego.structure()
        self.parts = []
        for C in self.comps:
            sub = FiniteStructure(X.ego, X.points[C])
            sols = struct_morphisms(sub, target, cap=bounds.max_dual_size, bounds=bounds)
            if len(sols) == 0:
                raise EmptyHomset(f"E({X.name}) is empty")
            self.parts.append(sols)
        self.where = {}
        for ci, C in enumerate(self.comps):
            for j, x in enumerate(C):
                self.where[x] = (ci, j)

    @property
    def size(self):
        out = 1
        for p in self.parts:
            out *= len(p)
        return out

    def expand(self, cap):
        if self.size > cap:
            raise SizeBoundExceeded(f"E({self.X.name})", self.size, cap)
        rows = np.zeros((1, self.X.size), dtype=np.int64)
        for C, part in zip(self.comps, self.parts):
            new = np.repeat(rows, len(part), axis=0)
            new[:, C] = np.tile(part, (len(rows), 1))
            rows = new
        return rows[np.lexsort(rows.T[::-1])]

    def pair_projection(self, i, j):
        (ci, a), (cj, b) = self.where[i], self.where[j]
        out = np.zeros((self.m, self.m), dtype=bool)
        if ci == cj:
            out[self.parts[ci][:, a], self.parts[ci][:, b]] = True
        else:
            out[np.ix_(np.unique(self.parts[ci][:, a]), np.unique(self.parts[cj][:, b]))] = True
        return out

    def element_with(self, i, a, j, b):
        """Some element of E(X) with value a at i and b at j."""
        (ci, pi), (cj, pj) = self.where[i], self.where[j]
        row = np.zeros(self.X.size, dtype=np.int64)
        for c, (C, part) in enumerate(zip(self.comps, self.parts)):
            if c == ci == cj:
                sel = part[(part[:, pi] == a) & (part[:, pj] == b)]
            elif c == ci:
                sel = part[part[:, pi] == a]
            elif c == cj:
                sel = part[part[:, pj] == b]
            else:
                sel = part
            row[C] = sel[0]
        return row

    def exists(self, allowed):
        """Does some element b satisfy allowed[k, x, b_x] for all x?  Returns
        one boolean per leading index k of ``allowed`` (shape (K, |X|, m))."""
        ok = np.ones(allowed.shape[0], dtype=bool)
        for C, part in zip(self.comps, self.parts):
            sub = allowed[:, C, :]                       # (K, |C|, m)
            cols = np.arange(len(C))
            hit = sub[:, cols[None, :], part]            # (K, r, |C|)
            ok &= hit.all(axis=2).any(axis=1)
            if not ok.any():
                break
        return ok


def dual_of_structure(X, bounds=DEFAULT):
    """E(X) as a subalgebra of M^X; carrier sorted lexicographically."""
    rows = ProductDual(X, bounds).expand(bounds.max_carrier)
    return subpower_algebra(X.ego.over, rows, f"E({X.name})", labels=[f"m{i}" for i in range(len(rows))],
                            bounds=bounds)


# --------------------------------------------------------------------------
# majority terms and homs out of large subpowers

def _is_majority(t):
    n = t.shape[0]
    x = np.arange(n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return (np.array_equal(t[X, X, Y], X) and np.array_equal(t[X, Y, X], X)
            and np.array_equal(t[Y, X, X], X))


def find_majority(M):
    """A majority term operation of M built from its basic operations, or None."""
    cached = getattr(M, "_majority", False)
    if cached is not False:
        return cached
    n = M.size
    x = np.arange(n)
    I, J, K = np.meshgrid(x, x, x, indexing="ij")
    cands = []
    tern = [a for a in M.ops.values() if a.ndim == 3]
    binr = [a for a in M.ops.values() if a.ndim == 2]
    cands += tern
    for t in tern:
        cands.append(t[I, t[I, J, K], K])
    for p in binr:
        for q in binr:
            cands.append(p[p[q[I, J], q[J, K]], q[I, K]])
    found = next((c for c in cands if _is_majority(c)), None)
    M._majority = found
    return found


class PairClosure:
    """Subuniverses of M^2 as bitmasks over the m*m pairs, with memoised
    one-step extension."""

    def __init__(self, M):
        from .algebra import close_rows
        self.M = M
        self.m = M.size
        self._close_rows = close_rows
        self.memo = {}
        self.base = self._close(0)

    def _close(self, mask):
        m = self.m
        rows = [(p // m, p % m) for p in range(m * m) if mask >> p & 1]
        out = self._close_rows(self.M.ops, m, np.array(rows, dtype=np.int64).reshape(-1, 2), width=2)
        res = 0
        for a, b in out.tolist():
            res |= 1 << (a * m + b)
        return res

    def add(self, mask, a, b):
        bit = 1 << (a * self.m + b)
        if mask & bit:
            return mask
        key = (mask, a * self.m + b)
        r = self.memo.get(key)
        if r is None:
            r = self._close(mask | bit)
            self.memo[key] = r
        return r

    def matrix(self, mask):
        m = self.m
        return np.array([[bool(mask >> (a * m + b) & 1) for b in range(m)] for a in range(m)])


def _pair_closures(M):
    pc = getattr(M, "_pair_closure", None)
    if pc is None:
        pc = PairClosure(M)
        M._pair_closure = pc
    return pc


def _generators(PD, pc):
    """A subset S of E(X) whose pair projections generate those of E(X); by
    the Baker-Pixley theorem it generates E(X)."""
    n = PD.X.size
    m = PD.m
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    cur = {p: pc.base for p in pairs}
    target = {}
    for (i, j) in pairs:
        P = PD.pair_projection(i, j)
        target[(i, j)] = sum(1 << (a * m + b) for a in range(m) for b in range(m) if P[a, b])
    S = []
    for (i, j) in pairs:
        while cur[(i, j)] != target[(i, j)]:
            gap = target[(i, j)] & ~cur[(i, j)]
            p = (gap & -gap).bit_length() - 1
            s = PD.element_with(i, p // m, j, p % m)
            S.append(s)
            for q in pairs:
                cur[q] = pc.add(cur[q], int(s[q[0]]), int(s[q[1]]))
    return np.array(S, dtype=np.int64).reshape(len(S), n)


def bp_homs(PD, M, bounds=DEFAULT):
    """All homs E(X) -> M, as value vectors on a generating set S.

    Needs a majority term. For candidate values c on S, Baker-Pixley gives
    Sg(graph c) = {(b, v) : b in E(X), (b_x, v) in R_x for all x} with
    R_x = Sg{(s_x, c_s)} in M^2; c extends to a hom iff every b has exactly
    one such v. Partial assignments are pruned when some b already has two.
    """
    pc = _pair_closures(M)
    S = _generators(PD, pc)
    n, m = PD.X.size, PD.m
    vpairs = [(v1, v2) for v1 in range(m) for v2 in range(v1 + 1, m)]
    found = []
    R0 = [pc.base] * n
    stack = [(0, R0, ())]
    nodes = 0
    while stack:
        depth, R, vals = stack.pop()
        if depth == len(S):
            found.append(vals)
            continue
        s = S[depth]
        for c in range(m - 1, -1, -1):
            R2 = [pc.add(R[x], int(s[x]), c) for x in range(n)]
            nodes += 1
            if vpairs:
                mats = np.array([pc.matrix(r) for r in R2])          # (n, m, m)
                allowed = np.stack([mats[:, :, v1] & mats[:, :, v2] for v1, v2 in vpairs])
                if PD.exists(allowed).any():
                    continue
            stack.append((depth + 1, R2, vals + (c,)))
        if nodes > bounds.max_search * 10:
            raise SizeBoundExceeded("hom search nodes", nodes, bounds.max_search * 10)
    found.sort()
    return S, found


def check_fullness_on(X, ego=None, method="auto", bounds=DEFAULT):
    """Is eps_X : X -> DE(X) an isomorphism?

    ``method="direct"`` builds E(X) as an algebra and enumerates its homs;
    "bp" (the default when M has a majority term) never expands E(X).
    """
    ego = ego or X.ego
    M = ego.over
    PD = ProductDual(X, bounds)
    maj = find_majority(M) if method != "direct" else None
    if method == "bp" and maj is None:
        raise ValueError(f"{M.name} has no detected majority term")
    if method == "direct" or maj is None:
        E = dual_of_structure(X, bounds)
        rows = E.points
        homs = set(hom_enumerate(E, M, bounds=bounds))
        evals = [tuple(int(v) for v in rows[:, y]) for y in range(X.size)]
        for e in evals:
            if not is_hom(E, M, e):
                raise AssertionError("evaluation is not a homomorphism")
        detail = {"dual_size": E.size}
        mth = "direct"
    else:
        S, found = bp_homs(PD, M, bounds)
        homs = set(found)
        evals = [tuple(int(v) for v in S[:, y]) for y in range(X.size)]
        detail = {"dual_size": PD.size, "generators": len(S),
                  "generator_rows": S.tolist()}
        mth = "baker-pixley"
    missing = set(evals) - homs
    if missing:
        raise AssertionError("evaluation not found among homomorphisms")
    if len(set(evals)) < len(evals):
        seen = {}
        for y, e in enumerate(evals):
            if e in seen:
                return DualityVerdict("notInjective", (len(set(evals)), len(homs)),
                                      witness=(seen[e], y), method=mth, detail=detail)
            seen[e] = y
    extra = sorted(homs - set(evals))
    if extra:
        return DualityVerdict("notSurjective", (len(evals), len(homs)), witness=extra[0],
                              method=mth, detail=detail)
    return DualityVerdict("iso", (len(evals), len(homs)), method=mth, detail=detail)


# --------------------------------------------------------------------------
# injectivity sweep

@dataclass
class InjectivityWitness:
    k: int
    Y: list          # point indices into ego^k
    X: list
    phi: tuple       # values on X, in the order of X
    proof: str = "extension search exhausted"


@dataclass
class SweepResult:
    witness: object                 # InjectivityWitness or None
    checked: dict                   # k -> number of closed sets examined
    bounds: tuple
    statement: str


def _E_rows(cs, mask, memo, bounds):
    rows = memo.get(mask)
    if rows is None:
        pts = canonical_key(mask)[1]
        S = FiniteStructure(cs.ego, cs.points[pts])
        rows = struct_morphisms(S, cs.ego.structure(), cap=bounds.max_dual_size, bounds=bounds)
        memo[mask] = rows
    return rows


def _unextendable(cs, xmask, ymask, memo, bounds):
    """Lex-first phi in E(X) with no extension to Y, or None."""
    EX = _E_rows(cs, xmask, memo, bounds)
    EY = _E_rows(cs, ymask, memo, bounds)
    ypts = canonical_key(ymask)[1]
    xpts = canonical_key(xmask)[1]
    pos = [ypts.index(p) for p in xpts]
    restricted = {tuple(r) for r in EY[:, pos].tolist()}
    if len(restricted) == len(EX):
        return None
    for r in EX.tolist():
        if tuple(r) not in restricted:
            return tuple(r)
    return None


def search_injectivity_failure(ego, power_bound, size_bound, bounds=DEFAULT):
    """Sweep Y <= ego^k (k <= power_bound, |Y| <= size_bound) for a closed
    X <= Y and phi in E(X) with no extension to Y.

    A failing pair always yields a failing one-point extension
    X' < cl(X' + p) <= Y (walk a chain from X up to Y), so the sweep first
    checks those, then picks the first failing Y in the order (k, |Y|,
    point indices) and the first failing X inside it in the same order.
    """
    checked = {}
    for k in range(1, power_bound + 1):
        cs = ClosureSystem(ego, k, bounds)
        masks, _ = cs.closed_sets()
        masks = [mk for mk in masks]
        checked[k] = len(masks)
        memo = {}
        failing_Y = set()
        for xm in masks:
            seen_y = set()
            for p in range(cs.n):
                if xm >> p & 1:
                    continue
                ym = cs.close(xm | (1 << p))
                if ym in seen_y or ym in failing_Y or bin(ym).count("1") > size_bound:
                    continue
                seen_y.add(ym)
                if _unextendable(cs, xm, ym, memo, bounds) is not None:
                    failing_Y.add(ym)
        if failing_Y:
            ym = min(failing_Y, key=canonical_key)
            subs = sorted((xm for xm in masks if xm & ~ym == 0 and xm != ym), key=canonical_key)
            for xm in subs:
                phi = _unextendable(cs, xm, ym, memo, bounds)
                if phi is not None:
                    w = InjectivityWitness(k, canonical_key(ym)[1], canonical_key(xm)[1], phi)
                    return SweepResult(w, checked, (power_bound, size_bound), "failure found")
            raise AssertionError("one-point failure not reproduced")
    return SweepResult(None, checked, (power_bound, size_bound), "no counterexample found within bounds")


def verify_injectivity_witness(ego, w, bounds=DEFAULT):
    """Re-check a witness from scratch: X <= Y closed, phi a morphism, and no
    morphism Y -> ego extends phi."""
    from .structures import is_morphism, power_points
    cs = ClosureSystem(ego, w.k, bounds)
    ym = sum(1 << p for p in w.Y)
    xm = sum(1 << p for p in w.X)
    if cs.close(ym) != ym or cs.close(xm) != xm or xm & ~ym:
        return False
    pts = power_points(ego.size, w.k)
    X = FiniteStructure(ego, pts[w.X])
    Y = FiniteStructure(ego, pts[w.Y])
    if not is_morphism(X, ego.structure(), w.phi):
        return False
    p = struct_problem(Y, ego.structure())
    for x, v in zip(w.X, w.phi):
        p.fix(w.Y.index(x), v)
    return p.first() is None
