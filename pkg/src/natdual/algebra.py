"""Finite algebras on {0..n-1}: products, powers, subalgebras, homomorphism
search, term clones and free algebras."""
import itertools
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT
from .errors import NotAlgebraic, SignatureMismatch, SizeBoundExceeded
from .kernel import Problem


@dataclass(frozen=True)
class OperationTable:
    """A total operation given by its values in lexicographic argument order."""

    arity: int
    values: tuple

    def __call__(self, *args):
        n = round(len(self.values) ** (1 / self.arity)) if self.arity else 1
        idx = 0
        for a in args:
            idx = idx * n + a
        return self.values[idx]

    def array(self, n):
        return np.asarray(self.values, dtype=np.int64).reshape((n,) * self.arity)


@dataclass(frozen=True)
class Relation:
    arity: int
    tuples: frozenset

    @classmethod
    def of(cls, tuples, arity=None):
        ts = frozenset(tuple(int(x) for x in t) for t in tuples)
        if arity is None:
            if not ts:
                raise ValueError("arity needed for an empty relation")
            arity = len(next(iter(ts)))
        if any(len(t) != arity for t in ts):
            raise ValueError("tuple of wrong arity")
        return cls(arity, ts)

    def sorted(self):
        return sorted(self.tuples)

    def __len__(self):
        return len(self.tuples)

    def __contains__(self, t):
        return tuple(t) in self.tuples

    def __iter__(self):
        return iter(self.sorted())

    def check_carrier(self, n):
        for t in self.tuples:
            if any(not 0 <= x < n for x in t):
                raise ValueError(f"tuple {t} leaves carrier of size {n}")


class FiniteAlgebra:
    """Carrier {0..size-1} with total operation tables.

    ``ops`` maps a symbol to an array of shape ``(size,) * arity``; a
    nullary symbol is a 0-d array. ``points`` is set when the algebra was
    built inside a power of another algebra: row ``i`` is element ``i``.
    """

    def __init__(self, name, size, ops, labels=None, points=None):
        if size < 1:
            raise ValueError("carrier must be non-empty")
        self.name = name
        self.size = int(size)
        self.ops = {}
        for sym, table in ops.items():
            arr = np.array(table, dtype=np.int64)
            if arr.ndim and arr.shape != (self.size,) * arr.ndim:
                raise ValueError(f"{name}.{sym}: table shape {arr.shape}")
            if arr.size and (arr.min() < 0 or arr.max() >= self.size):
                raise ValueError(f"{name}.{sym}: value outside carrier")
            arr.setflags(write=False)
            self.ops[sym] = arr
        self.labels = list(labels) if labels else [str(i) for i in range(self.size)]
        if len(self.labels) != self.size:
            raise ValueError(f"{name}: {len(self.labels)} labels for {self.size} elements")
        self.points = points

    @classmethod
    def from_flat(cls, name, size, ops, labels=None):
        """``ops`` maps a symbol to ``(arity, flat values)``."""
        shaped = {sym: np.asarray(vals, dtype=np.int64).reshape((size,) * ar)
                  for sym, (ar, vals) in ops.items()}
        return cls(name, size, shaped, labels)

    @property
    def signature(self):
        return tuple((sym, arr.ndim) for sym, arr in self.ops.items())

    def arity(self, sym):
        return self.ops[sym].ndim

    def apply(self, sym, *args):
        return int(self.ops[sym][tuple(args)])

    def element(self, label):
        return self.labels.index(str(label))

    def table(self, sym):
        return OperationTable(self.ops[sym].ndim, tuple(int(x) for x in self.ops[sym].ravel()))

    def check_signature(self, other):
        if dict(self.signature) != dict(other.signature):
            raise SignatureMismatch(f"{self.name} and {other.name} have different signatures")

    def __eq__(self, other):
        if not isinstance(other, FiniteAlgebra):
            return NotImplemented
        return (self.name == other.name and self.size == other.size
                and self.labels == other.labels
                and self.signature == other.signature
                and all(np.array_equal(self.ops[s], other.ops[s]) for s in self.ops))

    def __hash__(self):
        return hash((self.name, self.size, self.signature))

    def __repr__(self):
        sig = ", ".join(f"{s}/{a}" for s, a in self.signature)
        return f"<FiniteAlgebra {self.name} |{self.size}| {sig}>"


# --------------------------------------------------------------------------
# rows of a power M^P, closure and subpower algebras

class RowIndex:
    """Hashable keys for rows of a power, integer codes when they fit."""

    def __init__(self, m, width):
        self.width = width
        self.small = width == 0 or m ** width < 2 ** 62
        if self.small:
            self.weights = np.array([m ** (width - 1 - i) for i in range(width)], dtype=np.int64)

    def keys(self, rows):
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.width)
        if self.small:
            return (rows @ self.weights).tolist() if self.width else [0] * len(rows)
        return [r.tobytes() for r in rows]


def _op_images(M, sym, rows, arg_index):
    """Apply ``sym`` pointwise; ``arg_index`` is (K, arity) row indices."""
    table = M.ops[sym]
    return table[tuple(rows[arg_index[:, i]] for i in range(arg_index.shape[1]))]


def generate_subpower(M, gens, limit=None, width=None):
    """Subuniverse of M^width generated by ``gens``; rows in lexicographic order."""
    return close_rows(M.ops, M.size, gens, limit=limit, width=width)


def close_rows(ops, m, gens, limit=None, width=None):
    """Least set of rows of {0..m-1}^width containing ``gens`` and closed
    under the pointwise ``ops`` (arrays of shape (m,)*arity; a value -1
    marks an undefined point and such results are dropped).

    Semi-naive closure: each round only combines argument tuples that use
    at least one row found in the previous round.
    """
    gens = np.asarray(gens, dtype=np.int64)
    if width is None:
        width = gens.shape[1] if gens.ndim == 2 else 0
    gens = gens.reshape(-1, width)
    index = RowIndex(m, width)
    rows = []
    seen = {}

    def push(block):
        if len(block) == 0:
            return
        block = block[(block >= 0).all(axis=1)] if width else block
        for key, row in zip(index.keys(block), block):
            if key not in seen:
                seen[key] = len(rows)
                rows.append(row)
        if limit is not None and len(rows) > limit:
            raise SizeBoundExceeded("generated subuniverse", len(rows), limit)

    push(gens)
    for arr in ops.values():
        if arr.ndim == 0 and int(arr) >= 0:
            push(np.full((1, width), int(arr), dtype=np.int64))
    old = 0
    while old < len(rows):
        cur = np.array(rows, dtype=np.int64).reshape(-1, width)
        n = len(cur)
        fresh = []
        for arr in ops.values():
            r = arr.ndim
            if r == 0:
                continue
            for pattern in itertools.product((0, 1), repeat=r):
                if not any(pattern):
                    continue
                ranges = [np.arange(old, n) if p else np.arange(0, old) for p in pattern]
                if any(len(x) == 0 for x in ranges):
                    continue
                grid = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, r)
                for start in range(0, len(grid), 1 << 16):
                    chunk = grid[start:start + (1 << 16)]
                    fresh.append(arr[tuple(cur[chunk[:, i]] for i in range(r))])
        old = n
        for block in fresh:
            push(block)
    out = np.array(rows, dtype=np.int64).reshape(-1, width)
    if len(out) > 1 and width:
        out = out[np.lexsort(out.T[::-1])]
    return out


def closure_violation(M, rows):
    """None when ``rows`` (a subset of M^n) is a subuniverse, else
    ``(symbol, argument rows)`` for the first escaping application."""
    rows = np.asarray(rows, dtype=np.int64)
    width = rows.shape[1] if rows.ndim == 2 else 0
    index = RowIndex(M.size, width)
    have = set(index.keys(rows))
    for sym, arr in M.ops.items():
        r = arr.ndim
        if r == 0:
            if index.keys(np.full((1, width), int(arr)))[0] not in have:
                return sym, ()
            continue
        n = len(rows)
        if n == 0:
            continue
        total = n ** r
        for start in range(0, total, 1 << 16):
            flat = np.arange(start, min(total, start + (1 << 16)))
            grid = np.stack(np.unravel_index(flat, (n,) * r), axis=-1)
            images = arr[tuple(rows[grid[:, i]] for i in range(r))]
            for key, args in zip(index.keys(images), grid):
                if key not in have:
                    return sym, tuple(tuple(int(x) for x in rows[a]) for a in args)
    return None


def subpower_algebra(M, rows, name, labels=None, bounds=DEFAULT):
    """Algebra on the given rows of M^P with pointwise operations.

    Raises NotAlgebraic when the rows are not closed.
    """
    rows = np.asarray(rows, dtype=np.int64)
    n = len(rows)
    if n > bounds.max_carrier:
        raise SizeBoundExceeded(f"algebra {name}", n, bounds.max_carrier)
    width = rows.shape[1] if rows.ndim == 2 else 0
    rows = rows.reshape(n, width)
    index = RowIndex(M.size, width)
    lookup = {k: i for i, k in enumerate(index.keys(rows))}
    ops = {}
    for sym, arr in M.ops.items():
        r = arr.ndim
        if r == 0:
            key = index.keys(np.full((1, width), int(arr)))[0]
            if key not in lookup:
                raise NotAlgebraic(name, f"constant {sym} missing")
            ops[sym] = np.array(lookup[key])
            continue
        grid = np.indices((n,) * r).reshape(r, -1).T
        images = _op_images(M, sym, rows, grid)
        vals = []
        for key, args in zip(index.keys(images), grid):
            j = lookup.get(key)
            if j is None:
                raise NotAlgebraic(name, f"not closed under {sym} at {tuple(int(a) for a in args)}")
            vals.append(j)
        ops[sym] = np.array(vals, dtype=np.int64).reshape((n,) * r)
    if labels is None:
        sep = "" if all(len(x) == 1 for x in M.labels) else "_"
        labels = [sep.join(M.labels[v] for v in row) or "e" for row in rows]
        if len(set(labels)) != n:
            labels = None
    return FiniteAlgebra(name, n, ops, labels=labels, points=rows)


def power(M, k, bounds=DEFAULT):
    """M^k; element index is the mixed-radix code of the tuple."""
    if k < 1:
        raise ValueError("k must be at least 1")
    size = M.size ** k
    if size > bounds.max_carrier:
        raise SizeBoundExceeded(f"{M.name}^{k}", size, bounds.max_carrier)
    rows = np.array(list(itertools.product(range(M.size), repeat=k)), dtype=np.int64)
    return subpower_algebra(M, rows, f"{M.name}^{k}", bounds=bounds)


def product(A, B, name=None, bounds=DEFAULT):
    """A x B; the pair (a, b) has index a*|B| + b."""
    A.check_signature(B)
    size = A.size * B.size
    if size > bounds.max_carrier:
        raise SizeBoundExceeded("product", size, bounds.max_carrier)
    ops = {}
    for sym, ta in A.ops.items():
        r = ta.ndim
        tb = B.ops[sym]
        if r == 0:
            ops[sym] = np.array(int(ta) * B.size + int(tb))
            continue
        grid = np.indices((A.size, B.size) * r).reshape(2 * r, -1).T
        a = ta[tuple(grid[:, 2 * i] for i in range(r))]
        b = tb[tuple(grid[:, 2 * i + 1] for i in range(r))]
        # grid order is (a1, b1, a2, b2, ...); reorder to pair indices
        vals = (a * B.size + b).reshape((A.size, B.size) * r)
        perm = [2 * i for i in range(r)] + [2 * i + 1 for i in range(r)]
        vals = vals.transpose(perm)
        # now axes are (a1..ar, b1..br); merge each (ai, bi) pair
        vals = np.moveaxis(vals.reshape((A.size,) * r + (B.size,) * r),
                           list(range(r, 2 * r)), [2 * i + 1 for i in range(r)])
        ops[sym] = vals.reshape((size,) * r)
    labels = [f"{x}_{y}" for x in A.labels for y in B.labels]
    return FiniteAlgebra(name or f"{A.name}x{B.name}", size, ops, labels=labels)


def subalgebra(A, elements, name=None):
    """The subalgebra on a closed subset, elements in increasing order."""
    elems = sorted(int(e) for e in elements)
    pos = {e: i for i, e in enumerate(elems)}
    ops = {}
    for sym, arr in A.ops.items():
        r = arr.ndim
        if r == 0:
            if int(arr) not in pos:
                raise NotAlgebraic(name or "subset", f"constant {sym} missing")
            ops[sym] = np.array(pos[int(arr)])
            continue
        sub = arr[np.ix_(*([elems] * r))]
        try:
            ops[sym] = np.vectorize(pos.__getitem__, otypes=[np.int64])(sub)
        except KeyError:
            raise NotAlgebraic(name or "subset", f"not closed under {sym}") from None
    return FiniteAlgebra(name or f"{A.name}|sub", len(elems), ops,
                         labels=[A.labels[e] for e in elems])


def subuniverse_generate(A, S):
    """Least subset containing ``S`` closed under the basic operations."""
    gens = np.asarray(sorted(int(s) for s in S), dtype=np.int64).reshape(-1, 1)
    rows = generate_subpower(A, gens, width=1)
    return frozenset(int(r[0]) for r in rows)


def relation_algebra(M, s, name=None, bounds=DEFAULT):
    """The relation ``s`` as a subalgebra of M^n (tuples in sorted order)."""
    rows = np.array(sorted(s.tuples), dtype=np.int64).reshape(len(s.tuples), s.arity)
    if len(rows) == 0:
        raise NotAlgebraic(name or "s", "empty relation")
    return subpower_algebra(M, rows, name or "s", bounds=bounds)


# --------------------------------------------------------------------------
# homomorphisms

def hom_problem(A, B):
    """The constraint problem whose solutions are the homomorphisms A -> B."""
    A.check_signature(B)
    p = Problem(A.size, B.size)
    for sym, ta in A.ops.items():
        r = ta.ndim
        tid = p.function(("op", sym), r, B.ops[sym].ravel())
        if r == 0:
            p.add(tid, [int(ta)])
            continue
        grid = np.indices((A.size,) * r).reshape(r, -1).T
        p.add_many(tid, np.column_stack([grid, ta.ravel()]))
    return p


def _solve_capped(p, bounds, what):
    cap = bounds.max_search
    sols = p.solve(limit=cap + 1, order=p.degree_order())
    if len(sols) > cap:
        raise SizeBoundExceeded(what, len(sols), cap)
    return [tuple(int(x) for x in row) for row in sols]


def hom_enumerate(A, B, partial=None, bounds=DEFAULT):
    """All homomorphisms A -> B extending ``partial``, as value tuples in
    lexicographic order."""
    if B.size > bounds.max_carrier:
        raise SizeBoundExceeded(f"hom target {B.name}", B.size, bounds.max_carrier)
    p = hom_problem(A, B)
    for a, b in (partial or {}).items():
        p.fix(a, b)
    return _solve_capped(p, bounds, f"hom({A.name}, {B.name})")


def first_hom(A, B, partial=None):
    p = hom_problem(A, B)
    for a, b in (partial or {}).items():
        p.fix(a, b)
    return p.first()


def is_hom(A, B, h):
    for sym, ta in A.ops.items():
        tb = B.ops[sym]
        r = ta.ndim
        if r == 0:
            if h[int(ta)] != int(tb):
                return False
            continue
        for args in itertools.product(range(A.size), repeat=r):
            if h[int(ta[args])] != int(tb[tuple(h[a] for a in args)]):
                return False
    return True


def compose(g, f):
    """g after f, for maps as value tuples."""
    return tuple(g[x] for x in f)


def is_retract_of(D, A, bounds=DEFAULT):
    """First pair (q: D -> A, p: A -> D) with p after q the identity, or None."""
    for q in hom_enumerate(D, A, bounds=bounds):
        if len(set(q)) != D.size:
            continue
        p = first_hom(A, D, {q[d]: d for d in range(D.size)})
        if p is not None:
            return q, p
    return None


def in_quasivariety(A, M, bounds=DEFAULT):
    """(True, None) when homs A -> M separate points, else (False, (a, b))."""
    homs = hom_enumerate(A, M, bounds=bounds)
    for a in range(A.size):
        for b in range(a + 1, A.size):
            if all(h[a] == h[b] for h in homs):
                return False, (a, b)
    return True, None


# --------------------------------------------------------------------------
# term clones and free algebras

def _projection_rows(n, k):
    pts = np.array(list(itertools.product(range(n), repeat=k)), dtype=np.int64).reshape(n ** k, k)
    return pts.T.copy()


def term_clone(A, k, bounds=DEFAULT):
    """The k-ary term operations of A, as OperationTables in lexicographic
    order of their value lists."""
    width = A.size ** k
    if width > bounds.max_tables:
        raise SizeBoundExceeded("term table width", width, bounds.max_tables)
    rows = generate_subpower(A, _projection_rows(A.size, k), limit=bounds.max_tables, width=width)
    return [OperationTable(k, tuple(int(x) for x in r)) for r in rows]


def free_algebra(M, k, bounds=DEFAULT):
    """The subalgebra of M^(M^k) generated by the k coordinate projections.

    Returns ``(F, generators)`` where ``generators[i]`` is the element of F
    that is the i-th projection. Carrier sorted by power index.
    """
    width = M.size ** k
    if width > bounds.max_tables:
        raise SizeBoundExceeded("free algebra width", width, bounds.max_tables)
    gens = _projection_rows(M.size, k)
    rows = generate_subpower(M, gens, limit=bounds.max_carrier, width=width)
    F = subpower_algebra(M, rows, f"F_{M.name}({k})", labels=[f"t{i}" for i in range(len(rows))],
                         bounds=bounds)
    index = RowIndex(M.size, width)
    lookup = {key: i for i, key in enumerate(index.keys(rows))}
    generators = [lookup[key] for key in index.keys(gens)] if k else []
    return F, generators


def all_subuniverses(M, n, bounds=DEFAULT):
    """All non-empty subuniverses of M^n as Relations (NextClosure order)."""
    npts = M.size ** n
    if npts > bounds.max_power_points:
        raise SizeBoundExceeded(f"points of {M.name}^{n}", npts, bounds.max_power_points)
    pts = np.stack(np.unravel_index(np.arange(npts), (M.size,) * n), axis=-1).astype(np.int64)
    w = np.array([M.size ** (n - 1 - i) for i in range(n)], dtype=np.int64)

    def close(mask):
        sel = [i for i in range(npts) if mask >> i & 1]
        rows = close_rows(M.ops, M.size, pts[sel], width=n)
        out = 0
        for c in (rows @ w).tolist():
            out |= 1 << c
        return out

    full = (1 << npts) - 1
    A = close(0)
    out = []
    while True:
        if A:
            out.append(Relation(n, frozenset(tuple(int(x) for x in pts[i])
                                             for i in range(npts) if A >> i & 1)))
            if len(out) > bounds.max_tables:
                raise SizeBoundExceeded("subuniverse count", len(out), bounds.max_tables)
        if A == full:
            break
        for i in range(npts - 1, -1, -1):
            bit = 1 << i
            if A & bit:
                continue
            low = A & (bit - 1)
            B = close(low | bit)
            if B & (bit - 1) == low:
                A = B
                break
    return out
