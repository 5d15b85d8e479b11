"""Alter egos and finite structures realised inside their powers.

Everything on this side is finite and discretely topologised, so a
structure morphism is just a map preserving the relations and the graphs
of the (partial) operations.
"""
from dataclasses import dataclass, field

import numpy as np

from .algebra import FiniteAlgebra, Relation, RowIndex, close_rows, closure_violation
from .config import DEFAULT
from .errors import SizeBoundExceeded
from .kernel import Problem, close_mask


class PartialOperation:
    """A partial operation given by an explicit domain -> value map."""

    def __init__(self, arity, mapping):
        self.arity = int(arity)
        self.mapping = {tuple(int(x) for x in k): int(v) for k, v in dict(mapping).items()}
        if any(len(k) != self.arity for k in self.mapping):
            raise ValueError("domain tuple of wrong arity")

    @property
    def domain(self):
        return sorted(self.mapping)

    def values(self):
        return [self.mapping[t] for t in self.domain]

    def dense(self, m):
        arr = np.full((m,) * self.arity, -1, dtype=np.int64)
        for t, v in self.mapping.items():
            arr[t] = v
        return arr

    def __call__(self, *args):
        return self.mapping.get(tuple(args))

    def __eq__(self, other):
        return isinstance(other, PartialOperation) and (self.arity, self.mapping) == (other.arity, other.mapping)

    def __repr__(self):
        return f"PartialOperation({self.arity}, {self.mapping})"


def graph_of(op):
    """graph(g) = {(x1..xn, g(x1..xn))} for a total table (ndarray) or a
    partial operation."""
    if isinstance(op, PartialOperation):
        return Relation(op.arity + 1, frozenset(t + (v,) for t, v in op.mapping.items()))
    arr = np.asarray(op)
    if arr.ndim == 0:
        return Relation(1, frozenset({(int(arr),)}))
    idx = np.indices(arr.shape).reshape(arr.ndim, -1).T
    return Relation(arr.ndim + 1, frozenset(tuple(int(x) for x in row) + (int(v),)
                                            for row, v in zip(idx, arr.ravel())))


@dataclass(frozen=True)
class Symbol:
    kind: str       # "G", "H" or "R"
    name: str
    relation: Relation
    dense: object = field(default=None, compare=False)   # op table with -1, ops only

    @property
    def arity(self):
        return self.relation.arity


class AlterEgo:
    """M~ = (M; G, H, R) on the carrier of ``over``."""

    def __init__(self, name, over, G=None, H=None, R=None):
        self.name = name
        self.over = over
        m = over.size
        self.G = {}
        for sym, table in (G or {}).items():
            arr = np.array(table, dtype=np.int64)
            if arr.ndim and arr.shape != (m,) * arr.ndim:
                raise ValueError(f"{name}.{sym}: table shape {arr.shape}")
            arr.setflags(write=False)
            self.G[sym] = arr
        self.H = {sym: op if isinstance(op, PartialOperation) else PartialOperation(*op)
                  for sym, op in (H or {}).items()}
        self.R = {sym: r if isinstance(r, Relation) else Relation.of(r) for sym, r in (R or {}).items()}
        names = list(self.G) + list(self.H) + list(self.R)
        if len(set(names)) != len(names):
            raise ValueError(f"{name}: repeated symbol")
        for r in self.R.values():
            r.check_carrier(m)
        for op in self.H.values():
            graph_of(op).check_carrier(m)
        self.symbols = ([Symbol("G", s, graph_of(a), a) for s, a in self.G.items()]
                        + [Symbol("H", s, graph_of(p), p.dense(m)) for s, p in self.H.items()]
                        + [Symbol("R", s, r) for s, r in self.R.items()])
        self._rel_tables = {}

    @property
    def size(self):
        return self.over.size

    @property
    def point_ops(self):
        """Operations (total and partial) as dense tables with -1 for undefined."""
        return {s.name: s.dense for s in self.symbols if s.kind != "R"}

    def rel_table(self, sym):
        """0/1 membership array of shape (m,)*arity for a symbol's relation."""
        t = self._rel_tables.get(sym.name)
        if t is None:
            t = np.zeros((self.size,) * sym.arity, dtype=bool)
            for tup in sym.relation.tuples:
                t[tup] = True
            self._rel_tables[sym.name] = t
        return t

    def restrict(self, names, name=None):
        """The ego keeping only the listed symbols."""
        keep = set(names)
        return AlterEgo(name or self.name, self.over,
                        {s: a for s, a in self.G.items() if s in keep},
                        {s: p for s, p in self.H.items() if s in keep},
                        {s: r for s, r in self.R.items() if s in keep})

    def structure(self):
        """The ego itself as the structure on M^1."""
        return FiniteStructure(self, np.arange(self.size).reshape(-1, 1), name=self.name,
                               labels=self.over.labels)

    def __eq__(self, other):
        if not isinstance(other, AlterEgo):
            return NotImplemented
        return (self.name == other.name and self.over == other.over
                and list(self.G) == list(other.G)
                and all(np.array_equal(self.G[s], other.G[s]) for s in self.G)
                and self.H == other.H and self.R == other.R)

    __hash__ = object.__hash__

    def __repr__(self):
        return f"<AlterEgo {self.name} over {self.over.name}: {[s.name for s in self.symbols]}>"


@dataclass
class AlgebraicityReport:
    ok: bool
    items: list   # (symbol name, ok, violation or None)

    def failures(self):
        return [(n, v) for n, ok, v in self.items if not ok]


def is_algebraic_over(ego):
    """Each relation and operation graph must be a subuniverse of a power of M."""
    items = []
    for sym in ego.symbols:
        rows = np.array(sym.relation.sorted(), dtype=np.int64).reshape(len(sym.relation), sym.arity)
        v = closure_violation(ego.over, rows)
        items.append((sym.name, v is None, v))
    return AlgebraicityReport(all(ok for _, ok, _ in items), items)


# --------------------------------------------------------------------------
# finite structures

class FiniteStructure:
    """A substructure of ego^k: rows of ``points`` are the elements."""

    def __init__(self, ego, points, name=None, labels=None):
        self.ego = ego
        self.points = np.asarray(points, dtype=np.int64)
        if self.points.ndim != 2:
            raise ValueError("points must be a 2-d array")
        self.k = self.points.shape[1]
        self.name = name or f"{ego.name}-sub"
        self.labels = labels
        self._index = RowIndex(ego.size, self.k)
        self._lookup = {key: i for i, key in enumerate(self._index.keys(self.points))}
        if len(self._lookup) != len(self.points):
            raise ValueError("repeated point")

    @property
    def size(self):
        return len(self.points)

    def index_of(self, row):
        return self._lookup.get(self._index.keys(np.asarray(row).reshape(1, -1))[0])

    def closure_violation(self):
        """None if closed under G and H-where-defined, else (symbol, args)."""
        for sym in self.ego.symbols:
            if sym.kind == "R":
                continue
            arr = sym.dense
            r = arr.ndim
            if r == 0:
                if self.index_of(np.full(self.k, int(arr))) is None:
                    return sym.name, ()
                continue
            grid = np.indices((self.size,) * r).reshape(r, -1).T
            vals = arr[tuple(self.points[grid[:, i]] for i in range(r))]
            for args, row in zip(grid, vals):
                if (row >= 0).all() and self.index_of(row) is None:
                    return sym.name, tuple(int(a) for a in args)
        return None

    def mask(self):
        """Bitmask of the points inside ego^k (point index = mixed radix)."""
        w = np.array([self.ego.size ** (self.k - 1 - i) for i in range(self.k)], dtype=np.int64)
        out = 0
        for c in (self.points @ w).tolist():
            out |= 1 << c
        return out

    def __repr__(self):
        return f"<FiniteStructure {self.name} k={self.k} |{self.size}|>"


def power_points(m, k):
    return np.stack(np.unravel_index(np.arange(m ** k), (m,) * k), axis=-1).astype(np.int64)


def structure_from_mask(ego, k, mask, name=None):
    pts = power_points(ego.size, k)
    sel = [i for i in range(len(pts)) if mask >> i & 1]
    return FiniteStructure(ego, pts[sel], name=name)


def substructure_generate(ego, k, S, name=None):
    """Least subset of ego^k containing the rows ``S`` closed under G and H."""
    rows = close_rows(ego.point_ops, ego.size, np.asarray(S, dtype=np.int64).reshape(-1, k), width=k)
    return FiniteStructure(ego, rows, name=name)


# --------------------------------------------------------------------------
# morphism search

def pointwise_tuples(P, table):
    """All (i1..ia) with (P[i1, j], .., P[ia, j]) in the relation for every
    coordinate j; ``table`` is a boolean array of shape (m,)*a."""
    a = table.ndim
    N = len(P)
    cur = np.zeros((1, 0), dtype=np.int64)
    for t in range(1, a + 1):
        proj = table.any(axis=tuple(range(t, a))) if t < a else table
        out = []
        step = max(1, (1 << 20) // max(N, 1))
        for s in range(0, len(cur), step):
            head = cur[s:s + step]
            cand = np.concatenate([np.repeat(head, N, axis=0),
                                   np.tile(np.arange(N), len(head))[:, None]], axis=1)
            ok = proj[tuple(P[cand[:, i]] for i in range(t))].all(axis=1)
            out.append(cand[ok])
        cur = np.concatenate(out) if out else np.zeros((0, t), dtype=np.int64)
        if len(cur) == 0:
            break
    return cur.reshape(-1, a)


def _target_function(Y, dense):
    """Values of a pointwise operation on Y as Y-indices (-1 if undefined or
    leaving Y), flattened over Y^arity."""
    r = dense.ndim
    grid = np.indices((Y.size,) * r).reshape(r, -1).T
    vals = dense[tuple(Y.points[grid[:, i]] for i in range(r))]
    ok = (vals >= 0).all(axis=1)
    out = np.full(len(grid), -1, dtype=np.int64)
    if ok.any():
        idx = [Y.index_of(row) for row in vals[ok]]
        out[ok] = [-1 if i is None else i for i in idx]
    return out


def struct_problem(X, Y, symbols=None):
    """CSP whose solutions are the structure morphisms X -> Y."""
    if Y.ego is not X.ego and [s.name for s in X.ego.symbols] != [s.name for s in Y.ego.symbols]:
        raise ValueError("structures over different alter egos")
    if Y.size > 64:
        raise SizeBoundExceeded("morphism target", Y.size, 64)
    p = Problem(X.size, Y.size)
    ego = Y.ego
    for sym in (symbols if symbols is not None else ego.symbols):
        if sym.kind != "R" and sym.dense.ndim > 0:
            src = pointwise_tuples(X.points, X.ego.rel_table(sym))
            if len(src):
                tid = p.function(("f", sym.name), sym.arity - 1, _target_function(Y, sym.dense))
                p.add_many(tid, src)
            continue
        table = ego.rel_table(sym)
        src = pointwise_tuples(X.points, table)
        if len(src) == 0:
            continue
        allowed = pointwise_tuples(Y.points, table)
        flat = np.zeros(Y.size ** sym.arity, dtype=np.int32)
        if len(allowed):
            w = np.array([Y.size ** (sym.arity - 1 - i) for i in range(sym.arity)], dtype=np.int64)
            flat[allowed @ w] = 1
        tid = p.table(("r", sym.name), 0, sym.arity, flat)
        p.add_many(tid, src)
    return p


def struct_morphisms(X, Y, partial=None, cap=None, bounds=DEFAULT):
    """All structure morphisms X -> Y as a lexicographically sorted
    (count, |X|) array."""
    p = struct_problem(X, Y)
    for x, y in (partial or {}).items():
        p.fix(x, y)
    cap = bounds.max_search if cap is None else cap
    sols = p.solve(limit=cap + 1, order=p.degree_order())
    if len(sols) > cap:
        raise SizeBoundExceeded(f"morphisms {X.name} -> {Y.name}", len(sols), cap)
    return sols.astype(np.int64)


def is_morphism(X, Y, phi):
    phi = np.asarray(phi, dtype=np.int64)
    for sym in Y.ego.symbols:
        table = Y.ego.rel_table(sym)
        src = pointwise_tuples(X.points, table)
        if len(src) == 0:
            continue
        img = Y.points[phi[src]]          # (K, a, k)
        if not table[tuple(img[:, i, :] for i in range(sym.arity))].all():
            return False
    return True


# --------------------------------------------------------------------------
# closed sets of ego^k

class ClosureSystem:
    """Closure of point sets of ego^k under G and H, on bitmasks."""

    def __init__(self, ego, k, bounds=DEFAULT):
        n = ego.size ** k
        if n > bounds.max_power_points:
            raise SizeBoundExceeded(f"points of {ego.name}^{k}", n, bounds.max_power_points)
        self.ego, self.k, self.n = ego, k, n
        pts = power_points(ego.size, k)
        self.points = pts
        w = np.array([ego.size ** (k - 1 - i) for i in range(k)], dtype=np.int64)
        self.unary, self.binary, self.other = [], [], []
        base = 0
        for sym in ego.symbols:
            if sym.kind == "R":
                continue
            arr = sym.dense
            r = arr.ndim
            if r == 0:
                if int(arr) >= 0:
                    base |= 1 << int(np.full(k, int(arr)) @ w)
                continue
            grid = np.indices((n,) * r).reshape(r, -1).T
            vals = arr[tuple(pts[grid[:, i]] for i in range(r))]
            code = np.where((vals >= 0).all(axis=1), vals @ w, -1).astype(np.int64)
            if r == 1:
                self.unary.append(code.tolist())
            elif r == 2:
                self.binary.append(code.tolist())
            else:
                self.other.append((r, code.reshape((n,) * r)))
        self.base = base

    def close(self, mask):
        mask |= self.base
        while True:
            mask = close_mask(mask, self.unary, self.binary, self.n)
            if not self.other:
                return mask
            new = mask
            members = [i for i in range(self.n) if mask >> i & 1]
            for r, code in self.other:
                sub = code[np.ix_(*([members] * r))].ravel()
                for c in sub[sub >= 0].tolist():
                    new |= 1 << c
            if new == mask:
                return mask
            mask = new

    def closed_sets(self, max_count=None):
        """Non-empty closed sets in lectic order (Ganter's NextClosure).

        Returns (list of masks, truncated flag).
        """
        n = self.n
        full = (1 << n) - 1
        A = self.close(0)
        out = []
        truncated = False
        while True:
            if A:
                if max_count is not None and len(out) >= max_count:
                    truncated = True
                    break
                out.append(A)
            if A == full:
                break
            for i in range(n - 1, -1, -1):
                bit = 1 << i
                if A & bit:
                    continue
                low = A & (bit - 1)
                B = self.close(low | bit)
                if B & (bit - 1) == low:
                    A = B
                    break
        return out, truncated


def canonical_key(mask):
    """Order: size first, then the sorted point indices."""
    pts = []
    x = mask
    while x:
        low = x & -x
        pts.append(low.bit_length() - 1)
        x ^= low
    return (len(pts), pts)


@dataclass
class SubstructureList:
    structures: list
    masks: list
    truncated: bool


def enumerate_substructures(ego, k, max_count=None, bounds=DEFAULT):
    """All non-empty closed substructures of ego^k, ordered by size then
    point indices. With ``max_count`` the lectic enumeration stops early and
    ``truncated`` is set."""
    cs = ClosureSystem(ego, k, bounds)
    masks, truncated = cs.closed_sets(max_count)
    masks.sort(key=canonical_key)
    structs = [FiniteStructure(ego, cs.points[canonical_key(mk)[1]], name=f"{ego.name}^{k}[{mk:x}]")
               for mk in masks]
    return SubstructureList(structs, masks, truncated)
