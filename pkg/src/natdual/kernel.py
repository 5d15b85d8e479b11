"""Backend selection and the constraint-problem builder used by every search.

The compiled core (``_ckernel``) is used when importable; setting
``NATDUAL_PURE_PYTHON=1`` forces the pure-Python fallback. Both backends
return identical solution lists.
"""
import os

import numpy as np

from . import _pykernel

BACKEND = "python"
_csolve = _pykernel.solve
_cclose = _pykernel.close_mask

if os.environ.get("NATDUAL_PURE_PYTHON") != "1":
    try:
        from . import _ckernel

        _csolve = _ckernel.solve
        _cclose = _ckernel.close_mask
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        pass


def use_backend(name):
    """Switch backend at runtime (tests and benchmarks)."""
    global BACKEND, _csolve, _cclose
    if name == "python":
        _csolve, _cclose = _pykernel.solve, _pykernel.close_mask
    elif name == "cython":
        from . import _ckernel

        _csolve, _cclose = _ckernel.solve, _ckernel.close_mask
    else:
        raise ValueError(name)
    BACKEND = name


class Problem:
    """A finite CSP over values ``0..m-1`` with table constraints."""

    def __init__(self, nvars, m):
        if m > 64:
            raise ValueError("target size above 64 is not supported")
        self.n = nvars
        self.m = m
        full = (1 << m) - 1
        self.domains = [full] * nvars
        self._blocks = []  # (table id, 2-d array of scopes)
        self._tables = []  # (kind, arity, flat)
        self._table_ids = {}

    def table(self, key, kind, arity, flat):
        """Register a table once under ``key``; returns its id."""
        tid = self._table_ids.get(key)
        if tid is None:
            tid = len(self._tables)
            self._tables.append((kind, arity, np.asarray(flat, dtype=np.int32).ravel()))
            self._table_ids[key] = tid
        return tid

    def relation(self, key, arity, allowed):
        """Table from a set of allowed value tuples."""
        if key in self._table_ids:
            return self._table_ids[key]
        flat = np.zeros(self.m ** arity, dtype=np.int32)
        for t in allowed:
            idx = 0
            for a in t:
                idx = idx * self.m + a
            flat[idx] = 1
        return self.table(key, _pykernel.REL, arity, flat)

    def function(self, key, arity, values):
        """Table giving the forced value of the last scope variable."""
        return self.table(key, _pykernel.FUN, arity, values)

    def add(self, tid, scope):
        self._blocks.append((tid, np.asarray([scope], dtype=np.int32).reshape(1, -1)))

    def add_many(self, tid, scopes):
        """Add one constraint per row of ``scopes`` (all sharing a table)."""
        arr = np.asarray(scopes, dtype=np.int32)
        if arr.size == 0:
            return
        self._blocks.append((tid, arr.reshape(len(arr), -1)))

    @property
    def num_constraints(self):
        return sum(len(b) for _, b in self._blocks)

    def restrict(self, var, values):
        mask = 0
        for a in values:
            mask |= 1 << int(a)
        self.domains[var] &= mask

    def fix(self, var, value):
        self.domains[var] &= 1 << int(value)

    def degree_order(self):
        deg = np.zeros(self.n, dtype=np.int64)
        for _, blk in self._blocks:
            for col in range(blk.shape[1]):
                dup = np.zeros(len(blk), dtype=bool)
                for prev in range(col):
                    dup |= blk[:, prev] == blk[:, col]
                np.add.at(deg, blk[~dup, col], 1)
        return sorted(range(self.n), key=lambda v: (-int(deg[v]), v))

    def solve(self, limit=0, order=None):
        """All solutions in lexicographic order (or the first ``limit``).

        With ``limit`` the search runs in index order so the returned
        solutions are the lexicographically smallest ones. Without it the
        search may use ``order`` and the result is sorted afterwards.
        """
        if limit:
            order = list(range(self.n))
        elif order is None:
            order = self.degree_order()
        lens, flats, con_table = [], [], []
        for tid, blk in self._blocks:
            lens.append(np.full(len(blk), blk.shape[1], dtype=np.int64))
            flats.append(blk.ravel())
            con_table.append(np.full(len(blk), tid, dtype=np.int32))
        ncon = sum(len(x) for x in lens)
        scope_off = np.zeros(ncon + 1, dtype=np.int32)
        if ncon:
            np.cumsum(np.concatenate(lens), out=scope_off[1:])
        flat_scopes = np.concatenate(flats) if flats else np.zeros(0, np.int32)
        con_table = np.concatenate(con_table) if con_table else np.zeros(0, np.int32)
        tkind = np.array([t[0] for t in self._tables], dtype=np.int32)
        tarity = np.array([t[1] for t in self._tables], dtype=np.int32)
        toff = np.zeros(len(self._tables) + 1, dtype=np.int32)
        for i, t in enumerate(self._tables):
            toff[i + 1] = toff[i] + len(t[2])
        tdata = (np.concatenate([t[2] for t in self._tables])
                 if self._tables else np.zeros(1, dtype=np.int32))
        res = _csolve(self.n, self.m, self.domains,
                      flat_scopes.astype(np.int32), scope_off, con_table,
                      tkind, tarity, tdata.astype(np.int32), toff,
                      np.asarray(order, dtype=np.int32), limit)
        arr = np.asarray(res, dtype=np.int32).reshape(-1, self.n)
        if not limit and len(arr) > 1 and self.n:
            arr = arr[np.lexsort(arr.T[::-1])]
        return arr

    def first(self):
        arr = self.solve(limit=1)
        return tuple(int(x) for x in arr[0]) if len(arr) else None


def close_mask(start, unary, binary, n):
    return _cclose(start, unary, binary, n)
