# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled search kernels; see _pykernel for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int32_t

cnp.import_array()

cdef enum:
    REL = 0
    FUN = 1

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int _lowbit(uint64_t x) nogil:
    return __builtin_ctzll(x)


cdef inline bint _holds(int c, const int32_t[:] scopes, const int32_t[:] soff,
                        const int32_t[:] ctab, const int32_t[:] tkind,
                        const int32_t[:] tarity, const int32_t[:] tdata,
                        const int32_t[:] toff, int32_t[:] assign, int m) nogil:
    cdef int t = ctab[c]
    cdef int k = tarity[t]
    cdef int s0 = soff[c]
    cdef long idx = 0
    cdef int i
    for i in range(k):
        idx = idx * m + assign[scopes[s0 + i]]
    if tkind[t] == REL:
        return tdata[toff[t] + idx] != 0
    return tdata[toff[t] + idx] == assign[scopes[s0 + k]]


def solve(int n, int m, domains, scopes_, scope_off_, con_table_, tkind_,
          tarity_, tdata_, toff_, order_, long limit=0):
    if m > 64:
        raise ValueError("domain size above 64")
    cdef const int32_t[:] scopes = np.ascontiguousarray(scopes_, dtype=np.int32)
    cdef const int32_t[:] soff = np.ascontiguousarray(scope_off_, dtype=np.int32)
    cdef const int32_t[:] ctab = np.ascontiguousarray(con_table_, dtype=np.int32)
    cdef const int32_t[:] tkind = np.ascontiguousarray(tkind_, dtype=np.int32)
    cdef const int32_t[:] tarity = np.ascontiguousarray(tarity_, dtype=np.int32)
    cdef const int32_t[:] tdata = np.ascontiguousarray(tdata_, dtype=np.int32)
    cdef const int32_t[:] toff = np.ascontiguousarray(toff_, dtype=np.int32)
    cdef const int32_t[:] order = np.ascontiguousarray(order_, dtype=np.int32)
    cdef int ncon = soff.shape[0] - 1
    cdef uint64_t[:] doms = np.zeros(max(n, 1), dtype=np.uint64)
    cdef int32_t[:] assign = np.zeros(max(n, 1), dtype=np.int32)
    cdef int32_t[:] pos = np.zeros(max(n, 1), dtype=np.int32)
    cdef int i, j, c, v, u, w, a, b, t, k, d, s0, s1, val
    cdef long idx
    cdef uint64_t mask, x, low, old, new
    cdef bint ok, multi, inner
    for i in range(n):
        doms[i] = <uint64_t>int(domains[i])

    # watch lists in CSR form, each constraint listed once per distinct var
    cdef int32_t[:] wcount = np.zeros(n + 1, dtype=np.int32)
    cdef int32_t[:] distinct = np.zeros(max(ncon, 1), dtype=np.int32)
    for c in range(ncon):
        s0 = soff[c]
        s1 = soff[c + 1]
        k = 0
        for i in range(s0, s1):
            v = scopes[i]
            inner = False
            for j in range(s0, i):
                if scopes[j] == v:
                    inner = True
                    break
            if not inner:
                wcount[v + 1] += 1
                k += 1
        distinct[c] = k
    for i in range(n):
        wcount[i + 1] += wcount[i]
    cdef int32_t[:] wlist = np.zeros(max(wcount[n], 1), dtype=np.int32)
    cdef int32_t[:] wfill = np.zeros(max(n, 1), dtype=np.int32)
    for c in range(ncon):
        s0 = soff[c]
        s1 = soff[c + 1]
        for i in range(s0, s1):
            v = scopes[i]
            inner = False
            for j in range(s0, i):
                if scopes[j] == v:
                    inner = True
                    break
            if not inner:
                wlist[wcount[v] + wfill[v]] = c
                wfill[v] += 1

    # nullary and single-variable constraints
    for c in range(ncon):
        if distinct[c] == 0:
            if not _holds(c, scopes, soff, ctab, tkind, tarity, tdata, toff, assign, m):
                return np.zeros((0, n), dtype=np.int32)
        elif distinct[c] == 1:
            v = scopes[soff[c]]
            mask = 0
            for a in range(m):
                if (doms[v] >> a) & 1:
                    assign[v] = a
                    if _holds(c, scopes, soff, ctab, tkind, tarity, tdata, toff, assign, m):
                        mask |= (<uint64_t>1) << a
            doms[v] = mask
    if n == 0:
        return np.zeros((1, 0), dtype=np.int32)
    for i in range(n):
        if doms[i] == 0:
            return np.zeros((0, n), dtype=np.int32)
    for i in range(n):
        pos[order[i]] = i

    # trail of (var, old mask); capacity grows on demand
    cdef long tcap = 1024
    cdef long tlen = 0
    trail_v_arr = np.zeros(tcap, dtype=np.int32)
    trail_m_arr = np.zeros(tcap, dtype=np.uint64)
    cdef int32_t[:] trail_v = trail_v_arr
    cdef uint64_t[:] trail_m = trail_m_arr
    cdef long[:] mark = np.zeros(n + 1, dtype=np.int_)
    cdef int32_t[:] cur = np.full(n + 1, -1, dtype=np.int32)

    sols = []
    cdef long nsol = 0
    d = 0
    mark[0] = 0
    while d >= 0:
        if d == n:
            sols.append(np.asarray(assign[:n]).copy())
            nsol += 1
            if limit > 0 and nsol >= limit:
                break
            d -= 1
            continue
        v = order[d]
        while tlen > mark[d]:
            tlen -= 1
            doms[trail_v[tlen]] = trail_m[tlen]
        if cur[d] + 1 >= 64:
            d -= 1
            continue
        x = doms[v] >> (cur[d] + 1)
        if x == 0:
            d -= 1
            continue
        a = cur[d] + 1 + _lowbit(x)
        cur[d] = a
        assign[v] = a
        ok = True
        for j in range(wcount[v], wcount[v + 1]):
            c = wlist[j]
            s0 = soff[c]
            s1 = soff[c + 1]
            u = -1
            multi = False
            for i in range(s0, s1):
                w = scopes[i]
                if pos[w] > d:
                    if u < 0:
                        u = w
                    elif w != u:
                        multi = True
                        break
            if multi or u < 0:
                continue
            old = doms[u]
            t = ctab[c]
            k = tarity[t]
            inner = False
            if tkind[t] == FUN and scopes[s0 + k] == u:
                for i in range(s0, s0 + k):
                    if scopes[i] == u:
                        inner = True
                        break
            if tkind[t] == FUN and scopes[s0 + k] == u and not inner:
                idx = 0
                for i in range(k):
                    idx = idx * m + assign[scopes[s0 + i]]
                val = tdata[toff[t] + idx]
                if val >= 0:
                    new = old & ((<uint64_t>1) << val)
                else:
                    new = 0
            else:
                new = 0
                x = old
                while x:
                    b = _lowbit(x)
                    low = (<uint64_t>1) << b
                    assign[u] = b
                    if _holds(c, scopes, soff, ctab, tkind, tarity, tdata, toff, assign, m):
                        new |= low
                    x ^= low
            if new != old:
                if tlen >= tcap:
                    tcap *= 2
                    trail_v_arr = np.resize(np.asarray(trail_v), tcap)
                    trail_m_arr = np.resize(np.asarray(trail_m), tcap)
                    trail_v = trail_v_arr
                    trail_m = trail_m_arr
                trail_v[tlen] = u
                trail_m[tlen] = old
                tlen += 1
                doms[u] = new
            if new == 0:
                ok = False
                break
        if ok:
            d += 1
            cur[d] = -1
            mark[d] = tlen
    if nsol == 0:
        return np.zeros((0, n), dtype=np.int32)
    return np.vstack(sols).astype(np.int32)


def close_mask(start, unary, binary, int n):
    cdef uint64_t closed = <uint64_t>int(start)
    cdef int nu = len(unary)
    cdef int nb = len(binary)
    cdef int32_t[:, :] U = np.ascontiguousarray(
        np.asarray(unary, dtype=np.int32).reshape(nu, n) if nu else np.zeros((0, n), dtype=np.int32))
    cdef int32_t[:, :] B = np.ascontiguousarray(
        np.asarray(binary, dtype=np.int32).reshape(nb, n * n) if nb else np.zeros((0, n * n), dtype=np.int32))
    cdef int32_t[:] todo = np.zeros(n + 1, dtype=np.int32)
    cdef int top = 0
    cdef int p, q, r, f, side
    cdef uint64_t x
    for p in range(n):
        if (closed >> p) & 1:
            todo[top] = p
            top += 1
    while top > 0:
        top -= 1
        p = todo[top]
        for f in range(nu):
            q = U[f, p]
            if q >= 0 and not ((closed >> q) & 1):
                closed |= (<uint64_t>1) << q
                todo[top] = q
                top += 1
        for f in range(nb):
            x = closed
            while x:
                r = _lowbit(x)
                x ^= (<uint64_t>1) << r
                for side in range(2):
                    if side == 0:
                        q = B[f, p * n + r]
                    else:
                        q = B[f, r * n + p]
                    if q >= 0 and not ((closed >> q) & 1):
                        closed |= (<uint64_t>1) << q
                        todo[top] = q
                        top += 1
    return int(closed)
