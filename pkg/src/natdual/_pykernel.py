"""Pure-Python search kernels. Reference semantics for the compiled core.

The map-search problem is a finite CSP: ``n`` variables over the values
``0..m-1`` (``m <= 64``), each variable restricted by a bitmask domain,
and a list of table constraints. A table is either a *relation* (flat 0/1
array over ``m**k`` argument tuples, row-major) or a *function* (flat array
over ``m**k`` input tuples giving the required value of a final output
variable, ``-1`` meaning no value is allowed).

Search is depth-first along ``order`` with forward checking: whenever a
constraint is left with exactly one unassigned variable, that variable's
domain is filtered. Values are tried in increasing order.
"""

REL = 0
FUN = 1


def _prepare(n, m, domains, scopes, scope_off, con_table, tkind, tarity, toff):
    ncon = len(scope_off) - 1
    watch = [[] for _ in range(n)]
    doms = list(domains)
    cons = []
    for c in range(ncon):
        sc = scopes[scope_off[c]:scope_off[c + 1]]
        t = con_table[c]
        cons.append((sc, tkind[t], tarity[t], toff[t]))
        seen = set()
        for v in sc:
            if v not in seen:
                seen.add(v)
                watch[v].append(c)
    return doms, cons, watch


def _holds(con, assign, m, tdata):
    sc, kind, k, off = con
    idx = 0
    for i in range(k):
        idx = idx * m + assign[sc[i]]
    if kind == REL:
        return tdata[off + idx] != 0
    return tdata[off + idx] == assign[sc[k]]


def solve(n, m, domains, scopes, scope_off, con_table, tkind, tarity, tdata,
          toff, order, limit=0):
    """Return all solutions (tuples indexed by variable) in search order.

    ``limit`` > 0 stops after that many solutions.
    """
    if m > 64:
        raise ValueError("domain size above 64")
    scopes, scope_off, con_table, tkind, tarity, toff, order = (
        [int(x) for x in a]
        for a in (scopes, scope_off, con_table, tkind, tarity, toff, order))
    domains = [int(x) for x in domains]
    doms, cons, watch = _prepare(n, m, domains, scopes, scope_off, con_table,
                                 tkind, tarity, toff)
    tdata = [int(x) for x in tdata]
    assign = [0] * n
    # constraints over a single distinct variable (or none) are applied once
    for c, con in enumerate(cons):
        vs = set(con[0])
        if len(vs) == 0:
            if not _holds(con, assign, m, tdata):
                return []
        elif len(vs) == 1:
            (v,) = vs
            mask = 0
            d = doms[v]
            for a in range(m):
                if d >> a & 1:
                    assign[v] = a
                    if _holds(con, assign, m, tdata):
                        mask |= 1 << a
            doms[v] = mask
    if n == 0:
        return [()]
    for d in doms:
        if d == 0:
            return []
    pos = [0] * n
    for i, v in enumerate(order):
        pos[v] = i

    trail = []
    mark = [0] * (n + 1)
    cur = [-1] * (n + 1)
    out = []
    d = 0
    mark[0] = 0
    while d >= 0:
        if d == n:
            out.append(tuple(assign))
            if limit and len(out) >= limit:
                break
            d -= 1
            continue
        v = order[d]
        while len(trail) > mark[d]:
            u, old = trail.pop()
            doms[u] = old
        dv = doms[v] >> (cur[d] + 1)
        if dv == 0:
            d -= 1
            continue
        a = cur[d] + 1 + ((dv & -dv).bit_length() - 1)
        cur[d] = a
        assign[v] = a
        ok = True
        for c in watch[v]:
            con = cons[c]
            sc = con[0]
            u = -1
            multi = False
            for w in sc:
                if pos[w] > d:
                    if u < 0:
                        u = w
                    elif w != u:
                        multi = True
                        break
            if multi or u < 0:
                continue
            old = doms[u]
            if con[1] == FUN and sc[con[2]] == u and u not in sc[:con[2]]:
                k = con[2]
                idx = 0
                for i in range(k):
                    idx = idx * m + assign[sc[i]]
                val = tdata[con[3] + idx]
                new = old & (1 << val) if val >= 0 else 0
            else:
                new = 0
                x = old
                while x:
                    low = x & -x
                    b = low.bit_length() - 1
                    assign[u] = b
                    if _holds(con, assign, m, tdata):
                        new |= low
                    x ^= low
            if new != old:
                trail.append((u, old))
                doms[u] = new
            if new == 0:
                ok = False
                break
        if ok:
            d += 1
            cur[d] = -1
            mark[d] = len(trail)
    return out


def close_mask(start, unary, binary, n):
    """Least superset of bitmask ``start`` closed under point maps.

    ``unary`` is a list of length-``n`` lists (image point or -1),
    ``binary`` a list of ``n*n`` lists (image point or -1).
    """
    closed = start
    todo = [p for p in range(n) if start >> p & 1]
    while todo:
        p = todo.pop()
        new = []
        for f in unary:
            q = f[p]
            if q >= 0 and not closed >> q & 1:
                closed |= 1 << q
                new.append(q)
        for g in binary:
            x = closed
            while x:
                low = x & -x
                r = low.bit_length() - 1
                x ^= low
                for q in (g[p * n + r], g[r * n + p]):
                    if q >= 0 and not closed >> q & 1:
                        closed |= 1 << q
                        new.append(q)
        todo.extend(new)
    return closed
