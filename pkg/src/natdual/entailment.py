"""Entailment: the finite test on D(s), pp-certificates, clone entailment,
projections and the retraction decomposition through G[ED(s)]."""
import itertools
from dataclasses import dataclass, field

import numpy as np

from .algebra import (FiniteAlgebra, Relation, all_subuniverses, closure_violation, hom_enumerate,
                      power, relation_algebra)
from .config import DEFAULT
from .errors import CertificateMismatch, NotAlgebraic, SizeBoundExceeded
from .kernel import Problem
from .structures import AlterEgo, FiniteStructure, power_points, struct_morphisms, struct_problem


def _rows(r):
    return np.array(r.sorted(), dtype=np.int64).reshape(len(r), r.arity)


def require_algebraic(M, s, name="s"):
    if len(s) == 0:
        raise NotAlgebraic(name, "empty relation")
    v = closure_violation(M, _rows(s))
    if v is not None:
        raise NotAlgebraic(name, v)


@dataclass
class LabeledDual:
    """D(s) with rho_i = the i-th projection; ``rho[i]`` is the index of
    rho_i among the homs and ``aliases`` maps i to the first j < i with
    rho_j = rho_i."""

    algebra: FiniteAlgebra
    D: FiniteStructure
    rho: list
    aliases: dict
    tau: list


def labeled_dual(M, ego, s, bounds=DEFAULT):
    from .duality import dual_of_algebra
    require_algebraic(M, s)
    sA = relation_algebra(M, s, bounds=bounds)
    D = dual_of_algebra(sA, ego, bounds)
    keys = {tuple(r): i for i, r in enumerate(D.points.tolist())}
    rho, aliases = [], {}
    for i in range(s.arity):
        j = keys[tuple(int(x) for x in sA.points[:, i])]
        if j in rho:
            aliases[i] = rho.index(j)
        rho.append(j)
    tau = [j for j in range(D.size) if j not in rho]
    return LabeledDual(sA, D, rho, aliases, tau)


@dataclass
class EntailmentVerdict:
    holds: bool
    witness: tuple = None        # u : D(s) -> M, values in D order
    escaped: tuple = None        # (u(rho_1), .., u(rho_n)) outside s
    on_duality: bool = None
    rho: list = field(default_factory=list)
    aliases: dict = field(default_factory=dict)
    dual_size: int = 0


def entails(M, ego, s, with_duality=True, bounds=DEFAULT):
    """Does G u H u R entail s?  Decided on the single structure D(s)."""
    from .duality import check_duality_on
    L = labeled_dual(M, ego, s, bounds)
    target = ego.structure()
    p = struct_problem(L.D, target)
    witness = escaped = None
    for t in itertools.product(range(M.size), repeat=s.arity):
        if t in s.tuples:
            continue
        if any(t[i] != t[j] for i, j in L.aliases.items()):
            continue
        q = _copy_problem(p)
        for i, v in enumerate(t):
            q.fix(L.rho[i], v)
        u = q.first()
        if u is not None:
            witness, escaped = u, t
            break
    on_dual = check_duality_on(L.algebra, ego, bounds).ok if with_duality else None
    return EntailmentVerdict(witness is None, witness, escaped, on_dual, L.rho, L.aliases, L.D.size)


def _copy_problem(p):
    q = Problem(p.n, p.m)
    q.domains = list(p.domains)
    q._blocks = p._blocks
    q._tables = p._tables
    q._table_ids = p._table_ids
    return q


# --------------------------------------------------------------------------
# primitive positive certificates

@dataclass
class PPFormula:
    """Exists (bound vars) . conjunction of atoms; variables are integers,
    ``free[i]`` is the variable standing for x_i."""

    nvars: int
    free: list
    atoms: list      # (symbol name or "=", tuple of variables)

    @property
    def bound(self):
        return [v for v in range(self.nvars) if v not in self.free]

    def render(self):
        names = {}
        for i, v in enumerate(self.free):
            names.setdefault(v, f"x{i + 1}")
        for v in self.bound:
            names[v] = f"y{v}"
        body = " & ".join(
            (f"{names[a[0]]} = {names[a[1]]}" if sym == "=" else f"{sym}({', '.join(names[x] for x in a)})")
            for sym, a in self.atoms) or "true"
        q = " ".join(names[v] for v in self.bound)
        return (f"exists {q} . " if q else "") + body


def pp_certificate(M, ego, s, bounds=DEFAULT):
    """The pp-type of (rho_1..rho_n) in D(s), validated against s."""
    L = labeled_dual(M, ego, s, bounds)
    atoms = []
    from .structures import pointwise_tuples
    for sym in ego.symbols:
        for tup in pointwise_tuples(L.D.points, ego.rel_table(sym)).tolist():
            atoms.append((sym.name, tuple(tup)))
    phi = PPFormula(L.D.size, list(L.rho), atoms)
    got = evaluate_pp(phi, ego)
    if got != s:
        raise CertificateMismatch(f"certificate defines {sorted(got.tuples)} not {sorted(s.tuples)}")
    return phi


def evaluate_pp(phi, ego):
    """{(c_1..c_n) : M satisfies phi(c)} by one satisfiability query per tuple."""
    m = ego.size
    p = Problem(phi.nvars, m)
    by_name = {sym.name: sym for sym in ego.symbols}
    eq = p.relation(("=",), 2, [(a, a) for a in range(m)])
    for name, args in phi.atoms:
        if name == "=":
            p.add(eq, args)
            continue
        sym = by_name[name]
        tid = p.relation(("r", name), sym.arity, sym.relation.tuples)
        p.add(tid, args)
    out = set()
    n = len(phi.free)
    for t in itertools.product(range(m), repeat=n):
        q = _copy_problem(p)
        for v, c in zip(phi.free, t):
            q.fix(v, c)
        if q.first() is not None:
            out.add(t)
    return Relation(n, frozenset(out))


# --------------------------------------------------------------------------
# clone entailment

@dataclass
class CloneVerdict:
    holds: bool
    violator: tuple = None       # u : M^|s| -> M, values over the power in index order
    escaped: tuple = None


def clone_entails(m, R, s, bounds=DEFAULT):
    """Is s in Inv(Pol(R))?  Every R-preserving u : M^|s| -> M must send
    the columns (rho_1..rho_n) of the tuple listing of s into s."""
    N = len(s)
    npts = m ** N
    if npts > bounds.max_tables:
        raise SizeBoundExceeded("clone-entailment power", npts, bounds.max_tables)
    rels = dict(R) if isinstance(R, dict) else {f"r{i}": r for i, r in enumerate(R)}
    dummy = FiniteAlgebra("carrier", m, {})
    ego = AlterEgo("R", dummy, R=rels)
    X = FiniteStructure(ego, power_points(m, N))
    p = struct_problem(X, ego.structure())
    rows = _rows(s)                       # N x n; column i is rho_i
    w = np.array([m ** (N - 1 - j) for j in range(N)], dtype=np.int64)
    rho = (rows.T @ w).tolist() if N else [0] * s.arity
    for t in itertools.product(range(m), repeat=s.arity):
        if t in s.tuples:
            continue
        if any(t[i] != t[j] for i in range(s.arity) for j in range(i) if rho[i] == rho[j]):
            continue
        q = _copy_problem(p)
        for i, v in enumerate(t):
            q.fix(rho[i], v)
        u = q.first()
        if u is not None:
            return CloneVerdict(False, u, t)
    return CloneVerdict(True)


# --------------------------------------------------------------------------
# relational constructs

def project(r, eta):
    """r_eta = {(d_eta(1), .., d_eta(n)) : d in r}; eta is 0-based and injective."""
    if len(set(eta)) != len(eta) or any(not 0 <= e < r.arity for e in eta):
        raise ValueError("eta must be an injective map into the coordinates")
    return Relation(len(eta), frozenset(tuple(t[e] for e in eta) for t in r.tuples))


def product_rel(r, s):
    return Relation(r.arity + s.arity, frozenset(a + b for a in r.tuples for b in s.tuples))


def intersect_rel(r, s):
    if r.arity != s.arity:
        raise ValueError("arity mismatch")
    return Relation(r.arity, r.tuples & s.tuples)


def _partitions(n):
    if n == 0:
        yield []
        return
    for p in _partitions(n - 1):
        for i in range(len(p)):
            yield p[:i] + [p[i] + [n - 1]] + p[i + 1:]
        yield p + [[n - 1]]


def trivial_rels(n, m):
    """Relations of arity n defined by equalities between coordinates."""
    out = []
    for part in _partitions(n):
        block = {}
        for bi, b in enumerate(part):
            for x in b:
                block[x] = bi
        tuples = frozenset(tuple(c[block[i]] for i in range(n))
                           for c in itertools.product(range(m), repeat=len(part)))
        out.append(Relation(n, tuples))
    return sorted(out, key=lambda r: (len(r), sorted(r.tuples)))


def remove_repetitions(r):
    """Drop coordinates that always repeat an earlier one; returns
    (relation, kept coordinates)."""
    keep = []
    for i in range(r.arity):
        if not any(all(t[i] == t[j] for t in r.tuples) for j in keep):
            keep.append(i)
    return project(r, keep), keep


# --------------------------------------------------------------------------
# projections and the retraction decomposition

@dataclass
class Classification:
    kind: str            # "plain", "retractive" or "bijective"
    q: list = None       # q(t) for t in sorted(r_eta), as tuples of r


def classify_projection(M, r, eta, bounds=DEFAULT):
    """Is the projection p : r -> r_eta a retraction (p q = id for some
    homomorphism q), and if so is it bijective?"""
    require_algebraic(M, r, "r")
    s = project(r, eta)
    sA = relation_algebra(M, s, bounds=bounds)
    homs = np.array(hom_enumerate(sA, M, bounds=bounds), dtype=np.int64).reshape(-1, sA.size)
    S = sA.points                                  # |s| x n
    free = [j for j in range(r.arity) if j not in eta]
    # candidates per remaining coordinate, checked against prefix projections
    order = list(eta) + free
    prefix = [set(tuple(t[c] for c in order[:len(eta) + d]) for t in r.tuples)
              for d in range(len(free) + 1)]
    cols = [S[:, i] for i in range(len(eta))]
    found = None
    stack = [(0, cols)]
    while stack:
        d, cur = stack.pop()
        if d == len(free):
            found = cur
            break
        for h in reversed(range(len(homs))):
            nxt = cur + [homs[h]]
            rows = set(zip(*(c.tolist() for c in nxt)))
            if rows <= prefix[d + 1]:
                stack.append((d + 1, nxt))
    if found is None:
        return Classification("plain")
    by_coord = dict(zip(order, found))
    q = [tuple(int(by_coord[c][i]) for c in range(r.arity)) for i in range(sA.size)]
    kind = "bijective" if len(r) == len(s) else "retractive"
    return Classification(kind, q)


def graph_of_dual(Z, labels, ego, bounds=DEFAULT):
    """G[E(Z)] = {(u(z_1), .., u(z_k)) : u : Z -> M a morphism}."""
    U = struct_morphisms(Z, ego.structure(), cap=bounds.max_dual_size, bounds=bounds)
    return Relation(len(labels), frozenset(tuple(int(x) for x in row) for row in U[:, labels]))


@dataclass
class RetractionCertificate:
    graph: Relation
    eta: list
    classification: Classification
    labels: list


def retraction_decomposition(M, ego, s, bounds=DEFAULT):
    """s as a retractive projection of G[ED(s)], coordinates ordered
    rho_1..rho_n then the remaining homs."""
    v = entails(M, ego, s, with_duality=False, bounds=bounds)
    if not v.holds:
        raise ValueError("s is not entailed")
    L = labeled_dual(M, ego, s, bounds)
    labels = list(L.rho) + list(L.tau)
    G = graph_of_dual(L.D, labels, ego, bounds)
    eta = list(range(s.arity))
    if project(G, eta) != s:
        raise CertificateMismatch("projection of G[ED(s)] is not s")
    c = classify_projection(M, G, eta, bounds)
    if c.kind == "plain":
        raise CertificateMismatch("no retraction onto s found")
    return RetractionCertificate(G, eta, c, labels)


def verify_retraction(M, cert, s):
    """Independent check of a certificate."""
    G, eta, c = cert.graph, cert.eta, cert.classification
    if project(G, eta) != s or c.q is None:
        return False
    ss = s.sorted()
    if len(c.q) != len(ss):
        return False
    for t, qt in zip(ss, c.q):
        if qt not in G.tuples or tuple(qt[e] for e in eta) != t:
            return False
    sA = relation_algebra(M, s)
    from .algebra import is_hom
    # q is a hom iff each coordinate is
    qarr = np.array(c.q, dtype=np.int64)
    if not all(is_hom(sA, M, tuple(int(x) for x in qarr[:, j])) for j in range(G.arity)):
        return False
    return c.kind == "retractive" or len(G) == len(s)


# --------------------------------------------------------------------------

@dataclass
class DensityReport:
    arity_bound: int
    checked: int
    failures: list
    statement: str = "checked up to the arity bound only"


def entailment_dense_upto(M, ego, arity_bound=3, bounds=DEFAULT):
    failures, checked = [], 0
    for n in range(1, arity_bound + 1):
        for s in all_subuniverses(M, n, bounds):
            checked += 1
            if not entails(M, ego, s, with_duality=False, bounds=bounds).holds:
                failures.append(s)
    return DensityReport(arity_bound, checked, failures)


def equalizer_closure(M, r, bounds=DEFAULT):
    """Intersection of the equalizers eq(phi, psi) of homs M^n -> M that
    contain r."""
    n = r.arity
    P = power(M, n, bounds)
    homs = np.array(hom_enumerate(P, M, bounds=bounds), dtype=np.int64).reshape(-1, P.size)
    w = np.array([M.size ** (n - 1 - i) for i in range(n)], dtype=np.int64)
    idx = _rows(r) @ w
    keep = np.ones(P.size, dtype=bool)
    for a in range(len(homs)):
        for b in range(a + 1, len(homs)):
            eq = homs[a] == homs[b]
            if eq[idx].all():
                keep &= eq
    pts = P.points
    return Relation(n, frozenset(tuple(int(x) for x in pts[i]) for i in np.flatnonzero(keep)))
