"""Execute check commands (from check plans, the manifest or the cli) and
re-verify the witnesses they emit."""
import json
import multiprocessing
from dataclasses import dataclass, field

import numpy as np

from . import catalog
from .algebra import (FiniteAlgebra, all_subuniverses, free_algebra, hom_enumerate, is_hom, is_retract_of,
                      subpower_algebra)
from .config import DEFAULT
from .duality import (InjectivityWitness, check_duality_on, check_fullness_on, dual_of_algebra,
                      search_injectivity_failure, verify_injectivity_witness)
from .endo import double_stone_core, endo_ego, is_k_endoprimal, verify_endoprimality_witness
from .entailment import clone_entails, entails, labeled_dual
from .errors import DualityError
from .speclang import Command, KNOWN_COMMANDS, parse
from .structures import (AlterEgo, FiniteStructure, canonical_key, enumerate_substructures, is_algebraic_over,
                         is_morphism, power_points)

POSITIVE = {"yes", "iso", "holds", "present", "none"}
INFORMATIONAL = {"free-algebra", "core"}


@dataclass
class Outcome:
    command: str
    args: dict
    verdict: str
    witness: object = None
    detail: dict = field(default_factory=dict)
    expected: str = None

    @property
    def passed(self):
        if self.verdict == "error":
            return False
        if self.expected is not None:
            return self.verdict == self.expected
        return self.command in INFORMATIONAL or self.verdict in POSITIVE


class Env:
    """Name resolution: declarations from a document first, then the catalog."""

    def __init__(self, elaboration=None, source="catalog"):
        self.el = elaboration
        self.source = source

    def algebra(self, name):
        if self.el and name in self.el.algebras:
            return self.el.algebras[name]
        return _catalog("algebra", name)

    def ego(self, name):
        if self.el and name in self.el.egos:
            return self.el.egos[name]
        return _catalog("ego", name)

    def relation(self, name):
        if self.el and name in self.el.relations:
            return self.el.relations[name]
        raise KeyError(name)

    def origin(self, kind, name):
        if self.el:
            table = {"algebra": self.el.algebras, "ego": self.el.egos, "rel": self.el.relations}[kind]
            if name in table:
                return self.source
        return "catalog"


def _catalog(kind, name):
    for e in catalog.load_catalog():
        if e.id == name and e.kind == kind:
            return e.obj
    raise KeyError(f"no {kind} {name!r}")


def catalog_resolver(kind, name):
    try:
        return _catalog(kind, name)
    except KeyError:
        return None


def _ints(x):
    if x is None:
        return None
    return [int(v) for v in x]


# --------------------------------------------------------------------------
# commands

def _algebraic(env, a, bounds, jobs):
    rep = is_algebraic_over(env.ego(a["ego"]))
    bad = rep.failures()
    wit = {"symbol": bad[0][0], "operation": bad[0][1][0]} if bad else None
    return ("yes" if rep.ok else "no"), wit, {"symbols": len(rep.items)}


def _duality_verdict(A, ego, bounds):
    v = check_duality_on(A, ego, bounds)
    wit = None
    if v.witness is not None:
        wit = {"kind": v.kind, "map": _ints(v.witness)}
    return v.kind, wit, {"evaluations": v.counts[0], "morphisms": v.counts[1]}


def _duality(env, a, bounds, jobs):
    return _duality_verdict(env.algebra(a["algebra"]), env.ego(a["ego"]), bounds)


def _endodual(env, a, bounds, jobs):
    return _duality_verdict(env.algebra(a["algebra"]), endo_ego(env.algebra(a["over"]), bounds=bounds),
                            bounds)


def _subalgebras(env, a, bounds, jobs):
    A, ego = env.algebra(a["algebra"]), env.ego(a["ego"])
    count = 0
    for k in range(1, int(a["power"]) + 1):
        for r in all_subuniverses(A, k, bounds):
            rows = np.array(sorted(r.tuples), dtype=np.int64)
            B = subpower_algebra(A, rows, f"{A.name}^{k}-sub", bounds=bounds)
            v = check_duality_on(B, ego, bounds)
            count += 1
            if not v.ok:
                return v.kind, {"kind": v.kind, "power": k, "rows": rows.tolist(),
                                "map": _ints(v.witness)}, {"checked": count}
    return "iso", None, {"checked": count}


_WORK = {}


def _set_work(ego, k, bounds):
    _WORK.update(ego=ego, k=k, bounds=bounds)


def _fullness_one(pts):
    ego, k, bounds = _WORK["ego"], _WORK["k"], _WORK["bounds"]
    X = FiniteStructure(ego, power_points(ego.size, k)[pts])
    v = check_fullness_on(X, bounds=bounds)
    return v.kind, _ints(v.witness), v.method


def _fullness(env, a, bounds, jobs):
    ego, k = env.ego(a["ego"]), int(a["k"])
    subs = enumerate_substructures(ego, k, bounds=bounds)
    tasks = [canonical_key(mk)[1] for mk in subs.masks]
    results = _ordered_map(_fullness_one, tasks, jobs, _set_work, (ego, k, bounds))
    methods = sorted({r[2] for r in results})
    for pts, (kind, wit, _) in zip(tasks, results):
        if kind != "iso":
            return "fails", {"kind": kind, "k": k, "points": pts, "map": wit}, \
                {"checked": len(tasks), "methods": methods}
    return "iso", None, {"checked": len(tasks), "methods": methods}


def _injectivity(env, a, bounds, jobs):
    ego = env.ego(a["ego"])
    r = search_injectivity_failure(ego, int(a["power"]), int(a["size"]), bounds)
    detail = {"closed_sets": {str(k): v for k, v in r.checked.items()}, "statement": r.statement}
    if r.witness is None:
        return "none", None, detail
    w = r.witness
    return "witness", {"k": w.k, "Y": list(w.Y), "X": list(w.X), "phi": _ints(w.phi)}, detail


def _relation_on(env, name, A):
    r, on = env.relation(name)
    if on != A.name:
        raise DualityError(f"relation {name!r} is on {on!r}, not {A.name!r}")
    return r


def _entails(env, a, bounds, jobs):
    ego = env.ego(a["ego"])
    s = _relation_on(env, a["rel"], ego.over)
    v = entails(ego.over, ego, s, bounds=bounds)
    detail = {"dual_size": v.dual_size, "duality_on_s": v.on_duality}
    if v.holds:
        return "holds", None, detail
    return "fails", {"map": _ints(v.witness), "escaped": _ints(v.escaped)}, detail


def _clone_entails(env, a, bounds, jobs):
    names = a["rels"].split(",")
    s, on = env.relation(a["rel"])
    R = {}
    for n in names:
        r, o = env.relation(n)
        if o != on:
            raise DualityError(f"relations {n!r} and {a['rel']!r} live on different algebras")
        R[n] = r
    m = env.algebra(on).size
    v = clone_entails(m, R, s, bounds)
    if v.holds:
        return "holds", None, {}
    return "fails", {"table": _ints(v.violator), "escaped": _ints(v.escaped)}, {}


def _endoprimal(env, a, bounds, jobs):
    v = is_k_endoprimal(env.algebra(a["algebra"]), int(a["k"]), bounds)
    return ("holds" if v.holds else "fails"), (None if v.holds else {"table": _ints(v.witness)}), \
        {"clone_size": v.clone_size}


def _free(env, a, bounds, jobs):
    F, gens = free_algebra(env.algebra(a["algebra"]), int(a["k"]), bounds)
    return str(F.size), None, {"generators": gens}


def _retract(env, a, bounds, jobs):
    F, _ = free_algebra(env.algebra(a["algebra"]), int(a["k"]), bounds)
    r = is_retract_of(env.algebra(a["retract"]), F, bounds)
    if r is None:
        return "absent", None, {"free_size": F.size}
    return "present", {"q": _ints(r[0]), "p": _ints(r[1])}, {"free_size": F.size}


def _core(env, a, bounds, jobs):
    L = env.algebra(a["algebra"])
    K = sorted(double_stone_core(L))
    return (",".join(L.labels[x] for x in K) or "none"), None, {}


HANDLERS = {
    "algebraic": _algebraic, "duality": _duality, "endodual": _endodual,
    "duality-subalgebras": _subalgebras, "fullness": _fullness, "injectivity": _injectivity,
    "entails": _entails, "clone-entails": _clone_entails, "endoprimal": _endoprimal,
    "free-algebra": _free, "retract": _retract, "core": _core,
}
assert set(HANDLERS) == set(KNOWN_COMMANDS)


def _ordered_map(fn, tasks, jobs, init=None, initargs=()):
    """map with results in task order whatever the worker count."""
    if jobs <= 1 or len(tasks) < 2:
        if init:
            init(*initargs)
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * jobs))
    with multiprocessing.get_context("spawn").Pool(jobs, init, initargs) as pool:
        return list(pool.imap(fn, tasks, chunksize=chunk))


def run_command(cmd, env=None, bounds=DEFAULT, jobs=1):
    env = env or Env()
    args = {k: v for k, v in cmd.args.items() if k != "expect"}
    expected = cmd.args.get("expect")
    try:
        verdict, witness, detail = HANDLERS[cmd.name](env, args, bounds, jobs)
    except (DualityError, KeyError, ValueError) as e:
        return Outcome(cmd.name, args, "error", None, {"error": str(e).strip("'\"")}, expected)
    return Outcome(cmd.name, args, verdict, witness, detail, expected)


def parse_command(line):
    """A single command line such as ``duality algebra=dl-2 ego=three-T``."""
    doc = parse(f"check _ {{ {line} ; }}")
    if doc.diagnostics:
        raise ValueError("; ".join(d.message for d in doc.diagnostics))
    c = doc.declarations[0].commands[0]
    if c.name not in KNOWN_COMMANDS:
        raise ValueError(f"unknown operation {c.name!r}")
    return c


# --------------------------------------------------------------------------
# witness re-verification

def verify_witness(command, args, witness, env=None, bounds=DEFAULT):
    """Re-run the preservation checks behind a reported witness."""
    env = env or Env()
    if witness is None:
        return False
    if command in ("duality", "endodual"):
        A = env.algebra(args["algebra"])
        ego = env.ego(args["ego"]) if command == "duality" else endo_ego(env.algebra(args["over"]), bounds=bounds)
        return _verify_duality_witness(A, ego, witness, bounds)
    if command == "duality-subalgebras":
        A = env.algebra(args["algebra"])
        B = subpower_algebra(A, np.array(witness["rows"], dtype=np.int64), "sub", bounds=bounds)
        return _verify_duality_witness(B, env.ego(args["ego"]), witness, bounds)
    if command == "fullness":
        ego = env.ego(args["ego"])
        X = FiniteStructure(ego, power_points(ego.size, witness["k"])[witness["points"]])
        v = check_fullness_on(X, method="direct", bounds=bounds)
        return v.kind == witness["kind"] and _ints(v.witness) == witness["map"]
    if command == "injectivity":
        w = InjectivityWitness(witness["k"], witness["Y"], witness["X"], tuple(witness["phi"]))
        return verify_injectivity_witness(env.ego(args["ego"]), w, bounds)
    if command == "entails":
        ego = env.ego(args["ego"])
        s = _relation_on(env, args["rel"], ego.over)
        L = labeled_dual(ego.over, ego, s, bounds)
        u = witness["map"]
        esc = tuple(u[j] for j in L.rho)
        return (is_morphism(L.D, ego.structure(), u) and esc == tuple(witness["escaped"])
                and esc not in s.tuples)
    if command == "clone-entails":
        s, on = env.relation(args["rel"])
        m = env.algebra(on).size
        R = {n: env.relation(n)[0] for n in args["rels"].split(",")}
        dummy = AlterEgo("R", FiniteAlgebra("carrier", m, {}), R=R)
        X = FiniteStructure(dummy, power_points(m, len(s)))
        u = witness["table"]
        rows = np.array(sorted(s.tuples), dtype=np.int64)
        w = np.array([m ** (len(s) - 1 - j) for j in range(len(s))], dtype=np.int64)
        esc = tuple(u[c] for c in (rows.T @ w).tolist())
        return is_morphism(X, dummy.structure(), u) and esc not in s.tuples
    if command == "endoprimal":
        return verify_endoprimality_witness(env.algebra(args["algebra"]), int(args["k"]),
                                            witness["table"], bounds)
    if command == "retract":
        F, _ = free_algebra(env.algebra(args["algebra"]), int(args["k"]), bounds)
        D = env.algebra(args["retract"])
        q, p = witness["q"], witness["p"]
        return is_hom(D, F, q) and is_hom(F, D, p) and all(p[q[d]] == d for d in range(D.size))
    raise ValueError(f"{command} reports carry no checkable witness")


def _verify_duality_witness(A, ego, witness, bounds):
    if witness["kind"] == "notInjective":
        a, b = witness["map"]
        return a != b and all(h[a] == h[b] for h in hom_enumerate(A, ego.over, bounds=bounds))
    D = dual_of_algebra(A, ego, bounds)
    u = witness["map"]
    evals = {tuple(int(v) for v in D.points[:, x]) for x in range(A.size)}
    return is_morphism(D, ego.structure(), u) and tuple(u) not in evals


def to_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2)
