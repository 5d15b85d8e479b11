"""Built-in algebras and alter egos, plus the manifest of expected verdicts."""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .algebra import FiniteAlgebra, Relation, product
from .errors import SelfValidationFailed
from .endo import double_stone_core, endo_ego  # noqa: F401  (re-exported)
from .structures import AlterEgo, PartialOperation, is_algebraic_over

# basis of an entry's tables
PUBLISHED = "published"     # values printed in the literature
COMPUTED = "computed"       # forced by stated equations, checked by enumeration
EXTERNAL = "external"       # standard definition not printed with the examples
DERIVED = "derived"         # extrapolated by a stated rule; treat with care


@dataclass
class CatalogEntry:
    id: str
    kind: str          # "algebra" or "ego"
    obj: object
    basis: str
    note: str = ""


# --------------------------------------------------------------------------
# building blocks

CHAIN_LABELS = {2: ["0", "1"], 3: ["0", "d", "1"], 4: ["0", "a", "b", "1"], 5: ["0", "a", "b", "c", "1"]}


def _lattice_ops(n, bounded):
    x = np.arange(n)
    ops = {"join": np.maximum.outer(x, x), "meet": np.minimum.outer(x, x)}
    if bounded:
        ops["bot"] = np.array(0)
        ops["top"] = np.array(n - 1)
    return ops


def chain_dl(n, bounded=True, labels=None):
    name = f"dl-{n}" if bounded else f"lat-{n}"
    return FiniteAlgebra(name, n, _lattice_ops(n, bounded), labels or CHAIN_LABELS.get(n))


def double_stone_chain(n, labels=None):
    """Chain 0 < .. < 1 with x* = 0 for x > 0 and x+ = 1 for x < 1."""
    ops = _lattice_ops(n, True)
    ops["star"] = np.array([n - 1] + [0] * (n - 1))
    ops["plus"] = np.array([n - 1] * (n - 1) + [0])
    return FiniteAlgebra(f"ds-{n}", n, ops, labels or ["0"] + list("abc")[:n - 2] + ["1"])


def stone_3():
    ops = _lattice_ops(3, True)
    ops["star"] = np.array([2, 0, 0])
    return FiniteAlgebra("stone-3", 3, ops, ["0", "a", "1"])


def median_2():
    m = np.zeros((2, 2, 2), dtype=np.int64)
    for x in range(2):
        for y in range(2):
            for z in range(2):
                m[x, y, z] = 1 if x + y + z >= 2 else 0
    return FiniteAlgebra("median-2", 2, {"m": m})


def cyclic_group(m):
    x = np.arange(m)
    return FiniteAlgebra(f"z-{m}", m, {"add": np.add.outer(x, x) % m, "neg": (-x) % m,
                                       "zero": np.array(0)})


def semilattice_2(bounds=""):
    x = np.arange(2)
    ops = {"join": np.maximum.outer(x, x)}
    if "0" in bounds:
        ops["bot"] = np.array(0)
    if "1" in bounds:
        ops["top"] = np.array(1)
    return FiniteAlgebra("slat-2" + (f"-{bounds}" if bounds else ""), 2, ops)


def discriminator_4():
    ops = _lattice_ops(4, True)
    t = np.zeros((4, 4, 4), dtype=np.int64)
    for x in range(4):
        for y in range(4):
            for z in range(4):
                t[x, y, z] = z if x == y else x
    ops["t"] = t
    return FiniteAlgebra("disc-4", 4, ops, ["0", "a", "b", "1"])


def kleene_4():
    ops = _lattice_ops(4, True)
    ops["neg"] = np.array([3, 2, 1, 0])
    return FiniteAlgebra("kleene-4", 4, ops, ["0", "a", "b", "1"])


def renamed(A, name):
    return FiniteAlgebra(name, A.size, A.ops, A.labels)


def three_T(variant=""):
    M = chain_dl(3)
    G = {"f": np.array([0, 0, 2]), "g": np.array([0, 2, 2])}
    H = {}
    if variant == "sigma":
        H["sigma"] = PartialOperation(2, {(0, 0): 0, (0, 2): 1, (2, 2): 2})
    elif variant == "h":
        H["h"] = PartialOperation(2, {(0, 0): 0, (0, 1): 1, (1, 2): 1, (2, 2): 2})
    name = "three-T" + (f"-{variant}" if variant else "")
    return AlterEgo(name, M, G=G, H=H)


# --------------------------------------------------------------------------

@lru_cache(maxsize=1)
def _entries():
    E = []

    def alg(A, basis=PUBLISHED, note=""):
        E.append(CatalogEntry(A.name, "algebra", A, basis, note))
        return A

    def ego(X, basis=PUBLISHED, note=""):
        E.append(CatalogEntry(X.name, "ego", X, basis, note))
        return X

    for n in (2, 3, 4):
        alg(chain_dl(n), COMPUTED, f"{n}-element chain as bounded distributive lattice")
        alg(chain_dl(n, bounded=False), COMPUTED, f"{n}-element chain lattice")
    d2, d3, d4 = chain_dl(2), chain_dl(3), chain_dl(4)
    alg(renamed(product(d2, d2), "dl-2x2"), COMPUTED)
    alg(renamed(product(d2, d3), "dl-2x3"), COMPUTED)
    alg(renamed(product(product(d2, d2), d2), "dl-2x2x2"), COMPUTED)
    alg(renamed(product(d2, d4), "dl-2x4"), COMPUTED)
    ego(three_T(), PUBLISHED, "f, g are the non-identity endomorphisms of the 3-chain")
    ego(three_T("sigma"), PUBLISHED, "adds the partial operation sigma")
    ego(three_T("h"), PUBLISHED, "adds the partial operation h; values decoded from a diagram rather than a printed table")
    ego(AlterEgo("priestley-2", d2, R={"le": Relation.of([(0, 0), (0, 1), (1, 1)])}), COMPUTED,
        "order relation only: the constants are nullary operations of the algebra")
    ego(AlterEgo("priestley-3", d3, R={"le": Relation.of([(a, b) for a in range(3) for b in range(a, 3)])}),
        COMPUTED)
    ego(AlterEgo("priestley-lat-2", chain_dl(2, False),
                 R={"le": Relation.of([(0, 0), (0, 1), (1, 1)]), "c0": Relation.of([(0,)]),
                    "c1": Relation.of([(1,)])}), COMPUTED)

    s3 = alg(stone_3(), PUBLISHED)
    ego(AlterEgo("stone-3-T", s3, G={"d": np.array([0, 2, 2])},
                 R={"prec": Relation.of([(0, 0), (1, 1), (2, 2), (2, 1)])}), PUBLISHED)

    for n in (2, 3, 4):
        alg(double_stone_chain(n), PUBLISHED, "star/plus by the chain rule")
    alg(double_stone_chain(5), DERIVED, "5-chain tables extrapolated from the chain rule")
    ds2, ds3, ds4 = double_stone_chain(2), double_stone_chain(3), double_stone_chain(4)
    alg(renamed(product(ds2, ds2), "ds-2x2"), COMPUTED, "Boolean square")
    alg(renamed(product(ds3, ds2), "ds-3x2"), COMPUTED, "J x 2 with J the 3-chain")
    alg(renamed(product(ds4, ds2), "ds-4x2"), COMPUTED, "J x 2 with J the 4-chain")

    md = alg(median_2(), COMPUTED, "the unique ternary table satisfying the median equations")
    ego(AlterEgo("median-2-T", md, G={"inv": np.array([1, 0]), "bot": np.array(0), "top": np.array(1)},
                 R={"le": Relation.of([(0, 0), (0, 1), (1, 1)])}), PUBLISHED)

    for m in range(2, 7):
        Z = alg(cyclic_group(m), PUBLISHED)
        x = np.arange(m)
        ego(AlterEgo(f"z-{m}-T", Z, G={"add": np.add.outer(x, x) % m, "neg": (-x) % m,
                                       "zero": np.array(0)}), PUBLISHED)

    j = np.maximum.outer(np.arange(2), np.arange(2))
    for bounds, G, tag in (("", {"join": j, "bot": np.array(0), "top": np.array(1)}, "i"),
                           ("0", {"join": j, "bot": np.array(0)}, "ii"),
                           ("1", {"join": j, "top": np.array(1)}, "iii"),
                           ("01", {"join": j}, "iv")):
        S = alg(semilattice_2(bounds), PUBLISHED)
        ego(AlterEgo(f"slat-T-{tag}", S, G=G), PUBLISHED)

    R4 = alg(discriminator_4(), PUBLISHED, "t is the ternary discriminator")
    ego(AlterEgo("disc-4-bot", R4, H={"u": PartialOperation(1, {(0,): 0, (1,): 2, (3,): 3})}),
        PUBLISHED, "u(a) = b, with u(0) = 0 and u(1) = 1 forced by the constants")

    alg(kleene_4(), EXTERNAL, "standard Kleene negation on the 4-chain")

    for e in E:
        if e.kind == "ego":
            rep = is_algebraic_over(e.obj)
            if not rep.ok:
                raise SelfValidationFailed(f"{e.id}: not algebraic: {rep.failures()}")
    return tuple(E)


def load_catalog():
    return list(_entries())


def get(entry_id):
    for e in _entries():
        if e.id == entry_id:
            return e.obj
    raise KeyError(entry_id)


# --------------------------------------------------------------------------
# manifest of expected verdicts

@dataclass
class Claim:
    id: str
    line: str          # a check command, runnable by the cli
    expected: str
    basis: str
    note: str = ""


def manifest():
    C = []

    def claim(cid, line, expected, basis=PUBLISHED, note=""):
        C.append(Claim(cid, line, expected, basis, note))

    for e in ("three-T", "three-T-sigma", "three-T-h", "stone-3-T", "median-2-T", "disc-4-bot",
              "slat-T-i", "slat-T-ii", "slat-T-iii", "slat-T-iv", "z-2-T", "z-3-T"):
        claim(f"algebraic/{e}", f"algebraic ego={e}", "yes", COMPUTED)
    for a in ("dl-2", "dl-3", "dl-4", "dl-2x2", "dl-2x3", "dl-2x2x2", "dl-2x4"):
        claim(f"duality/three-T/{a}", f"duality algebra={a} ego=three-T", "iso",
              note="(3; f, g) dualises bounded distributive lattices")
    claim("double-stone/case-A", "endodual algebra=ds-2 over=ds-3", "notSurjective",
          note="End(3) fails on the test algebra 2")
    claim("double-stone/case-B", "endodual algebra=ds-2x2 over=ds-3x2", "notSurjective",
          note="End(3 x 2) fails on the test algebra 2^2")
    claim("double-stone/case-B4", "endodual algebra=ds-2x2 over=ds-4x2", "notSurjective",
          note="End(4 x 2) fails on the test algebra 2^2")
    claim("double-stone/endoprimal-A", "endoprimal algebra=ds-3 k=1", "fails",
          note="the 3-chain double Stone algebra is not 1-endoprimal")
    claim("double-stone/endoprimal-B", "endoprimal algebra=ds-3x2 k=1", "fails")
    claim("double-stone/core-4", "core algebra=ds-4", "a,b", COMPUTED)
    claim("double-stone/core-3", "core algebra=ds-3", "a", COMPUTED)
    claim("double-stone/core-2", "core algebra=ds-2", "none", COMPUTED)
    for e in ("three-T-sigma", "three-T-h"):
        claim(f"fullness/{e}/k2", f"fullness ego={e} k=2", "iso", note="full at the finite level")
    claim("injectivity/three-T-h", "injectivity ego=three-T-h power=3 size=27", "witness", COMPUTED,
          note="full but not strong")
    claim("injectivity/three-T-sigma", "injectivity ego=three-T-sigma power=3 size=27", "none",
          note="strong")
    for e in ("slat-T-i", "slat-T-ii", "slat-T-iii", "slat-T-iv", "z-2-T", "z-3-T"):
        claim(f"injectivity/{e}", f"injectivity ego={e} power=2 size=16", "none")
        claim(f"fullness/{e}/k2", f"fullness ego={e} k=2", "iso")
    claim("endoprimal/dl-3/k1", "endoprimal algebra=dl-3 k=1", "holds")
    claim("endoprimal/lat-2/k3", "endoprimal algebra=lat-2 k=3", "fails",
          note="2 is a Boolean lattice")
    claim("free/lat-2/1", "free-algebra algebra=lat-2 k=1", "1")
    claim("free/lat-2/2", "free-algebra algebra=lat-2 k=2", "4")
    claim("free/lat-2/3", "free-algebra algebra=lat-2 k=3", "18", COMPUTED)
    for m in range(2, 7):
        claim(f"free/z-{m}/2", f"free-algebra algebra=z-{m} k=2", str(m * m))
    claim("retract/lat-3/F3", "retract algebra=lat-2 k=3 retract=lat-3", "present")
    claim("retract/lat-3/F2", "retract algebra=lat-2 k=2 retract=lat-3", "absent")
    claim("discriminator/subalgebras", "duality-subalgebras algebra=disc-4 ego=disc-4-bot power=2", "iso",
          note="the partial u dualises R and R^2 with their subalgebras")
    claim("discriminator/fullness", "fullness ego=disc-4-bot k=2", "iso", note="slow")
    return C


@dataclass
class ManifestResult:
    claim: Claim
    outcome: object

    @property
    def passed(self):
        return self.outcome.passed


def run_manifest(filter=None, bounds=None, jobs=1, skip=()):
    """Run every claim whose id contains ``filter``; errors are collected."""
    from .config import DEFAULT
    from .runner import parse_command, run_command
    out = []
    for c in manifest():
        if filter and filter not in c.id:
            continue
        if any(s in c.id for s in skip):
            continue
        cmd = parse_command(c.line)
        cmd.args["expect"] = c.expected
        out.append(ManifestResult(c, run_command(cmd, bounds=bounds or DEFAULT, jobs=jobs)))
    return out
