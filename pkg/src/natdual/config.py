from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Bounds:
    """Size limits shared by constructions and searches.

    ``max_carrier`` caps constructed algebras and the target side of every
    map search (domains are 64-bit masks in the kernel, so it can never be
    raised above 64). ``max_search`` caps the number of enumerated
    solutions per search; ``max_tables`` caps term-clone closures.
    ``max_power_points`` caps |M|^k for powers of alter egos.
    """

    max_carrier: int = 64
    max_search: int = 100_000
    max_tables: int = 100_000
    max_power_points: int = 64
    max_dual_size: int = 250_000

    def with_(self, **kw):
        return replace(self, **kw)


DEFAULT = Bounds()
