"""Exception types raised by the workbench."""


class DualityError(Exception):
    pass


class SizeBoundExceeded(DualityError):
    """A construction or search would exceed a configured size bound."""

    def __init__(self, what, size, bound):
        self.what = what
        self.size = size
        self.bound = bound
        super().__init__(f"{what}: size {size} exceeds bound {bound}")


class NotAlgebraic(DualityError):
    def __init__(self, name, violation=None):
        self.name = name
        self.violation = violation
        msg = f"relation {name!r} is not algebraic"
        if violation:
            msg += f" ({violation})"
        super().__init__(msg)


class EmptyHomset(DualityError):
    pass


class CertificateMismatch(DualityError):
    """A certificate failed its own validation. Always an engine bug."""


class SelfValidationFailed(DualityError):
    pass


class SignatureMismatch(DualityError):
    pass


class ElaborationError(DualityError):
    """Raised by speclang.elaborate; carries the ordered diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))
