"""Exception types shared across the package."""


class WeilmcError(Exception):
    """Base class for all errors raised by this package."""


class InputError(WeilmcError):
    """Malformed user input: bad file schema, unknown name, bad arguments."""


class HodgeHypothesisViolation(WeilmcError):
    """The supplied bilinear form does not satisfy the Hodge hypotheses.

    Carries the name of the failing check and the exterior-degree slice.
    """

    def __init__(self, check, degree, detail=""):
        self.check = check
        self.degree = degree
        self.detail = detail
        msg = f"Hodge hypothesis '{check}' fails on exterior degree {degree}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class CertificateError(WeilmcError):
    """An identity the theory guarantees failed exactly; signals a bug."""


class CutoffExceeded(WeilmcError):
    """A truncated operator was asked to act outside its trusted range."""


class ParityError(WeilmcError):
    """An element does not have the parity an operation requires."""
