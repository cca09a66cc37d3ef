"""Exception hierarchy shared by all fracpar modules."""


class FracparError(Exception):
    """Base class for library errors."""


class InvalidArgumentError(FracparError, ValueError):
    """An argument violates a documented precondition."""


class NumericalFailure(FracparError, ArithmeticError):
    """A numerical kernel could not produce a trustworthy result."""


class NearSingularError(NumericalFailure):
    """A shifted system zM - A is numerically singular.

    Usually means the shift z sits on (or next to) an eigenvalue of the
    pencil, e.g. because the contour scale b is too large.
    """

    def __init__(self, z, detail):
        self.z = z
        super().__init__(f"shifted matrix z M - A is near-singular at z={z!r}: {detail}")


class SizeLimitError(FracparError):
    """Problem too large for a dense code path."""


class InconclusiveSearchError(NumericalFailure):
    """The sup-search probes never entered a decreasing tail."""
