"""Exception hierarchy shared by all modules."""


class SpectralError(Exception):
    """Base class for every error raised by :mod:`fspec`."""


class InvalidArgument(SpectralError, ValueError):
    """An argument is malformed or outside its admissible range."""


class DomainError(SpectralError, ValueError):
    """The spectral parameter lies where the requested quantity is undefined."""


class AccuracyFailure(SpectralError, ArithmeticError):
    """A numerical procedure could not reach the requested accuracy.

    The last available estimate is kept on ``estimate`` so callers can still
    report it.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class NumericsBroken(SpectralError, RuntimeError):
    """A situation the theory rules out was reached; numerics are broken."""
