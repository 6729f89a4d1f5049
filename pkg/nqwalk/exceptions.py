class NQWError(Exception):
    """Base class for errors raised by nqwalk."""


class ConfigError(NQWError, ValueError):
    """Invalid, incomplete or unknown experiment configuration."""


class BoundaryViolation(NQWError):
    """Charge reached the edge of the finite lattice.

    The attached ``report`` is the :class:`nqwalk.lattice.GuardReport`
    describing the step and the edge charge fraction.
    """

    def __init__(self, report, message=None):
        self.report = report
        super().__init__(message or report.message)

    def __reduce__(self):
        return type(self), (self.report, str(self))


class NumericFailure(NQWError, ArithmeticError):
    """Amplitudes or derived quantities became NaN or infinite."""
