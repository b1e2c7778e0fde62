"""Exception hierarchy shared by the numerical modules."""


class GptCornersError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(GptCornersError, ValueError):
    """A curve violates closure, orientation, winding or corner constraints."""


class SolverError(GptCornersError, ArithmeticError):
    """The boundary integral system could not be solved to tolerance."""


class ConsistencyError(GptCornersError, ValueError):
    """Polarization tensor data is physically inconsistent (e.g. wrong sign of gamma2_11)."""


class OrderError(GptCornersError, ValueError):
    """Not enough coefficients were supplied for the requested order."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required
