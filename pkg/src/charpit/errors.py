"""Exception hierarchy shared by every charpit module."""


class CharpitError(Exception):
    """Base class for all library errors."""


class ParseError(CharpitError):
    """Malformed expression source; ``offset`` is the byte position of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalError(CharpitError):
    """Expression could not be evaluated (domain violation, non-invertible divisor)."""


class DegenerateError(CharpitError):
    """Both psi_p and psi_q are below the invertibility threshold."""


class OffSurfaceError(CharpitError):
    """A surface element expected on the zero set of psi is not on it."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class TransversalityError(CharpitError):
    """Initial curve is tangent to the characteristic direction at ``s``."""

    def __init__(self, message: str, s: float):
        super().__init__(message)
        self.s = s


class NumericError(CharpitError):
    """Newton divergence, continuation failure or non-finite state."""


class IntegrationError(CharpitError):
    """Strip integration stopped early; ``partial`` holds the samples computed so far."""

    def __init__(self, message: str, partial=None, t_last: float = 0.0, degenerate: bool = False):
        super().__init__(message)
        self.partial = partial
        self.t_last = t_last
        self.degenerate = degenerate
