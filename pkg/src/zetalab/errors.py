"""Exception and warning types shared by the zetalab modules."""


class ZetaLabError(Exception):
    """Base class for every error raised by zetalab."""


class PoleError(ZetaLabError, ZeroDivisionError):
    """Evaluation requested exactly at a pole."""


class DomainError(ZetaLabError, ValueError):
    """A parameter lies outside the domain of the operation."""


class ConvergenceError(ZetaLabError, ValueError):
    """Series evaluated outside its region of absolute convergence."""


class TruncationError(ZetaLabError, ValueError):
    """Coefficient or torus data does not reach the required truncation."""


class PrecisionError(ZetaLabError, ArithmeticError):
    """Working precision too low to discriminate a relation from noise."""


class InadmissibleError(ZetaLabError):
    """The parameter collection fails the rank or independence screening."""


class ConfigError(ZetaLabError, ValueError):
    """Malformed experiment configuration or instance file."""


class GridError(ZetaLabError, ValueError):
    """Compact set does not sit inside its ambient strip."""


class BoundMismatchError(ZetaLabError, ValueError):
    """Torus point bounds incompatible with the requested operation."""


class QuadratureWarning(UserWarning):
    """Simpson panels too coarse for the oscillation of the integrand."""


class TruncationWarning(UserWarning):
    """Estimated tail of a truncated series exceeds the requested tolerance."""
