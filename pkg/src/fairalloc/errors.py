"""Exception types shared across the package."""


class FairallocError(Exception):
    """Base class for all package-specific errors."""


class IterationLimitError(FairallocError):
    """A pivoting or Newton loop exceeded its configured iteration bound."""


class UnboundedError(FairallocError):
    """The LP objective is unbounded over the feasible region."""


class InfeasibleError(FairallocError):
    """No feasible point exists for the given constraint system."""


class NewtonDivergenceError(FairallocError):
    """The damped Newton iteration failed to reduce its residual."""


class NonInteriorPointError(FairallocError):
    """A point required to be strictly interior touches the boundary."""


class TooLargeError(FairallocError):
    """Problem dimensions exceed the brute-force enumeration caps."""


class UnknownPresetError(FairallocError, KeyError):
    """Requested market preset name is not registered."""


class InvalidTypeError(FairallocError, IndexError):
    """An order-type index is outside the distribution's support."""


class DimensionMismatchError(FairallocError, ValueError):
    """Vector or matrix shapes do not agree."""


class EmptyInputError(FairallocError, ValueError):
    """An aggregation operation received no records."""


class ConfigError(FairallocError, ValueError):
    """An experiment configuration document failed validation."""


class MissingInputError(FairallocError, FileNotFoundError):
    """An expected input file for post-processing does not exist."""
