"""Exception types shared across the package."""


class EvenIndexError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatchError(EvenIndexError):
    """Operator data does not match the block structure of its algebra."""


class NotSelfAdjointError(EvenIndexError):
    """An operator required to be self-adjoint fails the tolerance check."""


class SpectrumError(EvenIndexError):
    """A scalar function or resolvent parameter collides with the spectrum."""


class CornerMembershipError(EvenIndexError):
    """An operator is not supported in the projection corner it claims."""


class QuadratureError(EvenIndexError):
    """A quadrature did not reach the requested tolerance within its budget."""


class ContinuationError(EvenIndexError):
    """Numerical analytic continuation failed (bad fit or missing data)."""


class ConfigError(EvenIndexError):
    """Invalid harness configuration."""
