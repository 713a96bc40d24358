"""Exception hierarchy for qmimo.

Input-validation errors also derive from ``ValueError`` so callers can catch either.
"""


class QmimoError(Exception):
    """Base class for all qmimo errors."""


class InvalidInputError(QmimoError, ValueError):
    """An argument violates the documented preconditions (shape, finiteness, length)."""


class UnsupportedFamilyError(QmimoError, ValueError):
    """The requested operation does not support this function family or degree."""


class UnsupportedDimensionError(QmimoError, ValueError):
    """The requested operation does not support this dimension."""


class BoundaryAmbiguityError(QmimoError, ValueError):
    """A point lies on (or numerically on) a partition boundary."""


class ScenarioViolationError(QmimoError, ValueError):
    """A front-end or channel does not belong to the declared analog-function family."""


class DegenerateArrangementError(QmimoError, ValueError):
    """A hyperplane arrangement is not in general position; re-draw with a perturbation or new seed."""


class ConstructionFailureError(QmimoError):
    """A randomized construction did not succeed within its retry budget; re-seed."""


class SingularFeatureMatrixError(ConstructionFailureError):
    """The monomial feature matrix of the sampled points is singular; re-seed."""


class InsufficientADCsError(QmimoError, ValueError):
    """Too few one-bit ADCs to index the requested number of messages."""


class InfeasiblePowerError(QmimoError, ValueError):
    """No candidate input point satisfies the average power constraint."""


class InvalidCodeError(QmimoError, ValueError):
    """A region code is empty, inconsistent with its channel, or not separable."""


class ConvergenceError(QmimoError):
    """An iterative algorithm broke one of its monotonicity guarantees."""


class ConfigError(QmimoError, ValueError):
    """An experiment configuration is missing, malformed or refers to missing files."""
