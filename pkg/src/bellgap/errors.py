"""Exception hierarchy.

Two families matter for the CLI exit-code contract: ``ValidationError``
(malformed or out-of-domain input, exit code 2) and ``NumericalError``
(a computation that could not be carried out, exit code 3).
"""


class BellgapError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(BellgapError):
    """Input rejected before any computation was attempted."""


class ShapeMismatchError(ValidationError):
    """Objects built for different scenarios were combined."""


class DomainError(ValidationError):
    """A scalar parameter lies outside its allowed range."""


class MeasurementError(ValidationError):
    """Projectors fail hermiticity, idempotence, or completeness checks."""


class UnsupportedScenarioError(ValidationError):
    """Operation restricted to two-outcome scenarios."""


class SchemaError(ValidationError):
    """A data file does not match the expected JSON schema."""


class DegenerateDataError(ValidationError):
    """A count table has an empty (x, y) block where data is required."""


class NumericalError(BellgapError):
    """A well-posed computation failed or has no finite answer."""


class CapacityError(NumericalError):
    """Deterministic-strategy enumeration would exceed the configured cap."""


class InfiniteDivergenceError(NumericalError):
    """KL divergence is infinite: the reference vanishes on the support."""


class ConvergenceError(NumericalError):
    """Iterative solver stopped before reaching the requested tolerance.

    Carries the best iterate found so far in ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateObjectiveError(NumericalError):
    """Every optimizer restart landed in the penalized denominator region."""


class NoViolationError(NumericalError):
    """The behavior does not violate the inequality at unit efficiency."""


class InfeasibleEfficiencyError(NumericalError):
    """The efficiency equation has no root in (0, 1]."""
