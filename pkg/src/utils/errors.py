"""
Exceptions raised by the numerical modules.
"""


class LongMemoryError(Exception):
    """Base class for every error raised by this package."""
    pass


class DomainError(LongMemoryError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""
    pass


class BranchCutError(DomainError):
    """Raised when a point lies on a branch cut of a sectionally holomorphic function."""
    pass


class NonConvergenceError(LongMemoryError):
    """Raised when a root finder or an expansion does not converge."""
    pass


class BreakdownError(LongMemoryError):
    """Raised when the Levinson recursion produces a non-positive innovation variance."""
    pass


class SingularMatrixError(LongMemoryError):
    """Raised when a dense linear solve meets a singular matrix."""
    pass


class BracketError(LongMemoryError):
    """Raised when a root cannot be bracketed uniquely."""
    pass


class ContractionError(LongMemoryError):
    """Raised when a fixed-point iteration fails to contract."""
    pass


class ToleranceError(LongMemoryError):
    """Raised when a computed quantity misses its closed-form value."""
    pass


class PoleProximityError(LongMemoryError):
    """Raised when an evaluation point sits on a pole of a discretized kernel."""
    pass


class IllConditionedError(LongMemoryError):
    """Raised when a linear system is too ill-conditioned to be trusted."""

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


class CoincidentNodeError(LongMemoryError):
    """Raised when interpolation nodes coincide."""
    pass


class UnitCircleZeroError(LongMemoryError):
    """Raised when an MA zero on the unit circle reaches a routine that excludes it."""
    pass


class InsufficientLagError(LongMemoryError):
    """Raised when a covariance table does not cover the requested lags."""
    pass


class TruncationBudgetError(LongMemoryError):
    """Raised when a truncated series cannot meet its tolerance within the term budget."""
    pass


class QuadratureError(LongMemoryError):
    """Raised when an adaptive quadrature reports failure."""
    pass
