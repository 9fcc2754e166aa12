"""Exception hierarchy for heatlab.

Every failure mode that callers are expected to handle gets its own class;
everything derives from :class:`HeatLabError` so CLI code can catch one type.
"""


class HeatLabError(Exception):
    """Base class for all heatlab errors."""


# ---------------------------------------------------------------------------
# Manifold specification validation


class SpecValidationError(HeatLabError):
    """A manifold description violates one of its invariants."""


class EmptyInterval(SpecValidationError):
    """Interval endpoints with a >= b."""


class NonPositiveDefiniteGram(SpecValidationError):
    """Gram matrix is not symmetric positive definite."""


class FiberHasBoundary(SpecValidationError):
    """A warped-product fiber must be a closed manifold."""


class SpectrumMissingZero(SpecValidationError):
    """A closed manifold's spectrum must contain the eigenvalue 0."""


class TooManyBoundaryFactors(SpecValidationError):
    """A product may contain at most one factor with boundary."""


# ---------------------------------------------------------------------------
# Spectral computations


class CutoffTooLarge(HeatLabError):
    """Lattice enumeration would exceed the configured point budget."""


class ConvergenceFailure(HeatLabError):
    """Eigenvalue iteration failed to bracket or converge.

    Carries the 1-based index of the offending eigenvalue when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class FiberSpectrumTooShort(HeatLabError):
    """The fiber's stored spectrum cannot certify completeness."""


class FactorCutoffInsufficient(HeatLabError):
    """Product factors were not resolved far enough for the requested cutoff."""


class EigensolverStagnation(HeatLabError):
    """Sparse eigensolver failed to converge."""


# ---------------------------------------------------------------------------
# Heat functions


class TailDominates(HeatLabError):
    """Certified series tail is too large relative to the partial sum."""


class MissingEigenfunctions(HeatLabError):
    """Mass coefficients require eigenfunctions (closed form or samples)."""


class StepSizeUnstable(HeatLabError):
    """Time stepping produced non-finite values."""


# ---------------------------------------------------------------------------
# Tensor engine


class SingularMetric(HeatLabError):
    """Metric condition number exceeds the trust threshold."""


class NotOnBoundary(HeatLabError):
    """Boundary quantities requested at a point not on a declared face."""


class DerivativeUnstable(HeatLabError):
    """Finite-difference derivative estimates disagree beyond tolerance."""


# ---------------------------------------------------------------------------
# Asymptotics


class IllConditioned(HeatLabError):
    """Least-squares basis condition number exceeds the trust threshold."""


class AcceptanceFailed(HeatLabError):
    """A declared tolerance or residual threshold was violated."""


class UnsupportedGeometry(HeatLabError):
    """Geometric coefficient evaluation does not cover this manifold class."""


# ---------------------------------------------------------------------------
# CLI


class UsageError(HeatLabError):
    """Malformed command line or config input (exit code 2)."""


class ComputationError(HeatLabError):
    """A computation failed after valid input (exit code 1)."""
