"""Exception types raised across the package."""

from __future__ import annotations


class ConformalKGError(Exception):
    """Base class for all numerical errors raised by this package."""


class DomainError(ConformalKGError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ConvergenceError(ConformalKGError, ArithmeticError):
    """A series or iteration failed to reach its tolerance.

    Attributes:
        partial: Best value available when the iteration stopped.
        terms: Number of terms (or iterations) consumed.
    """

    def __init__(self, message: str, partial: float, terms: int):
        super().__init__(f"{message} (partial={partial!r}, terms={terms})")
        self.partial = partial
        self.terms = terms


class ChartSingularityError(DomainError):
    """Point lies on the singular locus of the projective/conformal chart."""


class ComplexRootError(DomainError):
    """The mu quadratic has a negative discriminant."""


class ImaginaryOrderError(DomainError):
    """The Bessel order sqrt(4 + Lambda) would be imaginary."""


class WedgeViolationError(DomainError):
    """(r, x5) lies outside the wedge r > x5 >= 0 covered by hyperbolic coordinates."""


class GridShapeError(ConformalKGError, ValueError):
    """A grid is too small, inconsistent, or has no interior points."""


class SingularAxisError(GridShapeError):
    """A grid axis touches (or comes within 3 steps of) a coordinate singularity."""


class CrossValidationError(ConformalKGError, RuntimeError):
    """Two independent solvers disagree by more than the allowed margin."""
