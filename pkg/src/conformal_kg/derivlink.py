"""Links between projective derivatives (six) and conformal derivatives (five).

The conformal field is the projective field restricted to the canonical
on-quadric section, phi(x, x5) = phibar(to_projective(x, x5)), and phibar is
extended off the section by homogeneity of degree N.  With r = r0 = 1 the
chain rule then gives

    dbar0 phibar = N A+/x5 phi + B- d5 phi - x5 x.grad phi
    dbar5 phibar = -N A-/x5 phi - B+ d5 phi - x5 x.grad phi
    dbar_i phibar = N x_i/x5 phi + x_i d5 phi + x5 d_i phi

with 2A(+/-) = 1 -/+ x^2 +/- x5^2 and 2B(+/-) = 1 +/- x^2 +/- x5^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .coords import ConformalPoint, ProjectivePoint, to_conformal, to_projective
from .errors import ChartSingularityError, DomainError
from .params import ModelParams

ProjectiveField = Callable[[np.ndarray], float]

DEFAULT_FD_STEP = 1e-5


@dataclass(frozen=True)
class LinkCoefficients:
    a_plus: float
    a_minus: float
    b_plus: float
    b_minus: float


@dataclass(frozen=True)
class ConformalJet:
    """Value and first derivatives of a conformal scalar field at one point."""

    phi: float
    d_i: tuple[float, float, float, float]
    d_5: float

    def __post_init__(self):
        object.__setattr__(self, "d_i", tuple(float(v) for v in self.d_i))
        vals = (self.phi, *self.d_i, self.d_5)
        if len(self.d_i) != 4 or not all(math.isfinite(v) for v in vals):
            raise DomainError("jet needs finite phi, four d_i and d_5")

    def __add__(self, other: "ConformalJet") -> "ConformalJet":
        return ConformalJet(
            self.phi + other.phi,
            tuple(a + b for a, b in zip(self.d_i, other.d_i)),
            self.d_5 + other.d_5,
        )

    def __mul__(self, k: float) -> "ConformalJet":
        return ConformalJet(k * self.phi, tuple(k * v for v in self.d_i), k * self.d_5)

    __rmul__ = __mul__


@dataclass(frozen=True)
class ProjectiveGradient:
    d0: float
    d5: float
    d_i: tuple[float, float, float, float]

    def to_array(self) -> np.ndarray:
        """Components in projective order (d0, d1, d2, d3, d4, d5)."""
        return np.array([self.d0, *self.d_i, self.d5])

    @classmethod
    def from_array(cls, g: Sequence[float]) -> "ProjectiveGradient":
        return cls(float(g[0]), float(g[5]), tuple(float(v) for v in g[1:5]))


def link_coefficients(q: ConformalPoint) -> LinkCoefficients:
    x_sq = q.x_sq
    x5_sq = q.x5 * q.x5
    return LinkCoefficients(
        a_plus=0.5 * (1.0 - x_sq + x5_sq),
        a_minus=0.5 * (1.0 + x_sq - x5_sq),
        b_plus=0.5 * (1.0 + x_sq + x5_sq),
        b_minus=0.5 * (1.0 - x_sq - x5_sq),
    )


def _require_unit_constants(params: ModelParams) -> None:
    if params.r != 1.0 or params.r0 != 1.0:
        raise DomainError("derivative links are stated for r = r0 = 1")


def project_gradient(jet: ConformalJet, q: ConformalPoint, params: ModelParams) -> ProjectiveGradient:
    """Projective gradient of the degree-``params.N`` extension of a conformal field.

    Raises:
        ChartSingularityError: if ``q.x5 == 0``.
    """
    _require_unit_constants(params)
    x5 = q.x5
    if x5 == 0.0:
        raise ChartSingularityError("x5 = 0 is not covered by the chart")
    N = params.N
    c = link_coefficients(q)
    phi, d5 = jet.phi, jet.d_5
    x_dot_grad = math.fsum(x * d for x, d in zip(q.xi, jet.d_i))
    d0 = N * c.a_plus / x5 * phi + c.b_minus * d5 - x5 * x_dot_grad
    dbar5 = -N * c.a_minus / x5 * phi - c.b_plus * d5 - x5 * x_dot_grad
    d_i = tuple(N * x / x5 * phi + x * d5 + x5 * d for x, d in zip(q.xi, jet.d_i))
    return ProjectiveGradient(d0, dbar5, d_i)


def special_projective_gradient(
    phi: float, d_i: Sequence[float], x: Sequence[float], N: float
) -> tuple[tuple[float, ...], float]:
    """Links on the xbar5 = 0 section with d5 phi = 0 (special projective limit).

    Returns ``(dbar_i, dbar_0)`` with dbar_i = A d_i phi + (N/A) x_i phi and
    dbar_0 = -A x.grad phi + (N/A) phi, where A = sqrt(1 + x^2).
    """
    x = [float(v) for v in x]
    if len(x) != 4 or len(d_i) != 4:
        raise DomainError("need four coordinates and four derivatives")
    a = math.sqrt(1.0 + math.fsum(v * v for v in x))
    dbar_i = tuple(a * d + N / a * xi * phi for xi, d in zip(x, d_i))
    dbar_0 = -a * math.fsum(xi * d for xi, d in zip(x, d_i)) + N / a * phi
    return dbar_i, dbar_0


def fd_projective_gradient(field: ProjectiveField, p: ProjectivePoint | np.ndarray, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central-difference gradient of a six-variable field, projective order."""
    base = p.to_array() if isinstance(p, ProjectivePoint) else np.asarray(p, dtype=float)
    grad = np.empty(6)
    for a in range(6):
        step = np.zeros(6)
        step[a] = h
        grad[a] = (field(base + step) - field(base - step)) / (2.0 * h)
    return grad


def euler_residual(field: ProjectiveField, p: ProjectivePoint | np.ndarray, N: float, h: float = DEFAULT_FD_STEP) -> float:
    """(xbar . gradbar) phibar - N phibar with a central-difference gradient.

    Near zero exactly when ``field`` is homogeneous of degree ``N`` near ``p``.
    """
    if h <= 0:
        raise DomainError("h must be positive")
    base = p.to_array() if isinstance(p, ProjectivePoint) else np.asarray(p, dtype=float)
    grad = fd_projective_gradient(field, base, h)
    return math.fsum(base * grad) - N * field(base)


class HomogeneousPolynomial:
    """Polynomial in the six projective coordinates with exact gradient.

    ``terms`` maps exponent 6-tuples (projective order x0..x5) to coefficients;
    every term must have the same total degree.
    """

    def __init__(self, terms: Mapping[Sequence[int], float]):
        self.exponents = np.array([tuple(e) for e in terms], dtype=int)
        self.coefs = np.array(list(terms.values()), dtype=float)
        if self.exponents.ndim != 2 or self.exponents.shape[1] != 6:
            raise DomainError("exponents must be 6-tuples")
        degrees = self.exponents.sum(axis=1)
        if len(set(degrees.tolist())) != 1:
            raise DomainError("all terms must share one total degree")
        self.degree = int(degrees[0])

    def __call__(self, xbar: np.ndarray) -> float:
        xbar = np.asarray(xbar, dtype=float)
        return float(self.coefs @ np.prod(xbar ** self.exponents, axis=1))

    def gradient(self, xbar: np.ndarray) -> np.ndarray:
        xbar = np.asarray(xbar, dtype=float)
        grad = np.zeros(6)
        for a in range(6):
            e = self.exponents.copy()
            k = e[:, a].astype(float)
            e[:, a] = np.maximum(e[:, a] - 1, 0)
            grad[a] = float((self.coefs * k) @ np.prod(xbar ** e, axis=1))
        return grad


def standard_fields() -> list[HomogeneousPolynomial]:
    """Three fixed homogeneous test fields of degrees 1, 2, 3."""
    return [
        HomogeneousPolynomial({
            (1, 0, 0, 0, 0, 0): 1.0, (0, 0, 0, 0, 0, 1): 2.0,
            (0, 1, 0, 0, 0, 0): -0.5, (0, 0, 0, 1, 0, 0): 0.3,
        }),
        HomogeneousPolynomial({
            (1, 1, 0, 0, 0, 0): 1.0, (0, 0, 0, 0, 0, 2): -1.0,
            (0, 0, 1, 0, 1, 0): 0.5, (0, 0, 0, 2, 0, 0): 1.0,
        }),
        HomogeneousPolynomial({
            (2, 1, 0, 0, 0, 0): 1.0, (0, 0, 1, 1, 0, 1): -1.0,
            (0, 0, 0, 0, 3, 0): 0.25, (1, 0, 0, 0, 0, 2): 1.0,
        }),
    ]


def section_jacobian(q: ConformalPoint) -> np.ndarray:
    """d(xbar_a)/d(x_k, x5) of the canonical section (r = r0 = 1), shape (6, 5)."""
    x = np.asarray(q.xi, dtype=float)
    x5 = q.x5
    x_sq = float(x @ x)
    jac = np.zeros((6, 5))
    jac[0, :4] = -x / x5
    jac[0, 4] = (x5 * x5 + x_sq - 1.0) / (2.0 * x5 * x5)
    for i in range(4):
        jac[1 + i, i] = 1.0 / x5
        jac[1 + i, 4] = -x[i] / (x5 * x5)
    jac[5, :4] = x / x5
    jac[5, 4] = -(x5 * x5 + x_sq + 1.0) / (2.0 * x5 * x5)
    return jac


def conformal_jet(field: HomogeneousPolynomial, q: ConformalPoint) -> ConformalJet:
    """Exact jet of phi = field o to_projective at ``q`` (forward chain rule)."""
    p = to_projective(q).to_array()
    grad5 = field.gradient(p) @ section_jacobian(q)
    return ConformalJet(field(p), tuple(grad5[:4]), float(grad5[4]))


def homogeneous_extension(phi: Callable[[ConformalPoint], float], N: float) -> ProjectiveField:
    """phibar(xbar) = R(xbar)^N phi(to_conformal(xbar)), R the quadric radius.

    This is the degree-N extension of ``phi`` off the unit quadric; it agrees
    with ``phi`` on the canonical section.
    """

    def phibar(xbar: np.ndarray) -> float:
        p = ProjectivePoint.from_array(xbar)
        radius_sq = p.xbar_sq + p.x0 * p.x0 - p.x5 * p.x5
        return radius_sq ** (0.5 * N) * phi(to_conformal(p))

    return phibar
