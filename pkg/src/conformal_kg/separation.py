"""Hyperbolic separation of the (r, x5) equation.

With r = rho cosh(xi), x5 = rho sinh(xi) and f = U(rho) V(xi) (static mode,
n = 0) the separated operator splits into

    rho^2 U'' - p(p+1) U = 0
    V'' + (2 tanh xi - 3 coth xi) V' + [l(l+1)/cosh^2 xi - Lambda/sinh^2 xi - p(p+1)] V = 0

and V = sinh(xi)^(1/2) tanh(xi) F turns the second into the Schrodinger
form -F'' + [mu(mu-1)/sinh^2 - l(l+1)/cosh^2 + (p + 1/2)^2] F = 0 with
mu(mu - 1) = Lambda + 15/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._fd import first_derivative, second_derivative
from .errors import DomainError, WedgeViolationError
from .grid import Axis, GridField
from .params import ModelParams, mu_from_params

__all__ = [
    "HyperbolicPoint",
    "RadialSolutionParams",
    "force_from_potential",
    "gravitational_force",
    "lambda_from_mu",
    "mu_from_params",
    "radial_ode_residual",
    "radial_solution",
    "residual_sweep",
    "substitution_factor",
    "to_hyperbolic",
    "v_from_f",
    "xi_ode_residual",
]

Sampler = Callable[[float], float]

DEFAULT_ODE_STEP = 1e-3


@dataclass(frozen=True)
class HyperbolicPoint:
    rho: float
    xi: float

    def __post_init__(self):
        if not self.rho > 0:
            raise DomainError("rho must be positive")
        if not self.xi >= 0:
            raise DomainError("xi must be non-negative")

    def to_cartesian(self) -> tuple[float, float]:
        """(r, x5) = (rho cosh xi, rho sinh xi)."""
        return self.rho * math.cosh(self.xi), self.rho * math.sinh(self.xi)


@dataclass(frozen=True)
class RadialSolutionParams:
    p: float
    c1: float
    c2: float


def to_hyperbolic(r: float, x5: float) -> HyperbolicPoint:
    """(rho, xi) with rho = sqrt(r^2 - x5^2), xi = artanh(x5 / r).

    Raises:
        WedgeViolationError: unless r > x5 >= 0.
    """
    if not (r > x5 >= 0):
        raise WedgeViolationError(f"need r > x5 >= 0, got r={r}, x5={x5}")
    rho = math.sqrt((r - x5) * (r + x5))
    return HyperbolicPoint(rho, math.atanh(x5 / r))


def radial_solution(rho: float, params: RadialSolutionParams) -> float:
    """U(rho) = C1 rho^-p + C2 rho^(p+1)."""
    if not rho > 0:
        raise DomainError("rho must be positive")
    p = params.p
    return params.c1 * rho ** (-p) + params.c2 * rho ** (p + 1.0)


def radial_ode_residual(U: Sampler, rho: float, p: float, h: float = DEFAULT_ODE_STEP, order: int = 4) -> float:
    """rho^2 U'' - p(p+1) U with a central-difference U''."""
    if rho < 3 * h:
        raise DomainError("rho must be at least 3h")
    return rho * rho * second_derivative(U, rho, h, order) - p * (p + 1.0) * U(rho)


def gravitational_force(x_sq: float, x5_sq: float, gM: float, c2: float) -> float:
    """-gM / (x^2 - x5^2) + 2 C2 (x^2 - x5^2)^(1/2), the rho-derivative of the p = 1 potential.

    Raises:
        DomainError: on or inside the light cone x^2 <= x5^2.
    """
    gap = x_sq - x5_sq
    if not gap > 0:
        raise DomainError(f"force is singular for x^2 <= x5^2 (x^2 - x5^2 = {gap:.3g})")
    return -gM / gap + 2.0 * c2 * math.sqrt(gap)


def force_from_potential(x_sq: float, x5_sq: float, gM: float, c2: float, h: float = 1e-3) -> float:
    """Central-difference dU/drho of the p = 1 potential at rho = (x^2 - x5^2)^(1/2)."""
    rho = math.sqrt(x_sq - x5_sq)
    params = RadialSolutionParams(1.0, gM, c2)
    return first_derivative(lambda t: radial_solution(t, params), rho, min(h, rho / 4))


def xi_ode_residual(
    V: Sampler, xi: float, ell: int, p: float, params: ModelParams | float,
    h: float = DEFAULT_ODE_STEP, order: int = 4,
) -> float:
    """Left-hand side of the xi equation, derivatives by central differences.

    ``params`` may be a :class:`ModelParams` or a bare Lambda value.
    """
    if xi < 3 * h:
        raise DomainError("xi must be at least 3h")
    lam = params.Lambda if isinstance(params, ModelParams) else float(params)
    sh, ch = math.sinh(xi), math.cosh(xi)
    d2 = second_derivative(V, xi, h, order)
    d1 = first_derivative(V, xi, h, order)
    coeff = ell * (ell + 1) / (ch * ch) - lam / (sh * sh) - p * (p + 1.0)
    return d2 + (2.0 * sh / ch - 3.0 * ch / sh) * d1 + coeff * V(xi)


def substitution_factor(xi: float) -> float:
    """sinh(xi)^(1/2) tanh(xi)."""
    return math.sqrt(math.sinh(xi)) * math.tanh(xi)


def v_from_f(F: Sampler, xi: float) -> float:
    """V(xi) = sinh(xi)^(1/2) tanh(xi) F(xi)."""
    if not xi > 0:
        raise DomainError("xi must be positive")
    return substitution_factor(xi) * F(xi)


def lambda_from_mu(mu: float) -> float:
    """Lambda = mu(mu - 1) - 15/4."""
    return mu * (mu - 1.0) - 3.75


def residual_sweep(residual: Callable[[float], float], name: str, lo: float, hi: float, step: float) -> GridField:
    """Evaluate a pointwise residual along a uniform 1D axis (CSV/JSON exportable)."""
    axis = Axis.span(name, lo, hi, step)
    return GridField([axis], np.array([residual(float(t)) for t in axis.coords]))


def max_abs_on(residual: Callable[[float], float], points: Sequence[float]) -> float:
    return max(abs(residual(float(t))) for t in points)
