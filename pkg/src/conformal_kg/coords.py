"""Projective and conformal coordinates and the chart maps between them.

Projective points carry six homogeneous coordinates ordered
``(x0, x1, x2, x3, x4, x5)``; conformal points carry ``(x1, x2, x3, x4, x5)``.
The forward chart is

    x_i = r0 * xbar_i / (xbar0 + xbar5),   x5 = r0 * R(p) / (xbar0 + xbar5)

where R(p) = sqrt(xbar^2 + xbar0^2 - xbar5^2) is the radius of the quadric
through ``p``.  On the quadric R(p) = r, so this is the usual chart; off the
quadric it is the degree-0 homogeneous extension, which is what the
derivative-link formulas in :mod:`conformal_kg.derivlink` differentiate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ChartSingularityError, DomainError
from .params import ModelParams, mu_from_params

__all__ = [
    "ConformalPoint",
    "ModelParams",
    "ProjectivePoint",
    "chart_condition_residual",
    "mu_from_params",
    "quadric_residual",
    "to_conformal",
    "to_projective",
]

_CHART_EPS = 1e-12


@dataclass(frozen=True)
class ProjectivePoint:
    x0: float
    xi: tuple[float, float, float, float]
    x5: float

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(float(v) for v in self.xi))
        if len(self.xi) != 4:
            raise DomainError("ProjectivePoint needs exactly four xi components")

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "ProjectivePoint":
        if len(values) != 6:
            raise DomainError(f"projective point needs 6 components, got {len(values)}")
        return cls(float(values[0]), tuple(values[1:5]), float(values[5]))

    def to_array(self) -> np.ndarray:
        return np.array([self.x0, *self.xi, self.x5])

    def to_json(self) -> str:
        return json.dumps(self.to_array().tolist())

    @classmethod
    def from_json(cls, text: str) -> "ProjectivePoint":
        return cls.from_array(json.loads(text))

    @property
    def xbar_sq(self) -> float:
        return math.fsum(v * v for v in self.xi)

    def chart_valid(self) -> bool:
        return abs(self.x0 + self.x5) >= _CHART_EPS * max(1.0, float(np.linalg.norm(self.to_array())))

    def scaled(self, lam: float) -> "ProjectivePoint":
        return ProjectivePoint(lam * self.x0, tuple(lam * v for v in self.xi), lam * self.x5)


@dataclass(frozen=True)
class ConformalPoint:
    xi: tuple[float, float, float, float]
    x5: float

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(float(v) for v in self.xi))
        if len(self.xi) != 4:
            raise DomainError("ConformalPoint needs exactly four xi components")

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "ConformalPoint":
        if len(values) != 5:
            raise DomainError(f"conformal point needs 5 components, got {len(values)}")
        return cls(tuple(values[:4]), float(values[4]))

    def to_array(self) -> np.ndarray:
        return np.array([*self.xi, self.x5])

    def to_json(self) -> str:
        return json.dumps(self.to_array().tolist())

    @classmethod
    def from_json(cls, text: str) -> "ConformalPoint":
        return cls.from_array(json.loads(text))

    @property
    def x_sq(self) -> float:
        """Euclidean x^2 = sum of x_i^2 over i = 1..4."""
        return math.fsum(v * v for v in self.xi)


def quadric_residual(p: ProjectivePoint, params: ModelParams = ModelParams()) -> float:
    """xbar^2 + xbar0^2 - xbar5^2 - r^2 (zero on the quadric)."""
    return p.xbar_sq + p.x0 * p.x0 - p.x5 * p.x5 - params.r * params.r


def to_conformal(p: ProjectivePoint, params: ModelParams = ModelParams()) -> ConformalPoint:
    """Map a projective point to conformal coordinates.

    Raises:
        ChartSingularityError: if xbar0 + xbar5 vanishes (relative to the
            point's norm) or the point sits on a quadric of non-positive radius.
    """
    s = p.x0 + p.x5
    if not p.chart_valid():
        raise ChartSingularityError(f"xbar0 + xbar5 = {s:.3g} is on the chart singularity")
    radius_sq = p.xbar_sq + p.x0 * p.x0 - p.x5 * p.x5
    if radius_sq <= 0.0:
        raise ChartSingularityError(f"point lies on a quadric of radius^2 = {radius_sq:.3g} <= 0")
    k = params.r0 / s
    return ConformalPoint(tuple(k * v for v in p.xi), k * math.sqrt(radius_sq))


def to_projective(q: ConformalPoint, params: ModelParams = ModelParams()) -> ProjectivePoint:
    """Inverse chart onto the section lying exactly on the quadric of radius r.

    With r = r0 = 1 this is xbar0 = A+/x5, xbar5 = A-/x5, xbar_i = x_i/x5 where
    2A(+/-) = 1 -/+ x^2 +/- x5^2.

    Raises:
        ChartSingularityError: if ``q.x5 == 0``.
    """
    if q.x5 == 0.0:
        raise ChartSingularityError("x5 = 0 is not covered by the chart")
    r, r0, x5 = params.r, params.r0, q.x5
    x_sq = q.x_sq
    k = r / (2.0 * r0 * x5)
    x0 = k * (r0 * r0 - x_sq + x5 * x5)
    xb5 = k * (r0 * r0 + x_sq - x5 * x5)
    return ProjectivePoint(x0, tuple(r * v / x5 for v in q.xi), xb5)


def chart_condition_residual(
    p: ProjectivePoint, q: ConformalPoint, params: ModelParams = ModelParams()
) -> float:
    """x5^2 - x^2 - r0^2 (xbar0 - xbar5) / (xbar0 + xbar5) for a chart pair (p, q)."""
    lhs = q.x5 * q.x5 - q.x_sq
    return lhs - params.r0 ** 2 * (p.x0 - p.x5) / (p.x0 + p.x5)


def random_quadric_points(
    rng: np.random.Generator, count: int, params: ModelParams = ModelParams(), spread: float = 2.0
) -> list[ProjectivePoint]:
    """Random chart-valid points exactly on the quadric of radius ``params.r``.

    Samples xbar_i and xbar5 uniformly in [-spread, spread] and solves the
    quadric for xbar0 (random sign), rejecting near-singular draws.
    """
    out: list[ProjectivePoint] = []
    while len(out) < count:
        xi = rng.uniform(-spread, spread, 4)
        x5 = rng.uniform(-spread, spread)
        x0_sq = params.r ** 2 + x5 * x5 - float(xi @ xi)
        if x0_sq <= 0:
            continue
        x0 = math.sqrt(x0_sq) * (1.0 if rng.random() < 0.5 else -1.0)
        p = ProjectivePoint(x0, tuple(xi), x5)
        if abs(x0 + x5) < 1e-3:
            continue
        out.append(p)
    return out
