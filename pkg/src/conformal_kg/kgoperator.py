"""Conformal Klein-Gordon operator, its separated (r, x5) form, and Bessel-product modes.

The full operator acts on fields over (x1, x2, x3, t, x5):

    K u = x5^2 (Lap3 u - u_tt / c^2 - u_55) + 3 x5 u_5 + Lambda u

and after separating exp(i n t) Y_lm(theta, phi) it reduces to

    S f = f_rr + (2/r) f_r - f_55 + (3/x5) f_5 + (Lambda/x5^2) f + (n^2 - l(l+1)/r^2) f

so that K u = x5^2 exp(i n t) Y_lm S f.  Both are applied with second-order
central differences on interior grid points; boundary points come back NaN.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, GridShapeError, ImaginaryOrderError, SingularAxisError
from .grid import Axis, GridField, fd_residual_norm
from .params import ModelParams
from .specfun import bessel_j, spherical_bessel_j

__all__ = [
    "SeparatedModeSpec",
    "apply_conformal_kg",
    "apply_separated_f",
    "bessel_product_grid",
    "bessel_product_solution",
    "default_workers",
    "fd_residual_norm",
    "separated_operator_at",
]

THREADS_ENV = "CONFORMAL_KG_THREADS"


def default_workers() -> int:
    """Worker cap from ``CONFORMAL_KG_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SeparatedModeSpec:
    """One separated mode exp(i n t) Y_lm f(r, x5); ``lam`` is the radial wavenumber."""

    n: float
    ell: int
    m: int
    lam: float
    amplitude: float = 1.0

    def __post_init__(self):
        if int(self.ell) != self.ell or self.ell < 0:
            raise DomainError("ell must be a non-negative integer")
        if int(self.m) != self.m or abs(self.m) > self.ell:
            raise DomainError("need |m| <= ell")
        if not self.n > 0:
            raise DomainError("temporal frequency n must be positive")

    @property
    def sigma(self) -> float:
        """Wavenumber sqrt(lam^2 - n^2) of the x5 Bessel factor."""
        if self.lam * self.lam <= self.n * self.n:
            raise DomainError("Bessel-product modes need lam^2 > n^2")
        return math.sqrt(self.lam * self.lam - self.n * self.n)


def _check_axes(field: GridField, count: int) -> None:
    if len(field.axes) != count:
        raise GridShapeError(f"expected {count} axes, got {len(field.axes)}")
    for ax in field.axes:
        if ax.n < 3:
            raise GridShapeError(f"axis {ax.name!r} needs at least 3 points")


def _check_off_singular(ax: Axis, positive: bool) -> None:
    coords = ax.coords
    if positive and coords[0] <= 0:
        raise SingularAxisError(f"axis {ax.name!r} must be strictly positive")
    if np.min(np.abs(coords)) < 3.0 * ax.step:
        raise SingularAxisError(f"axis {ax.name!r} comes within 3 steps of 0")


def _interior(ndim: int) -> tuple[slice, ...]:
    return (slice(1, -1),) * ndim


def _shift(ndim: int, axis: int, offset: int) -> tuple[slice, ...]:
    sl = [slice(1, -1)] * ndim
    sl[axis] = slice(2, None) if offset > 0 else slice(None, -2)
    return tuple(sl)


def _d2(v: np.ndarray, axis: int, h: float) -> np.ndarray:
    nd = v.ndim
    return (v[_shift(nd, axis, 1)] - 2.0 * v[_interior(nd)] + v[_shift(nd, axis, -1)]) / (h * h)


def _d1(v: np.ndarray, axis: int, h: float) -> np.ndarray:
    nd = v.ndim
    return (v[_shift(nd, axis, 1)] - v[_shift(nd, axis, -1)]) / (2.0 * h)


def _apply_blocked(
    values: np.ndarray, kernel: Callable[[np.ndarray, slice], np.ndarray], workers: int
) -> np.ndarray:
    """Run ``kernel(block, rows)`` over blocks of axis 0 and assemble the interior.

    ``rows`` is the slice of full-grid axis-0 indices the block's interior covers.
    """
    out = np.full(values.shape, np.nan)
    n0 = values.shape[0]
    bounds = np.linspace(1, n0 - 1, min(workers, n0 - 2) + 1).astype(int)
    jobs = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    def run(job):
        a, b = job
        rows = slice(a, b)
        return rows, kernel(values[a - 1:b + 1], rows)

    if len(jobs) == 1:
        results = [run(jobs[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
            results = list(pool.map(run, jobs))
    for rows, block in results:
        out[(rows,) + _interior(values.ndim)[1:]] = block
    return out


def apply_conformal_kg(
    u: GridField, params: ModelParams, c: float = 1.0, workers: int | None = None
) -> GridField:
    """Apply the conformal Klein-Gordon operator to ``u`` over (x1, x2, x3, t, x5).

    Raises:
        GridShapeError: if there are not five axes of at least three points.
        SingularAxisError: if the x5 axis reaches within three steps of 0.
    """
    _check_axes(u, 5)
    x5_axis = u.axes[4]
    _check_off_singular(x5_axis, positive=False)
    hs = [a.step for a in u.axes]
    lam = params.Lambda
    workers = default_workers() if workers is None else max(1, workers)
    x5_all = x5_axis.coords

    def kernel(block: np.ndarray, rows: slice) -> np.ndarray:
        x5 = x5_all[1:-1][None, None, None, None, :]
        lap3 = _d2(block, 0, hs[0]) + _d2(block, 1, hs[1]) + _d2(block, 2, hs[2])
        box = lap3 - _d2(block, 3, hs[3]) / (c * c)
        centre = block[_interior(5)]
        return x5 * x5 * (box - _d2(block, 4, hs[4])) + 3.0 * x5 * _d1(block, 4, hs[4]) + lam * centre

    return GridField(list(u.axes), _apply_blocked(u.values, kernel, workers))


def apply_separated_f(f: GridField, n: float, ell: int, params: ModelParams) -> GridField:
    """Apply the separated (r, x5) operator to ``f`` on interior points.

    Raises:
        GridShapeError: if ``f`` is not a 2D grid with at least three points per axis.
        SingularAxisError: if either axis is not strictly positive with a
            3-step margin from 0.
    """
    _check_axes(f, 2)
    r_axis, x5_axis = f.axes
    _check_off_singular(r_axis, positive=True)
    _check_off_singular(x5_axis, positive=True)
    hr, h5 = r_axis.step, x5_axis.step
    v = f.values
    r = r_axis.coords[1:-1][:, None]
    x5 = x5_axis.coords[1:-1][None, :]
    centre = v[1:-1, 1:-1]
    res = (
        _d2(v, 0, hr) + 2.0 / r * _d1(v, 0, hr)
        - _d2(v, 1, h5) + 3.0 / x5 * _d1(v, 1, h5)
        + (params.Lambda / (x5 * x5) + n * n - ell * (ell + 1) / (r * r)) * centre
    )
    out = np.full(v.shape, np.nan)
    out[1:-1, 1:-1] = res
    return GridField(list(f.axes), out)


def separated_operator_at(
    f: Callable[[float, float], float], r: float, x5: float, n: float, ell: int,
    params: ModelParams, h: float = 1e-3,
) -> float:
    """Separated operator applied pointwise to a callable f(r, x5) (2nd-order FD)."""
    f0 = f(r, x5)
    f_rp, f_rm = f(r + h, x5), f(r - h, x5)
    f_5p, f_5m = f(r, x5 + h), f(r, x5 - h)
    d2r = (f_rp - 2 * f0 + f_rm) / (h * h)
    d1r = (f_rp - f_rm) / (2 * h)
    d25 = (f_5p - 2 * f0 + f_5m) / (h * h)
    d15 = (f_5p - f_5m) / (2 * h)
    return (
        d2r + 2 / r * d1r - d25 + 3 / x5 * d15
        + (params.Lambda / (x5 * x5) + n * n - ell * (ell + 1) / (r * r)) * f0
    )


def _bessel_order(params: ModelParams) -> float:
    if 4.0 + params.Lambda < 0.0:
        raise ImaginaryOrderError(f"4 + Lambda = {4.0 + params.Lambda:.6g} < 0")
    return params.bessel_order


def bessel_product_solution(r: float, x5: float, spec: SeparatedModeSpec, params: ModelParams) -> float:
    """Regular separated solution j_l(lam r) * x5^2 * J_nu(sigma x5).

    nu = sqrt(4 + Lambda) and sigma = sqrt(lam^2 - n^2).

    Raises:
        ImaginaryOrderError: if 4 + Lambda < 0.
        DomainError: if lam^2 <= n^2 or r, x5 are not positive.
    """
    if r <= 0 or x5 <= 0:
        raise DomainError("r and x5 must be positive")
    nu = _bessel_order(params)
    sigma = spec.sigma
    return spec.amplitude * spherical_bessel_j(spec.ell, spec.lam * r) * x5 * x5 * bessel_j(nu, sigma * x5)


def bessel_product_grid(r_axis: Axis, x5_axis: Axis, spec: SeparatedModeSpec, params: ModelParams) -> GridField:
    """Sample :func:`bessel_product_solution` on an (r, x5) grid using separability."""
    if r_axis.min <= 0 or x5_axis.min <= 0:
        raise SingularAxisError("r and x5 axes must be strictly positive")
    nu = _bessel_order(params)
    sigma = spec.sigma
    radial = np.array([spherical_bessel_j(spec.ell, spec.lam * r) for r in r_axis.coords])
    x5 = x5_axis.coords
    axial = x5 * x5 * np.array([bessel_j(nu, sigma * v) for v in x5])
    return GridField([r_axis, x5_axis], spec.amplitude * np.outer(radial, axial))
