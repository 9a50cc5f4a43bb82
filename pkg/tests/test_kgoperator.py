import math

import mpmath
import numpy as np
import pytest

from conformal_kg.errors import DomainError, GridShapeError, ImaginaryOrderError, SingularAxisError
from conformal_kg.grid import Axis, GridField, fd_residual_norm
from conformal_kg.kgoperator import (
    THREADS_ENV,
    SeparatedModeSpec,
    apply_conformal_kg,
    apply_separated_f,
    bessel_product_grid,
    bessel_product_solution,
    default_workers,
    separated_operator_at,
)
from conformal_kg.params import ModelParams

SQRT3 = math.sqrt(3.0)


def _five_axes(x5_lo, h, n=7, lo=0.0):
    return [Axis(name, lo, h, n) for name in ("x1", "x2", "x3", "t")] + [Axis("x5", x5_lo, h, n)]


def _params_with_lambda(lam):
    # N(N + 5) = lam with msq = 0
    return ModelParams(N=(-5 + math.sqrt(25 + 4 * lam)) / 2)


# -- monomial identity ------------------------------------------------------

@pytest.mark.parametrize("q", [0, 1, 2])
@pytest.mark.parametrize("lam", [0.0, -3.0, 2.5])
def test_low_monomials_exact(q, lam):
    params = _params_with_lambda(lam)
    u = GridField.from_function(_five_axes(0.8, 1e-3), lambda *c: c[4] ** q)
    res = apply_conformal_kg(u, params)
    x5 = u.mesh[4]
    expected = (-q * q + 4 * q + params.Lambda) * x5 ** q
    err = np.nanmax(np.abs(res.values - expected))
    assert err < 1e-6


@pytest.mark.parametrize("q", [3, 4])
def test_high_monomials_second_order(q):
    errs = []
    for h in (2e-3, 1e-3):
        u = GridField.from_function(_five_axes(0.8, h), lambda *c: c[4] ** q)
        res = apply_conformal_kg(u, ModelParams())
        errs.append(np.nanmax(np.abs(res.values - (-q * q + 4 * q) * u.mesh[4] ** q)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_operator_examples():
    ax = _five_axes(0.5, 1e-3)
    lam3 = _params_with_lambda(-3.0)
    assert lam3.Lambda == pytest.approx(-3.0, abs=1e-14)
    assert fd_residual_norm(apply_conformal_kg(GridField.from_function(ax, lambda *c: c[4]), lam3))[0] < 1e-8
    assert fd_residual_norm(apply_conformal_kg(GridField.from_function(ax, lambda *c: 1.0 + 0 * c[0]), ModelParams()))[0] == 0.0
    quartic = GridField.from_function(_five_axes(0.2, 1e-3), lambda *c: c[4] ** 4)
    assert fd_residual_norm(apply_conformal_kg(quartic, ModelParams()))[0] < 1e-6


def test_boundary_marked_and_interior_defined():
    u = GridField.from_function(_five_axes(0.5, 0.01, n=4), lambda *c: c[0] * c[4])
    res = apply_conformal_kg(u, ModelParams())
    assert np.isnan(res.values[0]).all() and np.isnan(res.values[:, :, :, :, -1]).all()
    assert not np.isnan(res.values[1:-1, 1:-1, 1:-1, 1:-1, 1:-1]).any()


def test_shape_errors():
    with pytest.raises(GridShapeError):
        apply_conformal_kg(GridField.from_function(_five_axes(0.5, 0.1)[:4], lambda *c: c[0]), ModelParams())
    with pytest.raises(GridShapeError):
        apply_conformal_kg(GridField.from_function(_five_axes(0.5, 0.1, n=2), lambda *c: c[0]), ModelParams())
    with pytest.raises(SingularAxisError):
        apply_conformal_kg(GridField.from_function(_five_axes(-0.3, 0.1), lambda *c: c[0]), ModelParams())
    flat = [Axis("r", 1.0, 0.1, 5), Axis("x5", 0.0, 0.1, 5)]
    with pytest.raises(SingularAxisError):
        apply_separated_f(GridField.from_function(flat, lambda r, x5: r), 1.0, 0, ModelParams())


def test_workers_agree(monkeypatch):
    u = GridField.from_function(_five_axes(0.7, 0.05, n=9), lambda a, b, c, t, x5: np.sin(a + 2 * b) * np.cos(t) * x5 ** 3 + c * x5)
    serial = apply_conformal_kg(u, ModelParams(N=1.0), workers=1).values
    parallel = apply_conformal_kg(u, ModelParams(N=1.0), workers=4).values
    ok = ~np.isnan(serial)
    np.testing.assert_array_equal(np.isnan(serial), np.isnan(parallel))
    np.testing.assert_allclose(parallel[ok], serial[ok], rtol=1e-14, atol=0)
    monkeypatch.setenv(THREADS_ENV, "3")
    assert default_workers() == 3
    monkeypatch.setenv(THREADS_ENV, "junk")
    assert default_workers() == 1


# -- separated operator -----------------------------------------------------

def test_separated_zero_and_linear_examples():
    axes = [Axis.span("r", 1.0, 2.0, 0.01), Axis.span("x5", 1.0, 2.0, 0.01)]
    zero = apply_separated_f(GridField.from_function(axes, lambda r, x5: 0 * r), 1.0, 0, ModelParams())
    assert fd_residual_norm(zero) == (0.0, 0.0)
    lin = apply_separated_f(GridField.from_function(axes, lambda r, x5: r + 0 * x5), 0.0, 0, ModelParams())
    r = lin.mesh[0]
    assert np.nanmax(np.abs(lin.values - 2 / r)) < 1e-10


@pytest.mark.parametrize("ell,m", [(0, 0), (1, 0), (1, 1)])
def test_two_operator_forms_agree(ell, m):
    n, params = 1.3, ModelParams(N=0.5, msq=0.2)
    centre = np.array([0.45, 0.35, 0.55, 0.15, 1.05])

    def f(r, x5):
        return np.exp(-0.5 * r) * x5 ** 3 + 0.2 * r * x5

    # real angular factors that are eigenfunctions of the sphere Laplacian
    def angular(x, y, z, r):
        if ell == 0:
            return np.ones_like(r)
        return (z if m == 0 else x) / r

    def u(x, y, z, t, x5):
        r = np.sqrt(x * x + y * y + z * z)
        return np.cos(n * t) * angular(x, y, z, r) * f(r, x5)

    x, y, z, t, x5 = centre
    r = math.sqrt(x * x + y * y + z * z)
    expected = x5 ** 2 * math.cos(n * t) * angular(x, y, z, r) * separated_operator_at(f, r, x5, n, ell, params, h=1e-4)
    errs = []
    for h in (0.02, 0.01):
        axes = [Axis(name, c - 2 * h, h, 5) for name, c in zip(("x1", "x2", "x3", "t", "x5"), centre)]
        full = apply_conformal_kg(GridField.from_function(axes, u), params)
        errs.append(abs(full.values[2, 2, 2, 2, 2] - expected))
    assert errs[1] < 1e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


# -- Bessel product ---------------------------------------------------------

def test_bessel_product_example():
    spec = SeparatedModeSpec(n=SQRT3, ell=0, m=0, lam=2.0)
    got = bessel_product_solution(1.0, 1.0, spec, ModelParams())
    oracle = float(mpmath.sin(2) / 2 * mpmath.besselj(2, 1))
    assert got == pytest.approx(oracle, abs=1e-14)
    assert got == pytest.approx(0.0522408, abs=1e-7)


def test_bessel_product_radial_node():
    spec = SeparatedModeSpec(n=SQRT3, ell=0, m=0, lam=2.0)
    for x5 in (0.5, 1.0, 2.7):
        assert abs(bessel_product_solution(math.pi / 2, x5, spec, ModelParams())) < 1e-15


def test_bessel_product_small_x5_power():
    params = ModelParams(N=0.3)
    nu = params.bessel_order
    spec = SeparatedModeSpec(n=1.0, ell=1, m=0, lam=2.0)
    a = bessel_product_solution(1.0, 1e-4, spec, params)
    b = bessel_product_solution(1.0, 2e-4, spec, params)
    assert math.log(b / a) / math.log(2) == pytest.approx(2 + nu, rel=1e-6)


@pytest.mark.parametrize("ell", [0, 1, 2])
def test_bessel_product_grid_matches_pointwise(ell):
    spec = SeparatedModeSpec(n=SQRT3, ell=ell, m=0, lam=2.0)
    r_ax, x_ax = Axis.span("r", 1, 1.5, 0.1), Axis.span("x5", 1, 1.5, 0.1)
    grid = bessel_product_grid(r_ax, x_ax, spec, ModelParams())
    for i, r in enumerate(r_ax.coords):
        for j, x5 in enumerate(x_ax.coords):
            assert grid.values[i, j] == pytest.approx(bessel_product_solution(r, x5, spec, ModelParams()), rel=1e-14)


@pytest.mark.parametrize("N", [0.0, 1.0])
def test_bessel_product_solves_separated_equation(N):
    params = ModelParams(N=N)
    spec = SeparatedModeSpec(n=1.0, ell=1, m=0, lam=2.5)
    errs = []
    for h in (4e-3, 2e-3):
        f = bessel_product_grid(Axis.span("r", 1, 2, h), Axis.span("x5", 1, 2, h), spec, params)
        errs.append(fd_residual_norm(apply_separated_f(f, spec.n, spec.ell, params))[0])
    assert errs[1] < 1e-4
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_mode_spec_validation():
    with pytest.raises(DomainError):
        SeparatedModeSpec(n=1.0, ell=1, m=2, lam=2.0)
    with pytest.raises(DomainError):
        SeparatedModeSpec(n=0.0, ell=0, m=0, lam=2.0)
    with pytest.raises(DomainError):
        SeparatedModeSpec(n=2.0, ell=0, m=0, lam=1.0).sigma
    with pytest.raises(ImaginaryOrderError):
        bessel_product_solution(1.0, 1.0, SeparatedModeSpec(1.0, 0, 0, 2.0), ModelParams(N=-2.5))
