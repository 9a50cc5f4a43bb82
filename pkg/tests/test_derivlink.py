import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from conformal_kg.coords import ConformalPoint, ModelParams, to_conformal, to_projective
from conformal_kg.derivlink import (
    ConformalJet,
    HomogeneousPolynomial,
    conformal_jet,
    euler_residual,
    fd_projective_gradient,
    homogeneous_extension,
    link_coefficients,
    project_gradient,
    special_projective_gradient,
    standard_fields,
)
from conformal_kg.errors import ChartSingularityError, DomainError

X = sp.symbols("x1:5")
X5 = sp.Symbol("x5")
XB = sp.symbols("xb0:6")


def _section():
    x_sq = sum(v * v for v in X)
    return [(1 - x_sq + X5 ** 2) / (2 * X5), *[v / X5 for v in X], (1 + x_sq - X5 ** 2) / (2 * X5)]


def _sympy_poly(field):
    return sum(c * sp.prod([s ** int(e) for s, e in zip(XB, exps)]) for exps, c in zip(field.exponents, field.coefs))


def _jet_oracle(expr, q):
    subs = dict(zip(X, q.xi)) | {X5: q.x5}
    return ConformalJet(
        float(expr.subs(subs)),
        tuple(float(sp.diff(expr, v).subs(subs)) for v in X),
        float(sp.diff(expr, X5).subs(subs)),
    )


conf_points = st.builds(
    lambda xi, x5: ConformalPoint(tuple(xi), x5),
    st.lists(st.floats(-0.5, 0.5), min_size=4, max_size=4),
    st.floats(0.7, 1.3),
)


def test_coefficient_examples():
    c = link_coefficients(ConformalPoint((0, 0, 0, 0), 1.0))
    assert (c.a_plus, c.a_minus, c.b_plus, c.b_minus) == (1.0, 0.0, 1.0, 0.0)
    c = link_coefficients(ConformalPoint((1, 0, 0, 0), 0.0))
    assert (c.a_plus, c.a_minus, c.b_plus, c.b_minus) == (0.0, 1.0, 1.0, 0.0)
    c = link_coefficients(ConformalPoint((0, 0, 0, 0), 0.0))
    assert (c.a_plus, c.a_minus, c.b_plus, c.b_minus) == (0.5, 0.5, 0.5, 0.5)


def test_project_gradient_examples():
    q = ConformalPoint((0.3, 0, 0, 0), 0.7)
    one = ModelParams(N=1)
    # phibar = xbar0 + xbar5  ->  phi = 1/x5
    g = project_gradient(ConformalJet(1 / 0.7, (0, 0, 0, 0), -1 / 0.49), q, one)
    np.testing.assert_allclose(g.to_array(), [1, 0, 0, 0, 0, 1], atol=1e-14)
    # phibar = xbar1  ->  phi = x1/x5
    g = project_gradient(ConformalJet(0.3 / 0.7, (1 / 0.7, 0, 0, 0), -0.3 / 0.49), q, one)
    np.testing.assert_allclose(g.d_i, [1, 0, 0, 0], atol=1e-14)
    g = project_gradient(ConformalJet(0, (0, 0, 0, 0), 0), q, one)
    assert not np.any(g.to_array())


def test_euler_examples():
    cube = HomogeneousPolynomial({(2, 1, 0, 0, 0, 0): 1.0})
    p = np.array([1.0, 2.0, 0.1, 0.1, 0.1, 0.1])
    assert abs(euler_residual(cube, p, 3, 1e-5)) < 1e-8
    lin = HomogeneousPolynomial({(1, 0, 0, 0, 0, 0): 1.0, (0, 0, 0, 0, 0, 1): 1.0})
    assert abs(euler_residual(lin, p, 1, 1e-5)) < 1e-9
    inhom = lambda xb: xb[0] ** 2 + 1.0
    assert euler_residual(inhom, np.array([1.0, 0, 0, 0, 0, 0]), 2, 1e-5) == pytest.approx(-2.0, abs=1e-8)


def test_special_gradient_examples():
    assert special_projective_gradient(3.0, (0, 0, 0, 0), (0, 0, 0, 0), 0) == ((0, 0, 0, 0), 0)
    d_i, d0 = special_projective_gradient(3.0, (0, 0, 0, 0), (0, 0, 0, 0), 1)
    assert d0 == 3.0 and not any(d_i)
    d_i, d0 = special_projective_gradient(1.0, (1, 0, 0, 0), (1, 0, 0, 0), 1)
    assert d_i[0] == pytest.approx(2.1213203, abs=1e-7)
    assert d0 == pytest.approx(-0.7071068, abs=1e-7)


@settings(max_examples=500)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.floats(-3, 3).filter(lambda v: abs(v) > 1e-3))
def test_coefficient_identities(xi, x5):
    q = ConformalPoint(tuple(xi), x5)
    c = link_coefficients(q)
    scale = max(1.0, q.x_sq, x5 * x5)
    assert abs(c.a_plus + c.a_minus - 1) < 1e-12 * scale
    assert abs(c.b_plus + c.b_minus - 1) < 1e-12 * scale
    assert abs(c.a_minus - c.b_minus - q.x_sq) < 1e-12 * scale
    assert abs(c.a_plus + c.b_plus - 1 - x5 * x5) < 1e-12 * scale


@pytest.mark.parametrize("k", range(3))
def test_jet_matches_sympy(k):
    field = standard_fields()[k]
    expr = _sympy_poly(field).subs(dict(zip(XB, _section())))
    q = ConformalPoint((0.2, -0.4, 0.1, 0.3), 0.9)
    exact = _jet_oracle(expr, q)
    got = conformal_jet(field, q)
    assert got.phi == pytest.approx(exact.phi, rel=1e-13)
    np.testing.assert_allclose(got.d_i, exact.d_i, rtol=1e-12, atol=1e-12)
    assert got.d_5 == pytest.approx(exact.d_5, rel=1e-12)


@pytest.mark.parametrize("k", range(3))
def test_link_formulas_match_exact_gradient(k):
    field = standard_fields()[k]
    params = ModelParams(N=field.degree)
    rng = np.random.default_rng(k)
    for _ in range(50):
        q = ConformalPoint(tuple(rng.uniform(-0.5, 0.5, 4)), rng.uniform(0.7, 1.3))
        predicted = project_gradient(conformal_jet(field, q), q, params).to_array()
        exact = field.gradient(to_projective(q).to_array())
        np.testing.assert_allclose(predicted, exact, rtol=1e-11, atol=1e-11)


@pytest.mark.parametrize("N", [-1.5, 0.0, 2.0, 3.3])
def test_links_for_non_polynomial_field(N):
    # an arbitrary conformal field, extended off the quadric with degree N
    expr = sp.sin(X[0] + 2 * X[2]) * sp.exp(-X5) + X[3] ** 2 * X5
    f = sp.lambdify([*X, X5], expr)
    phibar = homogeneous_extension(lambda q: f(*q.xi, q.x5), N)
    q = ConformalPoint((0.1, 0.3, -0.2, 0.25), 1.1)
    predicted = project_gradient(_jet_oracle(expr, q), q, ModelParams(N=N)).to_array()
    fd = fd_projective_gradient(phibar, to_projective(q), 1e-5)
    np.testing.assert_allclose(predicted, fd, atol=1e-8)
    assert abs(euler_residual(phibar, to_projective(q), N)) < 1e-8


@pytest.mark.parametrize("N", [0.0, 1.0, 2.5])
def test_special_gradient_is_limit_of_full_links(N):
    # the xbar5 = 0 section is x5 = sqrt(1 + x^2), where A- = 0 and A+ = 1
    x = (0.2, 0.1, -0.3, 0.4)
    q = ConformalPoint(x, math.sqrt(1 + sum(v * v for v in x)))
    assert abs(to_projective(q).x5) < 1e-15
    jet = ConformalJet(0.7, (0.1, -0.2, 0.3, 0.05), 0.0)
    full = project_gradient(jet, q, ModelParams(N=N))
    d_i, d0 = special_projective_gradient(jet.phi, jet.d_i, q.xi, N)
    np.testing.assert_allclose(d_i, full.d_i, atol=1e-14)
    assert d0 == pytest.approx(full.d0, abs=1e-14)


@settings(max_examples=100)
@given(conf_points, st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 4))
def test_project_gradient_is_linear(q, a, b, N):
    params = ModelParams(N=N)
    j1 = ConformalJet(1.0, (0.2, 0.3, -0.1, 0.5), -0.4)
    j2 = ConformalJet(-0.3, (1.0, 0.0, 0.7, -0.2), 0.9)
    lhs = project_gradient(a * j1 + b * j2, q, params).to_array()
    rhs = a * project_gradient(j1, q, params).to_array() + b * project_gradient(j2, q, params).to_array()
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + abs(a) + abs(b)) * 10)


def test_euler_residual_on_standard_fields():
    rng = np.random.default_rng(1)
    for field in standard_fields():
        for _ in range(20):
            p = to_projective(ConformalPoint(tuple(rng.uniform(-0.5, 0.5, 4)), rng.uniform(0.7, 1.3)))
            assert abs(euler_residual(field, p, field.degree)) < 1e-8


def test_errors():
    with pytest.raises(ChartSingularityError):
        project_gradient(ConformalJet(1, (0, 0, 0, 0), 0), ConformalPoint((0, 0, 0, 0), 0.0), ModelParams())
    with pytest.raises(DomainError):
        project_gradient(ConformalJet(1, (0, 0, 0, 0), 0), ConformalPoint((0, 0, 0, 0), 1.0), ModelParams(r=2))
    with pytest.raises(DomainError):
        ConformalJet(math.nan, (0, 0, 0, 0), 0)
    with pytest.raises(DomainError):
        HomogeneousPolynomial({(1, 0, 0, 0, 0, 0): 1.0, (2, 0, 0, 0, 0, 0): 1.0})
