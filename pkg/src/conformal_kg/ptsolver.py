"""Bound states of -F'' + V F = E F with the second Poschl-Teller potential.

    V(xi) = mu(mu - 1)/sinh^2 xi - l(l+1)/cosh^2 xi,   0 < xi <= xi_max

Two independent routes are provided:

* shooting: Frobenius series F ~ xi^mu near the origin, Numerov outward,
  eigenvalues bracketed by Sturm node counts and polished with Brent's method;
* matrix: the three-point finite-difference Hamiltonian, negative eigenvalues
  by bisection on the tridiagonal matrix, Richardson-extrapolated over
  successively halved grids.

Both impose F(xi_max) = 0.  Energies map to the separation constant through
E = -(p + 1/2)^2 with p >= -1/2.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from ._fd import second_derivative
from .errors import CrossValidationError, DomainError
from .params import ModelParams
from .specfun import gauss_2f1

__all__ = [
    "Eigenfunction",
    "PTPotentialParams",
    "SolverConfig",
    "Spectrum",
    "analytic_eigenfunction",
    "closed_form_energies",
    "eigenfunction",
    "fd_hamiltonian_eigen",
    "pt_potential",
    "schrodinger_residual",
    "shooting_spectrum",
    "solve_spectrum",
]

# Frobenius series is used on (0, _SERIES_XI]; its radius of convergence is pi/2.
_SERIES_XI = 0.25
_SERIES_TERMS = 30
_RESCALE = 1e150


@dataclass(frozen=True)
class PTPotentialParams:
    mu: float
    ell: int

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu >= 0.5):
            raise DomainError(f"mu must be >= 1/2 (canonical root), got {self.mu}")
        if int(self.ell) != self.ell or self.ell < 0:
            raise DomainError(f"ell must be a non-negative integer, got {self.ell}")

    @classmethod
    def from_model(cls, params: ModelParams, ell: int) -> "PTPotentialParams":
        return cls(params.mu, ell)

    @property
    def core(self) -> float:
        return self.mu * (self.mu - 1.0)

    @property
    def well(self) -> float:
        return float(self.ell * (self.ell + 1))


@dataclass(frozen=True)
class SolverConfig:
    xi_max: float = 20.0
    grid_n: int = 20000
    method: str = "shooting"
    tol: float = 1e-7

    def __post_init__(self):
        if not self.xi_max > 1:
            raise DomainError("xi_max must exceed 1")
        if self.grid_n < 100:
            raise DomainError("grid_n must be at least 100")
        if self.method not in ("shooting", "matrix"):
            raise DomainError(f"unknown method {self.method!r}")
        if not self.tol > 0:
            raise DomainError("tol must be positive")

    @property
    def step(self) -> float:
        return self.xi_max / self.grid_n


@dataclass
class Spectrum:
    """Ascending negative energies and the matching p = sqrt(-E) - 1/2."""

    mu: float
    ell: int
    energies: list[float]
    p_values: list[float] = field(default_factory=list)
    method: str = "shooting"
    error_estimate: float | None = None

    def __post_init__(self):
        self.energies = [float(e) for e in self.energies]
        if any(e >= 0 for e in self.energies):
            raise DomainError("bound-state energies must be negative")
        if any(b <= a for a, b in zip(self.energies, self.energies[1:])):
            raise DomainError("energies must be strictly ascending")
        if not self.p_values:
            self.p_values = [math.sqrt(-e) - 0.5 for e in self.energies]

    def __len__(self) -> int:
        return len(self.energies)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Spectrum":
        return cls(**json.loads(text))


def pt_potential(xi: float, params: PTPotentialParams) -> float:
    if not xi > 0:
        raise DomainError("xi must be positive")
    sh, ch = math.sinh(xi), math.cosh(xi)
    return params.core / (sh * sh) - params.well / (ch * ch)


def _potential(xi: np.ndarray, params: PTPotentialParams) -> np.ndarray:
    return params.core / np.sinh(xi) ** 2 - params.well / np.cosh(xi) ** 2


def schrodinger_residual(
    F, xi: float, params: PTPotentialParams, p: float, h: float = 1e-3, order: int = 4
) -> float:
    """-F'' + [V + (p + 1/2)^2] F at ``xi`` with a central-difference F''."""
    if xi < 3 * h:
        raise DomainError("xi must be at least 3h")
    return -second_derivative(F, xi, h, order) + (pt_potential(xi, params) + (p + 0.5) ** 2) * F(xi)


def closed_form_energies(params: PTPotentialParams) -> list[float]:
    """-(l - mu - 2n)^2 for every n with l - mu - 2n > 0."""
    out = []
    n = 0
    while params.ell - params.mu - 2 * n > 0:
        out.append(-((params.ell - params.mu - 2 * n) ** 2))
        n += 1
    return sorted(out)


def analytic_eigenfunction(params: PTPotentialParams, n: int, xi: float) -> float:
    """Unnormalised n-th bound state sinh^mu cosh^-l 2F1(-n, mu - l + n; mu + 1/2; -sinh^2).

    Restricted to sinh^2 xi < 1, where the hypergeometric series is used.
    """
    if params.ell - params.mu - 2 * n <= 0:
        raise DomainError(f"no bound state n={n} for mu={params.mu}, ell={params.ell}")
    z = -math.sinh(xi) ** 2
    return (
        math.sinh(xi) ** params.mu * math.cosh(xi) ** (-params.ell)
        * gauss_2f1(-n, params.mu - params.ell + n, params.mu + 0.5, z)
    )


# -- shooting ---------------------------------------------------------------


def _series_inverse(c: np.ndarray) -> np.ndarray:
    """Power-series reciprocal 1/c(y), truncated to len(c) terms."""
    out = np.zeros_like(c)
    out[0] = 1.0 / c[0]
    for k in range(1, len(c)):
        out[k] = -np.dot(c[1:k + 1], out[k - 1::-1][:k]) / c[0]
    return out


def _truncated_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: len(a)]


def _frobenius_coefficients(params: PTPotentialParams, energy: float, terms: int = _SERIES_TERMS) -> np.ndarray:
    """a_k with F = xi^mu sum_k a_k xi^(2k), a_0 = 1."""
    k = np.arange(terms)
    sinhc = 1.0 / np.array([math.factorial(2 * j + 1) for j in k], dtype=float)  # sinh(xi)/xi in y = xi^2
    cosh = 1.0 / np.array([math.factorial(2 * j) for j in k], dtype=float)
    inv_sinhc_sq = _series_inverse(_truncated_product(sinhc, sinhc))        # xi^2 / sinh^2
    sech_sq = _series_inverse(_truncated_product(cosh, cosh))                # 1 / cosh^2
    # xi^2 (V - E) = sum_j w_j y^j
    w = params.core * inv_sinhc_sq
    w[1:] -= params.well * sech_sq[:-1]
    w[1] -= energy
    mu = params.mu
    a = np.zeros(terms)
    a[0] = 1.0
    for kk in range(1, terms):
        a[kk] = np.dot(w[1:kk + 1], a[kk - 1::-1][:kk]) / (2 * kk * (2 * mu + 2 * kk - 1))
    return a


def _frobenius(params: PTPotentialParams, energy: float, xi: np.ndarray) -> np.ndarray:
    a = _frobenius_coefficients(params, energy)
    return xi ** params.mu * np.polynomial.polynomial.polyval(xi * xi, a)


def _numerov(w: list[float], f: list[float], start: int, stop: int, step: int) -> float:
    """March the Numerov recurrence in place from ``start`` towards ``stop``.

    ``w`` holds 1 - h^2 Q / 12; ``f`` must already contain the two seed values
    at ``start - step`` and ``start``.  Returns the accumulated log rescaling.
    """
    log_scale = 0.0
    j = start
    f_prev, f_cur = f[j - step], f[j]
    while j != stop:
        f_next = ((12.0 - 10.0 * w[j]) * f_cur - w[j - step] * f_prev) / w[j + step]
        j += step
        f[j] = f_next
        f_prev, f_cur = f_cur, f_next
        if abs(f_cur) > _RESCALE:
            lo, hi = (0, j + 1) if step > 0 else (j, len(f))
            for i in range(lo, hi):
                f[i] /= _RESCALE
            f_prev /= _RESCALE
            f_cur /= _RESCALE
            log_scale += math.log(_RESCALE)
    return log_scale


class _Shooter:
    """Outward integrations at fixed (params, grid), cached by energy."""

    def __init__(self, params: PTPotentialParams, cfg: SolverConfig):
        self.params = params
        self.cfg = cfg
        self.h = cfg.step
        self.n = cfg.grid_n
        self.xi = self.h * np.arange(self.n + 1)
        self.j_series = max(2, int(math.ceil(_SERIES_XI / self.h)))
        self.v = np.empty(self.n + 1)
        self.v[0] = np.inf
        self.v[1:] = _potential(self.xi[1:], params)
        self._counts: dict[float, int] = {}

    def outward(self, energy: float) -> np.ndarray:
        js = self.j_series
        f = [0.0] * (self.n + 1)
        f[: js + 1] = _frobenius(self.params, energy, self.xi[: js + 1]).tolist()
        w = (1.0 - self.h * self.h * (self.v - energy) / 12.0).tolist()
        _numerov(w, f, js, self.n, 1)
        return np.array(f)

    def inward(self, energy: float, stop: int) -> np.ndarray:
        f = [0.0] * (self.n + 1)
        f[self.n - 1] = 1e-200
        w = (1.0 - self.h * self.h * (self.v - energy) / 12.0).tolist()
        _numerov(w, f, self.n - 1, stop, -1)
        return np.array(f)

    @staticmethod
    def _nodes(f: np.ndarray) -> int:
        inner = f[1:]
        return int(np.count_nonzero(inner[:-1] * inner[1:] < 0) + np.count_nonzero(inner[:-1] == 0))

    def count(self, energy: float) -> int:
        """Eigenvalues below ``energy`` = interior nodes of the outward solution."""
        if energy not in self._counts:
            self._counts[energy] = self._nodes(self.outward(energy))
        return self._counts[energy]

    def end_value(self, energy: float) -> float:
        f = self.outward(energy)
        return float(f[-1] / np.max(np.abs(f)))


def _energy_floor(params: PTPotentialParams) -> float:
    # mu >= 1/2 keeps the core above the Hardy bound, so H >= -l(l+1)
    return -params.well - 1.0


def _no_bound_states(params: PTPotentialParams) -> bool:
    return params.core >= 0 and params.well <= params.core


def shooting_spectrum(params: PTPotentialParams, cfg: SolverConfig = SolverConfig()) -> Spectrum:
    """Negative eigenvalues by Sturm-bracketed Numerov shooting."""
    if _no_bound_states(params):
        return Spectrum(params.mu, params.ell, [], method="shooting", error_estimate=0.0)
    sh = _Shooter(params, cfg)
    floor = _energy_floor(params)
    if sh.count(floor) != 0:
        raise CrossValidationError(f"node count at energy floor {floor} is not zero")
    total = sh.count(0.0)
    energies: list[float] = []
    lo = floor
    for k in range(total):
        a, b = lo, 0.0
        while not (sh.count(a) == k and sh.count(b) == k + 1):
            mid = 0.5 * (a + b)
            if sh.count(mid) <= k:
                a = mid
            else:
                b = mid
            if b - a < 1e-14 * max(1.0, abs(a)):
                break
        e_k = brentq(sh.end_value, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
        energies.append(e_k)
        lo = b
    return Spectrum(params.mu, params.ell, energies, method="shooting")


# -- matrix oracle ----------------------------------------------------------


def _fd_eigen(params: PTPotentialParams, xi_max: float, n: int, vectors: bool = False):
    h = xi_max / n
    xi = h * np.arange(1, n)
    diag = 2.0 / (h * h) + _potential(xi, params)
    off = np.full(n - 2, -1.0 / (h * h))
    rng = (_energy_floor(params), 0.0)
    if vectors:
        vals, vecs = eigh_tridiagonal(diag, off, select="v", select_range=rng)
        return xi, diag, off, vals, vecs
    vals = eigh_tridiagonal(diag, off, eigvals_only=True, select="v", select_range=rng)
    return xi, diag, off, vals, None


def _sturm_count(diag: np.ndarray, off: np.ndarray, energy: float) -> int:
    """Sign changes of the discrete solution at ``energy`` = eigenvalues below it."""
    off_sq = (off * off).tolist()
    d = (diag - energy).tolist()
    negatives = 0
    pivot = d[0]
    if pivot < 0:
        negatives += 1
    for j in range(1, len(d)):
        if pivot == 0.0:
            pivot = 1e-300
        pivot = d[j] - off_sq[j - 1] / pivot
        if pivot < 0:
            negatives += 1
    return negatives


def _error_basis(mu: float) -> list:
    """Leading discretisation-error terms of the three-point scheme in h.

    The eigenfunction behaves like xi^mu at the origin; for non-integer
    mu <= 3/2 that makes the local truncation error non-integrable and adds
    an h^(2mu - 1) term (h^2 log h at mu = 3/2) ahead of the usual h^2.
    """
    h2 = lambda h: h * h
    if mu > 1.5 + 1e-12 or float(mu).is_integer() or mu <= 0.5:
        return [h2]
    if abs(mu - 1.5) < 1e-12:
        return [lambda h: h * h * math.log(h), h2]
    return [lambda h: h ** (2.0 * mu - 1.0), h2]


def _extrapolate(hs: Sequence[float], values: np.ndarray, basis: list) -> np.ndarray:
    """Solve E(h) = E0 + sum_k c_k basis_k(h) exactly through the given grids."""
    a = np.array([[1.0] + [b(h) for b in basis] for h in hs])
    return np.linalg.solve(a, values)[0]


def fd_hamiltonian_eigen(
    params: PTPotentialParams, cfg: SolverConfig = SolverConfig(), return_vectors: bool = False
):
    """Negative eigenvalues of the finite-difference Hamiltonian (independent oracle).

    Solves on ``grid_n``, ``2 grid_n`` (and ``4 grid_n`` when the eigenfunctions
    are not smooth at the origin, see :func:`_error_basis`) intervals and
    Richardson-extrapolates the discretisation error away.  ``error_estimate``
    is the largest change between the full extrapolation and the plain h^2
    extrapolation of the two finest grids (|E_fine - E_coarse| / 3 when only
    two grids are used).  A Sturm pivot count at E = 0 on the finest grid must
    equal the number of eigenvalues found.

    With ``return_vectors`` the finest-grid eigenvectors are returned too, as
    ``(spectrum, xi, vectors)`` with columns normalised to unit L2 norm.
    """
    basis = _error_basis(params.mu)
    ns = [cfg.grid_n * 2 ** k for k in range(len(basis) + 1)]
    raw = [_fd_eigen(params, cfg.xi_max, n)[3] for n in ns[:-1]]
    xi, diag, off, finest, vecs = _fd_eigen(params, cfg.xi_max, ns[-1], vectors=return_vectors)
    raw.append(finest)
    sturm = _sturm_count(diag, off, 0.0)
    if sturm != len(finest):
        raise CrossValidationError(f"Sturm count {sturm} != {len(finest)} eigenvalues below zero")
    k = min(len(r) for r in raw)
    stack = np.array([r[:k] for r in raw])
    hs = [cfg.xi_max / n for n in ns]
    if k:
        extrap = _extrapolate(hs, stack, basis)
        plain = (4.0 * stack[-1] - stack[-2]) / 3.0
        err = float(np.max(np.abs(stack[-1] - stack[-2]) / 3.0 if len(basis) == 1 else np.abs(extrap - plain)))
    else:
        extrap, err = np.zeros(0), 0.0
    spec = Spectrum(params.mu, params.ell, extrap.tolist(), method="matrix", error_estimate=err)
    if not return_vectors:
        return spec
    h = xi[1] - xi[0]
    vecs = vecs[:, :k] / math.sqrt(h)
    first = np.argmax(np.abs(vecs) > 1e-8 * np.abs(vecs).max(axis=0), axis=0)
    vecs *= np.sign(vecs[first, np.arange(k)])
    return spec, xi, vecs


def solve_spectrum(params: PTPotentialParams, cfg: SolverConfig = SolverConfig()) -> Spectrum:
    """Bound-state spectrum, cross-validated between shooting and the matrix oracle.

    The returned spectrum comes from ``cfg.method``; its ``error_estimate`` is
    the largest disagreement between the two independent methods.

    Raises:
        CrossValidationError: if the two routes find different numbers of
            states or disagree by more than ``10 * cfg.tol``.
    """
    if _no_bound_states(params):
        return Spectrum(params.mu, params.ell, [], method=cfg.method, error_estimate=0.0)
    shot = shooting_spectrum(params, cfg)
    mat = fd_hamiltonian_eigen(params, cfg)
    if len(shot) != len(mat):
        raise CrossValidationError(
            f"shooting found {len(shot)} states, matrix found {len(mat)} (mu={params.mu}, ell={params.ell})"
        )
    gap = float(np.max(np.abs(np.subtract(shot.energies, mat.energies)))) if len(shot) else 0.0
    if gap > 10.0 * cfg.tol:
        raise CrossValidationError(f"methods disagree by {gap:.3g} > {10 * cfg.tol:.3g}")
    chosen = shot if cfg.method == "shooting" else mat
    chosen.error_estimate = gap
    return chosen


# -- eigenfunctions ---------------------------------------------------------


class Eigenfunction:
    """Unit-norm bound state on [0, xi_max] as a smooth callable (cubic spline)."""

    def __init__(self, xi: np.ndarray, values: np.ndarray, energy: float, params: PTPotentialParams):
        self.xi = xi
        self.values = values
        self.energy = energy
        self.params = params
        self.p = math.sqrt(-energy) - 0.5
        self._spline = CubicSpline(xi, values)

    def __call__(self, xi: float) -> float:
        if xi < 0 or xi > self.xi[-1]:
            return 0.0
        return float(self._spline(xi))


def eigenfunction(params: PTPotentialParams, energy: float, cfg: SolverConfig = SolverConfig()) -> Eigenfunction:
    """Bound state at an eigenvalue ``energy`` by outward/inward Numerov matching.

    The outward solution is kept up to the outer classical turning point and
    the inward (decaying) solution beyond it, scaled to join continuously.
    """
    sh = _Shooter(params, cfg)
    allowed = np.nonzero(sh.v[1:] - energy < 0)[0]
    if allowed.size == 0:
        raise DomainError("energy lies below the potential everywhere")
    match = int(min(max(allowed[-1] + 1, sh.j_series + 2), sh.n - 3))
    out = sh.outward(energy)
    inn = sh.inward(energy, match - 1)
    f = out.copy()
    f[match:] = inn[match:] * (out[match] / inn[match])
    f[-1] = 0.0
    h = sh.h
    norm = math.sqrt(float(np.sum(f * f)) * h)
    f /= norm
    return Eigenfunction(sh.xi, f, energy, params)
