"""Model constants shared by every module."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ComplexRootError, DomainError, ImaginaryOrderError


def mu_from_params(N: float, msq: float) -> tuple[float, float]:
    """Both roots of mu(mu - 1) = N^2 + 5N + 15/4 + m^2.

    Returns:
        ``(mu_plus, mu_minus)`` with ``mu_plus >= mu_minus``; they always sum to 1.

    Raises:
        ComplexRootError: if the discriminant is negative.
    """
    return _mu_roots(N * (N + 5.0) + msq)


def _mu_roots(lam: float) -> tuple[float, float]:
    # discriminant of mu^2 - mu - (lam + 15/4) is 4 * (lam + 4)
    quarter_disc = lam + 4.0
    if quarter_disc < 0.0:
        raise ComplexRootError(
            f"mu quadratic has complex roots: Lambda + 4 = {quarter_disc:.6g} < 0"
        )
    half_root = math.sqrt(quarter_disc)
    return 0.5 + half_root, 0.5 - half_root


@dataclass(frozen=True)
class ModelParams:
    """Constants of the conformal model.

    ``r`` is the hypersphere radius and ``r0`` the second universal constant
    (both default to 1); ``N`` is the homogeneity degree and ``msq`` the mass
    parameter m^2.  ``Lambda`` and ``mu`` are derived.
    """

    N: float = 0.0
    msq: float = 0.0
    r: float = 1.0
    r0: float = 1.0

    def __post_init__(self):
        for name in ("N", "msq", "r", "r0"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.r <= 0 or self.r0 <= 0:
            raise DomainError("r and r0 must be positive")
        if self.msq < 0:
            raise DomainError("msq must be non-negative")

    @property
    def Lambda(self) -> float:
        return self.N * (self.N + 5.0) + self.msq

    @property
    def mu(self) -> float:
        """Larger root of mu(mu - 1) = Lambda + 15/4."""
        return _mu_roots(self.Lambda)[0]

    @property
    def mu_minus(self) -> float:
        return _mu_roots(self.Lambda)[1]

    @property
    def bessel_order(self) -> float:
        """Order nu = sqrt(4 + Lambda) of the x5 Bessel factor (equals mu - 1/2)."""
        if self.Lambda + 4.0 < 0.0:
            raise ImaginaryOrderError(f"4 + Lambda = {self.Lambda + 4.0:.6g} < 0")
        return math.sqrt(4.0 + self.Lambda)

    def to_dict(self) -> dict:
        out = {"r": self.r, "r0": self.r0, "N": self.N, "msq": self.msq, "Lambda": self.Lambda}
        try:
            out["mu"] = self.mu
        except ComplexRootError:
            out["mu"] = None
        return out
