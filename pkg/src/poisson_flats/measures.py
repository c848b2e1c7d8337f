"""Analytic quantities of isotropic Poisson flat processes.

Constants are assembled from ``log_omega`` so that ratios stay finite for
dimensions up to 20. The radial integrals use the flat-distance density
``omega_{d-k} cs^k(s) sn^{d-k-1}(s)`` which, integrated against powers of
the slice volume, yields the moments of the intersection functionals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import DomainError
from .geometry import (DEFAULT_QUAD, QuadratureSpec, SpaceSpec, _slice_volume, ball_volume,
                       log_omega, omega, sn_power_integral)

__all__ = [
    "ProcessSpec", "GrowthKind", "GrowthClass", "crofton_constant", "c_dk",
    "multi_intersection_constant", "radial_flat_density", "flat_measure_of_ball",
    "slice_power_integral", "g_asymptotic", "mean_F", "variance_F", "variance_terms",
    "kernel_prefactor", "variance_order", "A_order",
]


@dataclass(frozen=True)
class ProcessSpec:
    """Poisson k-flat process of intensity ``t`` and intersection order ``m``."""

    space: SpaceSpec
    k: int
    t: float = 1.0
    m: int = 1

    def __post_init__(self):
        d = self.space.d
        if not 0 <= self.k <= d - 1:
            raise DomainError(f"k must lie in [0, {d - 1}], got {self.k}")
        if not self.t > 0:
            raise DomainError("intensity must be positive")
        if self.m < 1 or d - self.m * (d - self.k) < 0:
            raise DomainError(f"order m={self.m} impossible for d={d}, k={self.k}")

    @property
    def section_dim(self) -> int:
        """Dimension d - m(d-k) of the generic m-fold intersection."""
        return self.space.d - self.m * (self.space.d - self.k)


class GrowthKind(enum.Enum):
    ExpD1 = "ExpD1"
    RExpD1 = "RExpD1"
    Exp2K1 = "Exp2K1"


@dataclass(frozen=True)
class GrowthClass:
    kind: GrowthKind
    rate_description: str


def crofton_constant(d: int, k: int, i: int) -> float:
    if not 0 <= i <= k <= d - 1:
        raise DomainError("Crofton constant needs 0 <= i <= k <= d-1")
    return math.exp(log_omega(d + 1) + log_omega(i + 1) - log_omega(k + 1) - log_omega(d - k + i + 1))


def c_dk(d: int, k: int) -> float:
    if not 1 <= k <= d - 1:
        raise DomainError("c(d,k) needs 1 <= k <= d-1")
    return math.exp(log_omega(k + 1) - log_omega(d + 1) + (d - k) * (log_omega(d + 1) - log_omega(d)))


def multi_intersection_constant(d: int, k: int, r_count: int) -> float:
    """Constant turning the r-fold product flat measure into the measure on intersections."""
    j = d - r_count * (d - k)
    if r_count < 1 or j < 0:
        raise DomainError("need r_count >= 1 and r_count (d-k) <= d")
    return math.exp(log_omega(j + 1) - log_omega(d + 1) + r_count * (log_omega(d + 1) - log_omega(k + 1)))


def _radial_weight(kappa: int, d: int, k: int, s):
    s = np.asarray(s, dtype=float)
    if kappa == 0:
        return s ** (d - k - 1)
    if kappa == -1:
        return np.cosh(s) ** k * np.sinh(s) ** (d - k - 1)
    return np.cos(s) ** k * np.sin(s) ** (d - k - 1)


def radial_flat_density(space: SpaceSpec, k: int, s):
    """Density of the distance-to-origin pushforward of the invariant k-flat measure."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise DomainError("distance must be nonnegative")
    if space.kappa == 1 and np.any(s_arr > math.pi / 2 + 1e-15):
        raise DomainError("spherical flat distances lie in [0, pi/2]")
    out = omega(space.d - k) * _radial_weight(space.kappa, space.d, k, s_arr)
    return out if out.ndim else float(out)


@lru_cache(maxsize=1024)
def flat_measure_of_ball(space: SpaceSpec, k: int, r: float, quad: QuadratureSpec | None = None) -> float:
    """Invariant measure of the k-flats hitting the ball B_r."""
    space.check_radius(r)
    q = quad or DEFAULT_QUAD
    d = space.d
    if space.kappa == 0:
        return omega(d - k) * r ** (d - k) / (d - k)
    if k == 0:
        return omega(d) * float(sn_power_integral(space.kappa, d - 1, r))
    return omega(d - k) * q.quad(lambda s: _radial_weight(space.kappa, d, k, s), 0.0, r)


def slice_power_integral(space: SpaceSpec, j: int, l: int, r: float,
                         quad: QuadratureSpec | None = None) -> float:
    """Integral of (j-volume of E cap B_r)^l over the invariant j-flat measure."""
    space.check_radius(r)
    d = space.d
    if not 0 <= j <= d - 1 or l < 1:
        raise DomainError("need 0 <= j <= d-1 and l >= 1")
    if j == 0:
        return flat_measure_of_ball(space, 0, r, quad)
    q = quad or DEFAULT_QUAD
    kap = space.kappa

    def integrand(s):
        return _slice_volume(kap, j, r, s) ** l * _radial_weight(kap, d, j, s)

    # most of the mass sits near the rim for large hyperbolic radii
    pts = None
    if kap == -1 and r > 4:
        pts = [r - x for x in (3.0, 1.0, 0.3) if r - x > 0]
    return omega(d - j) * q.quad(integrand, 0.0, r, points=pts, limit=200)


def g_asymptotic(k: int, l: int, d: int, r: float) -> float:
    """Growth profile of the hyperbolic slice-power integral (three regimes)."""
    a, b = l * (k - 1), d - 1
    if a < b:
        return math.exp(r * (d - 1))
    if a == b:
        return r * math.exp(r * (d - 1))
    return math.exp(l * r * (k - 1))


def mean_F(proc: ProcessSpec, r: float, quad: QuadratureSpec | None = None) -> float:
    """Expectation of the m-th order intersection volume in B_r."""
    d, k, m, t = proc.space.d, proc.k, proc.m, proc.t
    return t ** m / math.factorial(m) * multi_intersection_constant(d, k, m) * ball_volume(proc.space, r)


def _log_A_constant(d: int, k: int, m: int, i: int) -> float:
    j_i = d - i * (d - k)
    j_m = d - m * (d - k)
    return (2 * (gammaln(m + 1) - gammaln(i + 1) - gammaln(m - i + 1)) - 2 * gammaln(m + 1)
            + (2 * m - i) * (log_omega(d + 1) - log_omega(k + 1))
            + 2 * log_omega(j_m + 1) - log_omega(d + 1) - log_omega(j_i + 1))


def variance_terms(proc: ProcessSpec, r: float, quad: QuadratureSpec | None = None) -> list[float]:
    """The summands i! t^(2m-i) A_i, i = 1..m, of the variance."""
    d, k, m, t = proc.space.d, proc.k, proc.m, proc.t
    out = []
    for i in range(1, m + 1):
        j_i = d - i * (d - k)
        spi = slice_power_integral(proc.space, j_i, 2, r, quad)
        out.append(math.factorial(i) * t ** (2 * m - i) * math.exp(_log_A_constant(d, k, m, i)) * spi)
    return out


def variance_F(proc: ProcessSpec, r: float, quad: QuadratureSpec | None = None) -> float:
    return math.fsum(variance_terms(proc, r, quad))


@lru_cache(maxsize=None)
def kernel_prefactor(d: int, k: int, m: int, i: int, t: float) -> float:
    """Constant in front of the i-fold intersection volume in the i-th chaos kernel."""
    if not 1 <= i <= m:
        raise DomainError("need 1 <= i <= m")
    j_i = d - i * (d - k)
    j_m = d - m * (d - k)
    if j_m < 0:
        raise DomainError("order m impossible for (d, k)")
    return math.comb(m, i) * t ** (m - i) / math.factorial(m) * math.exp(
        (m - i) * (log_omega(d + 1) - log_omega(k + 1)) + log_omega(j_m + 1) - log_omega(j_i + 1))


_RATES = {
    GrowthKind.ExpD1: "e^{r(d-1)}",
    GrowthKind.RExpD1: "r e^{r(d-1)}",
    GrowthKind.Exp2K1: "e^{2r(k-1)}",
}


def variance_order(d: int, k: int, m: int = 1) -> GrowthClass:
    if 2 * k < d + 1:
        kind = GrowthKind.ExpD1
    elif 2 * k == d + 1:
        kind = GrowthKind.RExpD1
    else:
        kind = GrowthKind.Exp2K1
    return GrowthClass(kind, _RATES[kind])


def A_order(d: int, k: int, m: int, i: int) -> str:
    """Growth of the i-th variance summand on hyperbolic balls, as a rate string."""
    if not 1 <= i <= m:
        raise DomainError("need 1 <= i <= m")
    lhs = 2 * i * (d - k)
    if lhs > d - 1:
        return "e^{r(d-1)}"
    if lhs == d - 1:
        return "r e^{r(d-1)}"
    return f"e^{{{2 * (d - i * (d - k) - 1)}r}}"
