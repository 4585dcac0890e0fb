"""Eigenfunction counts of the Laplace-Beltrami operator below a frequency cutoff."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.special import gammaln

from .numerics import LogScalar, log_add, log_binomial


@dataclass(frozen=True)
class SpectrumParams:
    m: int
    r: float
    delta: float

    def __post_init__(self):
        if self.m < 1 or self.r <= 0 or self.delta <= 0:
            raise ValueError("m must be >= 1 and r, delta must be positive")
        if self.M < 1.0:
            warnings.warn(
                f"frequency cutoff M={self.M:.3g} < 1: resolution is coarser than the manifold",
                stacklevel=2,
            )

    @property
    def M(self) -> float:
        return cutoff(self.r, self.delta)

    @property
    def K(self) -> int:
        return max_mode(self.M, self.m)

    @property
    def E(self) -> LogScalar:
        return eigen_count(self.K, self.m)


def cutoff(r: float, delta: float) -> float:
    """Maximum frequency ``M = 2*pi*r/delta``."""
    return 2.0 * math.pi * r / delta


def max_mode(M: float, m: int) -> int:
    """Largest integer k with k(k+m-1) <= M**2 (ties included)."""
    if M < 0:
        raise ValueError("M must be nonnegative")
    m = int(m)
    # relative slack so that M = sqrt(k(k+m-1)) computed in floating point still counts as a tie
    target = M * M * (1.0 + 1e-12)
    # positive root of k^2 + (m-1)k - M^2 = 0, then fix up rounding
    k = int(math.floor((-(m - 1) + math.sqrt((m - 1) ** 2 + 4.0 * target)) / 2.0))
    k = max(k, 0)
    while k > 0 and k * (k + m - 1) > target:
        k -= 1
    while (k + 1) * (k + m) <= target:
        k += 1
    return k


def eigen_count(K: int, m: int) -> LogScalar:
    """Number of eigenfunctions on the m-sphere with mode index <= K.

    Closed form C(m+K-1, m) + C(m+K, m), returned in log space.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    return log_add(log_binomial(m + K - 1, m), log_binomial(m + K, m))


def lipschitz_Lf(K: int, d: int, r: float) -> float:
    """Joint input/parameter sensitivity constant K*sqrt(d)/r."""
    if r <= 0:
        raise ValueError("r must be positive")
    return K * math.sqrt(d) / r


def log_unit_ball_volume(m: int) -> float:
    """ln V_m with V_m = pi^(m/2) / Gamma(m/2 + 1)."""
    return 0.5 * m * math.log(math.pi) - float(gammaln(0.5 * m + 1.0))


def euclidean_mode_count(m: int, delta: float) -> LogScalar:
    """Ball-volume approximation of #{p in Z^m : |p| <= 2*pi/delta}."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return LogScalar(1, m * math.log(2.0 * math.pi / delta) + log_unit_ball_volume(m))
