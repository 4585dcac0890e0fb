"""Independent reference implementations used by the tests.

Nothing here imports the package under test. Formulas are evaluated with
exact integers and mpmath at 50 significant digits.
"""
from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np

mpmath.mp.dps = 50


def binom(n: int, k: int) -> int:
    """Exact binomial with the zero convention for out-of-range arguments."""
    if n < 0 or k < 0 or k > n:
        return 0
    return math.comb(n, k)


def max_mode(M, m: int) -> int:
    """Largest k with k(k+m-1) <= M^2 by plain search.

    Exact ties such as M = 2*sqrt(2) are computed as 7.999... even at 50
    digits, hence the 1e-40 relative allowance.
    """
    M2 = mpmath.mpf(M) ** 2 * (1 + mpmath.mpf(10) ** -40)
    k = 0
    while (k + 1) * (k + m) <= M2:
        k += 1
    return k


def eigen_count_sum(K: int, m: int) -> int:
    """Sum over modes of the per-degree harmonic counts."""
    return sum(binom(m + k, m) - binom(m + k - 2, m) for k in range(K + 1))


def transport_constant(m: int, z=1):
    m = mpmath.mpf(m)
    area = 2 * mpmath.pi ** ((m + 1) / 2) * z / mpmath.gamma((m + 1) / 2)
    return mpmath.sqrt(m / 6) * area ** (1 / m)


def sphere_wasserstein(m, n, r, z=1):
    return r * mpmath.mpf(n) ** (-mpmath.mpf(1) / m) * transport_constant(m, z)


def difficulty_nats(m, n, d, z, r, delta, b, eps_over_L):
    """Difficulty in nats, evaluated from scratch; returns (total, dominant, bracket)."""
    M = 2 * mpmath.pi * mpmath.mpf(r) / delta
    K = max_mode(M, m)
    E = binom(m + K - 1, m) + binom(m + K, m)
    dominant = 2 * mpmath.mpf(d) * z * E - mpmath.mpf(n) * d
    bracket = (mpmath.log(b) + mpmath.log(z) / 2 + mpmath.log(d) + mpmath.log(K)
               - mpmath.log(n) / m - mpmath.log(eps_over_L) + mpmath.log(transport_constant(m, z)))
    if dominant <= 0 or bracket <= 0:
        return mpmath.mpf(0), dominant, bracket
    return dominant * bracket, dominant, bracket


def rl_difficulty_nats(m, delta, n, d, eps_over_L):
    volume = mpmath.pi ** (mpmath.mpf(m) / 2) / mpmath.gamma(mpmath.mpf(m) / 2 + 1)
    E = (2 * mpmath.pi / delta) ** m * volume
    dominant = d * (2 * E - n)
    bracket = (mpmath.log(4 * mpmath.pi ** 2 / mpmath.sqrt(6)) + mpmath.log(d) + mpmath.log(m) / 2
               - mpmath.log(delta) - mpmath.log(n) / m - mpmath.log(eps_over_L))
    return dominant * bracket


def meta_difficulty_nats(ways, shots, alphabets, z_g, d_g, m0, m1, r_g, delta_g, b_g, eps_over_L):
    """Compose the outer task by hand, then evaluate the general formula."""
    K_g = max_mode(2 * mpmath.pi * mpmath.mpf(r_g) / delta_g, m0)
    E_g = binom(m0 + K_g - 1, m0) + binom(m0 + K_g, m0)
    d_f = 2 * z_g * d_g * E_g
    n = sum(binom(max(a, ways), ways) for a in alphabets) * shots ** ways
    m_f = m1 + (ways - 1) * m0
    r_f = mpmath.mpf(r_g) * mpmath.sqrt(ways)
    b_f = mpmath.mpf(b_g) * mpmath.sqrt(z_g * d_g)
    total, _, _ = difficulty_nats(m_f, n, d_f, 1, r_f, delta_g, b_f, eps_over_L)
    return total, n, d_f


def transport_by_vertices(P: np.ndarray, Q: np.ndarray) -> float:
    """Exact W1 between uniform measures by enumerating every basic feasible plan.

    A basic solution of the transportation polytope is supported on a set of
    |P| + |Q| - 1 cells whose constraint columns are independent; the optimum
    is attained at one of them.
    """
    a, b = len(P), len(Q)
    cost = np.linalg.norm(P[:, None, :] - Q[None, :, :], axis=2)
    cells = [(i, j) for i in range(a) for j in range(b)]
    A = np.zeros((a + b, a * b))
    for c, (i, j) in enumerate(cells):
        A[i, c] = 1.0
        A[a + j, c] = 1.0
    rhs = np.concatenate([np.full(a, 1.0 / a), np.full(b, 1.0 / b)])
    best = math.inf
    for support in itertools.combinations(range(a * b), a + b - 1):
        sub = A[:, support]
        if np.linalg.matrix_rank(sub) < a + b - 1:
            continue
        x, *_ = np.linalg.lstsq(sub, rhs, rcond=None)
        if np.any(x < -1e-12) or np.abs(sub @ x - rhs).max() > 1e-10:
            continue
        best = min(best, float(sum(x[k] * cost[cells[c]] for k, c in enumerate(support))))
    return best
