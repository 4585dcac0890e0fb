"""Wasserstein distances: closed-form approximations and an exact solver.

The exact solver works on uniform empirical measures. When the two point
counts share a small common multiple the problem is an assignment problem on
replicated points; otherwise it is solved as a transportation LP.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog
from scipy.spatial.distance import cdist
from scipy.special import gammaln
from scipy.stats import linregress

# largest replicated problem solved as an assignment
ASSIGNMENT_CAP = 4000
MASS_TOL = 1e-9


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Uniform measure on a finite point cloud."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("an empirical distribution needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("all coordinates must be finite")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass
class TransportPlan:
    flows: list = field(default_factory=list)  # (source, sink, mass)
    cost: float = 0.0

    def as_matrix(self, n_src: int, n_dst: int) -> np.ndarray:
        mat = np.zeros((n_src, n_dst))
        for i, j, mass in self.flows:
            mat[i, j] += mass
        return mat


# -- closed forms -----------------------------------------------------------

def log_sphere_area_factor(m: int, z: float = 1.0) -> float:
    """ln of 2*pi^((m+1)/2) * z / Gamma((m+1)/2), the total area of z unit m-spheres."""
    return math.log(2.0) + 0.5 * (m + 1) * math.log(math.pi) + math.log(z) - float(gammaln(0.5 * (m + 1)))


def log_transport_constant(m: int, z: float = 1.0) -> float:
    """ln c with c = sqrt(m/6) * (total sphere area)^(1/m)."""
    return 0.5 * math.log(m / 6.0) + log_sphere_area_factor(m, z) / m


def wasserstein_sphere_approx(m: int, n: float, r: float, z: float = 1) -> float:
    """Hypercube-tiling estimate of W(p, q) for n samples on z spheres of radius r.

    Returns r * n^(-1/m) * c.
    """
    if m < 1 or n <= 0 or r <= 0 or z <= 0:
        raise ValueError("m, n, r, z must be positive")
    return math.exp(math.log(r) - math.log(n) / m + log_transport_constant(m, z))


def wasserstein_cube_approx(m: int, n: float) -> float:
    """Same estimate on the torus [-pi, pi]^m: sqrt(m/6) * 2*pi * n^(-1/m)."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    return math.sqrt(m / 6.0) * 2.0 * math.pi * math.exp(-math.log(n) / m)


# -- exact solver -----------------------------------------------------------

def _as_dist(x) -> EmpiricalDistribution:
    return x if isinstance(x, EmpiricalDistribution) else EmpiricalDistribution(np.asarray(x))


def exact_wasserstein(P, Q, assignment_cap: int = ASSIGNMENT_CAP):
    """Exact 1-Wasserstein distance between two uniform empirical measures.

    Ground cost is the Euclidean (chordal) distance. Returns ``(W, plan)``.
    """
    P, Q = _as_dist(P), _as_dist(Q)
    if P.dim != Q.dim:
        raise ValueError(f"dimension mismatch: {P.dim} vs {Q.dim}")
    cost = cdist(P.points, Q.points)
    n_p, n_q = cost.shape
    lcm = n_p * n_q // math.gcd(n_p, n_q)

    if lcm <= assignment_cap:
        flows = _solve_by_assignment(cost, lcm)
    else:
        flows = _solve_by_lp(cost)

    total = float(sum(mass * cost[i, j] for i, j, mass in flows))
    return total, TransportPlan(flows=flows, cost=total)


def _solve_by_assignment(cost: np.ndarray, lcm: int) -> list:
    n_p, n_q = cost.shape
    rep_p, rep_q = lcm // n_p, lcm // n_q
    big = np.repeat(np.repeat(cost, rep_p, axis=0), rep_q, axis=1)
    rows, cols = linear_sum_assignment(big)
    src = rows // rep_p
    dst = cols // rep_q
    counts: dict = {}
    for i, j in zip(src.tolist(), dst.tolist()):
        counts[(i, j)] = counts.get((i, j), 0) + 1
    return [(i, j, c / lcm) for (i, j), c in sorted(counts.items())]


def _solve_by_lp(cost: np.ndarray) -> list:
    n_p, n_q = cost.shape
    nvar = n_p * n_q
    idx = np.arange(nvar)
    row_of = idx // n_q
    col_of = idx % n_q
    a_rows = sparse.csr_matrix((np.ones(nvar), (row_of, idx)), shape=(n_p, nvar))
    a_cols = sparse.csr_matrix((np.ones(nvar), (col_of, idx)), shape=(n_q, nvar))
    a_eq = sparse.vstack([a_rows, a_cols]).tocsr()
    b_eq = np.concatenate([np.full(n_p, 1.0 / n_p), np.full(n_q, 1.0 / n_q)])
    res = linprog(
        cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise RuntimeError(f"transportation LP failed: {res.message}")
    x = res.x
    keep = np.nonzero(x > MASS_TOL * 1e-3)[0]
    return [(int(row_of[k]), int(col_of[k]), float(x[k])) for k in keep]


def sample_uniform_sphere(m: int, count: int, seed) -> EmpiricalDistribution:
    """``count`` points uniform on the unit m-sphere in R^(m+1)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((count, m + 1))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return EmpiricalDistribution(x)


# -- scaling experiment -----------------------------------------------------

@dataclass
class ScalingResult:
    rows: list  # (m, n, trial, W)
    fits: list  # (m, slope, intercept, r2)

    def fit_for(self, m: int) -> tuple:
        for row in self.fits:
            if row[0] == m:
                return row
        raise KeyError(m)

    def rows_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "n", "trial", "wasserstein"])
        for m, n, t, dist in self.rows:
            w.writerow([m, n, t, repr(dist)])
        return buf.getvalue()

    def fits_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "slope", "intercept", "r2"])
        for m, slope, intercept, r2 in self.fits:
            w.writerow([m, repr(slope), repr(intercept), repr(r2)])
        return buf.getvalue()


def _cell(args):
    m, n, trial, ref_size, seed = args
    ss = np.random.SeedSequence([seed, m, n, trial])
    ref_seed, sub_seed = ss.spawn(2)
    ref = sample_uniform_sphere(m, ref_size, ref_seed)
    sub = sample_uniform_sphere(m, n, sub_seed)
    dist, _ = exact_wasserstein(sub, ref)
    return m, n, trial, dist


def scaling_experiment(m_values, n_values, ref_size=2000, trials=5, seed=0, workers=1) -> ScalingResult:
    """Exact W between an n-point and a ref_size-point sample of the unit m-sphere.

    Fits log W (averaged over trials) against log n for each m.
    """
    if ref_size <= max(n_values):
        raise ValueError("ref_size must exceed every n")
    cells = [(int(m), int(n), t, int(ref_size), int(seed))
             for m in m_values for n in n_values for t in range(trials)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_cell, cells))
    else:
        rows = [_cell(c) for c in cells]

    fits = []
    for m in m_values:
        xs, ys = [], []
        for n in n_values:
            ws = [w for mm, nn, _, w in rows if mm == m and nn == n]
            xs.append(math.log(n))
            ys.append(float(np.mean(np.log(ws))))
        fit = linregress(xs, ys)
        fits.append((int(m), float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)))
    return ScalingResult(rows=rows, fits=fits)
