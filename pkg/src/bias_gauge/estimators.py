"""Estimate intrinsic dimension, class margin and input radius from data."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

# rows per block in the brute-force distance scans
BLOCK_ROWS = 1024


class DegenerateGeometry(ValueError):
    """Raised when the data cannot support the requested estimate."""


@dataclass
class LabeledDataset:
    vectors: np.ndarray
    labels: Optional[np.ndarray] = None
    num_classes: Optional[int] = None

    def __post_init__(self):
        vec = np.asarray(self.vectors, dtype=float)
        if vec.ndim == 1:
            vec = vec[:, None]
        if vec.ndim != 2 or vec.shape[0] < 1:
            raise ValueError("dataset needs at least one vector")
        if not np.all(np.isfinite(vec)):
            raise ValueError("all coordinates must be finite")
        self.vectors = vec
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape != (vec.shape[0],):
                raise ValueError("labels must match the number of vectors")
            if lab.size and not np.issubdtype(lab.dtype, np.integer):
                if not np.all(lab == np.round(lab)):
                    raise ValueError("labels must be integers")
            lab = lab.astype(np.int64)
            if self.num_classes is None:
                self.num_classes = int(lab.max()) + 1
            if lab.min() < 0 or lab.max() >= self.num_classes:
                raise ValueError("labels out of range [0, C)")
            self.labels = lab

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def labeled(self) -> bool:
        return self.labels is not None

    def classes_present(self) -> int:
        return 0 if self.labels is None else int(np.unique(self.labels).size)


def _vectors(data) -> np.ndarray:
    if isinstance(data, LabeledDataset):
        return data.vectors
    arr = np.asarray(data, dtype=float)
    return arr[:, None] if arr.ndim == 1 else arr


# -- radius -------------------------------------------------------------------

def max_norm_r(data) -> float:
    """Largest Euclidean norm in the data; warns when it is zero."""
    x = _vectors(data)
    if x.shape[0] == 0:
        raise ValueError("empty dataset")
    r = float(np.sqrt(np.max(np.einsum("ij,ij->i", x, x))))
    if r == 0.0:
        warnings.warn("all vectors are zero: radius 0 gives a zero frequency cutoff", stacklevel=2)
    return r


# -- nearest neighbours --------------------------------------------------------

def knn_distances(x: np.ndarray, queries: np.ndarray, k: int, exclude_self: Optional[np.ndarray] = None) -> np.ndarray:
    """Exact distances from each query row to its k nearest rows of ``x``.

    ``exclude_self[i]`` is the index in ``x`` of query i, skipped as its own
    neighbour. Candidates are found with the Gram expansion, then distances
    are recomputed directly so near-duplicates keep full precision.
    """
    sq = np.einsum("ij,ij->i", x, x)
    out = np.empty((queries.shape[0], k))
    extra = k + 1 if exclude_self is not None else k
    extra = min(extra, x.shape[0])
    for start in range(0, queries.shape[0], BLOCK_ROWS):
        q = queries[start:start + BLOCK_ROWS]
        d2 = np.einsum("ij,ij->i", q, q)[:, None] + sq[None, :] - 2.0 * q @ x.T
        if exclude_self is not None:
            rows = np.arange(q.shape[0])
            d2[rows, exclude_self[start:start + BLOCK_ROWS]] = np.inf
        # keep a few spare candidates against rounding in the expansion
        cand_n = min(extra + 4, x.shape[0])
        cand = np.argpartition(d2, cand_n - 1, axis=1)[:, :cand_n]
        exact = np.linalg.norm(x[cand] - q[:, None, :], axis=2)
        if exclude_self is not None:
            self_mask = cand == exclude_self[start:start + BLOCK_ROWS, None]
            exact[self_mask] = np.inf
        exact.sort(axis=1)
        out[start:start + q.shape[0]] = exact[:, :k]
    return out


def intrinsic_dim_mle(data, k: int = 5, anchors: Optional[int] = None, seed=0) -> float:
    """Levina-Bickel MLE of intrinsic dimension, inverse-of-mean aggregation.

    With ``anchors`` set, a seeded random subset of points is used as query
    points while neighbours are still searched in the full set.
    """
    x = _vectors(data)
    n = x.shape[0]
    if k < 2:
        raise ValueError("k must be at least 2")
    if n <= k:
        raise ValueError(f"need more than k={k} points, got {n}")
    if anchors is None:
        idx = np.arange(n)
    else:
        if not 1 <= anchors <= n:
            raise ValueError("anchors must be in [1, number of points]")
        if anchors == n:
            idx = np.arange(n)
        else:
            idx = np.sort(np.random.default_rng(seed).choice(n, size=anchors, replace=False))

    t = knn_distances(x, x[idx], k, exclude_self=idx)
    tk = t[:, k - 1:k]
    tj = t[:, :k - 1]
    ok = (tj > 0) & (tk > 0)
    skipped = int(ok.size - ok.sum())
    if skipped:
        if not ok.any():
            raise DegenerateGeometry("degenerate geometry: every neighbour distance is zero")
        warnings.warn(f"skipped {skipped} zero-distance neighbour pairs (duplicate points)", stacklevel=2)
    with np.errstate(divide="ignore"):
        logs = np.log(np.broadcast_to(tk, tj.shape)[ok] / tj[ok])
    mean = float(logs.mean())
    if mean <= 0:
        raise DegenerateGeometry("degenerate geometry: neighbour distances do not grow")
    return 1.0 / mean


# -- exact margin ----------------------------------------------------------------

def _require_two_classes(data: LabeledDataset):
    if not isinstance(data, LabeledDataset) or not data.labeled:
        raise ValueError("margin estimation needs a labeled dataset")
    if data.classes_present() < 2:
        raise ValueError("margin estimation needs at least two classes")


def margin_exact(data: LabeledDataset) -> float:
    """Minimum distance between two points with different labels."""
    _require_two_classes(data)
    x, y = data.vectors, data.labels
    sq = np.einsum("ij,ij->i", x, x)
    best = math.inf
    for start in range(0, x.shape[0], BLOCK_ROWS):
        q = x[start:start + BLOCK_ROWS]
        d2 = sq[start:start + BLOCK_ROWS, None] + sq[None, :] - 2.0 * q @ x.T
        d2[y[start:start + BLOCK_ROWS, None] == y[None, :]] = np.inf
        cand_n = min(3, x.shape[0])
        cand = np.argpartition(d2, cand_n - 1, axis=1)[:, :cand_n]
        exact = np.linalg.norm(x[cand] - q[:, None, :], axis=2)
        exact[y[cand] == y[start:start + BLOCK_ROWS, None]] = np.inf
        best = min(best, float(exact.min()))
    if best == 0.0:
        warnings.warn("coincident points with different labels: margin is 0", stacklevel=2)
    return best


# -- extreme value theory --------------------------------------------------------

@dataclass
class EvtDiagnostics:
    gamma_hat: float
    m1: float
    m2: float
    anchor_order_stat: float
    a_n: float = math.nan
    P_est: float = math.nan

    def to_json(self) -> dict:
        return asdict(self)


def evt_gamma(samples, k: int) -> EvtDiagnostics:
    """Moment estimator of the extreme value index from the top k+1 order statistics."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if k < 2 or n <= k:
        raise ValueError(f"need n > k >= 2, got n={n}, k={k}")
    anchor = x[n - k - 1]  # X_{n-k,n}
    if anchor <= 0:
        raise ValueError("the anchor order statistic must be positive")
    excess = np.log(x[n - k:]) - math.log(anchor)
    m1 = float(excess.mean())
    m2 = float(np.mean(excess ** 2))
    if m2 == 0.0:
        raise DegenerateGeometry("degenerate tail: top order statistics are all equal")
    gamma = m1 + 1.0 - 0.5 / (1.0 - m1 * m1 / m2)
    return EvtDiagnostics(gamma_hat=float(gamma), m1=m1, m2=m2, anchor_order_stat=float(anchor))


@dataclass
class EvtMarginResult:
    delta: float
    inverse_estimates: list
    diagnostics: list
    fallback_trials: int = 0
    flags: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "inverse_estimates": self.inverse_estimates,
            "diagnostics": [d.to_json() for d in self.diagnostics],
            "fallback_trials": self.fallback_trials,
            "flags": self.flags,
        }


def sample_cross_class_pairs(labels: np.ndarray, count: int, rng) -> tuple:
    """Uniform draws, with replacement, from ordered pairs with different labels."""
    n = labels.size
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    classes, starts, sizes = np.unique(sorted_labels, return_index=True, return_counts=True)
    class_pos = np.searchsorted(classes, labels)
    weight = (n - sizes[class_pos]).astype(float)
    first = rng.choice(n, size=count, p=weight / weight.sum())
    c = class_pos[first]
    # uniform position among the n - size_c points outside class c
    pos = (rng.random(count) * (n - sizes[c])).astype(np.int64)
    pos = np.minimum(pos, n - sizes[c] - 1)
    pos = pos + np.where(pos >= starts[c], sizes[c], 0)
    second = order[pos]
    return first, second


def evt_margin(data: LabeledDataset, n_sub: int = 40000, k: int = 200, trials: int = 10,
               seed=0) -> EvtMarginResult:
    """Extreme-value estimate of the class margin from sampled cross-class pairs."""
    _require_two_classes(data)
    x, y = data.vectors, data.labels
    n_data = x.shape[0]
    n_classes = data.num_classes
    P = n_data * n_data * (1.0 - 1.0 / n_classes)
    a_n = k * P / n_sub
    rng = np.random.default_rng(seed)
    estimates, diags = [], []
    fallback = 0
    for _ in range(trials):
        i, j = sample_cross_class_pairs(y, n_sub, rng)
        dist = np.linalg.norm(x[i] - x[j], axis=1)
        if np.any(dist == 0):
            raise DegenerateGeometry("degenerate tail: coincident cross-class points")
        recip = 1.0 / dist
        diag = evt_gamma(recip, k)
        diag.a_n, diag.P_est = a_n, P
        diags.append(diag)
        g = diag.gamma_hat
        if g > 0:
            est = (a_n ** g - 1.0) / g * diag.anchor_order_stat * diag.m1 + diag.anchor_order_stat
        else:
            fallback += 1
            est = float(recip.max())
        estimates.append(float(est))
    flags = ["evt_fallback"] if fallback else []
    return EvtMarginResult(
        delta=1.0 / float(np.mean(estimates)),
        inverse_estimates=estimates,
        diagnostics=diags,
        fallback_trials=fallback,
        flags=flags,
    )
