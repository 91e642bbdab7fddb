"""Two-way splitters used to branch a node of the partition tree.

Every splitter takes the data set and an index set and returns a
:class:`SplitResult` whose ``objective`` is the value fed to the branching
threshold.  For 2-means, the exhaustive oracle and the spectral splitter it
is the within-cluster sum of squares (WCSS); for 2-maxoids it is the sum of
squared distances to the assigned maxoid; for the 1-D feature splitter it is
the 1-D 2-means objective on the sorted features.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .data import DataSet

KINDS = ("two_means", "two_maxoids", "one_d_feature", "spectral", "halving")
SPECTRAL_MAX_POINTS = 2000
ORACLE_MAX_POINTS = 20


class ClusteringError(RuntimeError):
    pass


@dataclass(frozen=True)
class ClusteringMethod:
    kind: str = "two_means"
    lloyd_iters: int = 100
    rng_seed: int = 0
    restarts: int = 0
    spectral_sigma: Optional[float] = None  # None: median pairwise distance

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown clustering kind {self.kind!r}")
        if self.lloyd_iters < 1:
            raise ValueError("lloyd_iters must be >= 1")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")
        if self.spectral_sigma is not None and self.spectral_sigma <= 0:
            raise ValueError("spectral_sigma must be positive")


@dataclass
class SplitResult:
    left: np.ndarray
    right: np.ndarray
    objective: float
    hints: Optional[tuple] = None
    trace: list = field(default_factory=list)


def _indices(indices) -> np.ndarray:
    idx = np.asarray(indices, dtype=int).reshape(-1)
    if idx.size < 2:
        raise ValueError("a split needs at least 2 indices")
    if np.unique(idx).size != idx.size:
        raise ValueError("duplicate indices")
    return idx


def _wcss(X: np.ndarray) -> float:
    if len(X) == 0:
        return 0.0
    return float(np.sum(np.square(X - X.mean(axis=0))))


def split_wcss(data: DataSet, left, right) -> float:
    return _wcss(data.subset(left)) + _wcss(data.subset(right))


def _orient(idx, mask):
    """Return (left, right) with the lowest index always on the left."""
    a, b = idx[mask], idx[~mask]
    if b.size and (a.size == 0 or b.min() < a.min()):
        a, b = b, a
    return np.sort(a), np.sort(b)


def _sqdist(X, c):
    return np.sum(np.square(X - c), axis=1)


def _lloyd(X, seeds, iters):
    """Lloyd iterations from two seed centroids; returns (mask, wcss, trace).

    ``mask`` marks members of the second cluster.  Ties go to the first.
    Intermediate trace values use the identity sum ||x||^2 - sum m_c ||c||^2;
    the last entry is recomputed directly from the final partition.
    """
    c0, c1 = np.array(seeds[0], dtype=float), np.array(seeds[1], dtype=float)
    sqtotal = float(np.einsum("ij,ij->", X, X))
    mask = None
    trace = []
    for _ in range(iters):
        # ||x - c1||^2 < ||x - c0||^2  <=>  x.(c1 - c0) > (||c1||^2 - ||c0||^2) / 2,
        # one matrix-vector product instead of two (N, n) temporaries
        new = X @ (c1 - c0) > 0.5 * (c1 @ c1 - c0 @ c0)
        if not new.any():
            new[int(np.argmax(_sqdist(X, c0)))] = True
        elif new.all():
            new[int(np.argmax(_sqdist(X, c1)))] = False
        if mask is not None and np.array_equal(new, mask):
            break
        mask = new
        w = mask.astype(float)
        m1 = float(w.sum())
        m0 = len(X) - m1
        c0, c1 = ((1.0 - w) @ X) / m0, (w @ X) / m1
        trace.append(sqtotal - m0 * float(c0 @ c0) - m1 * float(c1 @ c1))
    trace[-1] = _wcss(X[~mask]) + _wcss(X[mask])
    return mask, trace[-1], trace


def split_2means(data: DataSet, indices, cfg: ClusteringMethod = ClusteringMethod()) -> SplitResult:
    """2-means by Lloyd's algorithm with deterministic farthest-pair seeding.

    The first seed is the sample farthest from the node centroid, the second
    the sample farthest from the first.  ``cfg.restarts`` extra runs from
    random seed pairs (drawn with ``cfg.rng_seed``) may replace the result
    when they reach a strictly lower WCSS.
    """
    idx = _indices(indices)
    X = data.subset(idx)
    first = int(np.argmax(_sqdist(X, X.mean(axis=0))))
    second = int(np.argmax(_sqdist(X, X[first])))
    mask, obj, trace = _lloyd(X, (X[first], X[second]), cfg.lloyd_iters)
    if cfg.restarts:
        rng = np.random.default_rng(cfg.rng_seed)
        for _ in range(cfg.restarts):
            a, b = rng.choice(len(X), size=2, replace=False)
            m, o, t = _lloyd(X, (X[a], X[b]), cfg.lloyd_iters)
            if o < obj:
                mask, obj, trace = m, o, t
    left, right = _orient(idx, mask)
    return SplitResult(left, right, obj, trace=trace)


def split_2maxoids(data: DataSet, indices, cfg: ClusteringMethod = ClusteringMethod()) -> SplitResult:
    """2-maxoids (Bauckhage & Sifa's k-maxoids with k = 2).

    Alternates nearest-maxoid assignment with the maxoid update that picks,
    inside each cluster, the member farthest from the other maxoid.  The
    returned hints are the two maxoids, in (left, right) order.
    """
    idx = _indices(indices)
    X = data.subset(idx)
    m = [int(np.argmax(_sqdist(X, X.mean(axis=0))))]
    m.append(int(np.argmax(_sqdist(X, X[m[0]]))))
    if m[0] == m[1]:
        m[1] = (m[0] + 1) % len(X)
    mask = None
    trace = []
    for _ in range(cfg.lloyd_iters):
        d0, d1 = _sqdist(X, X[m[0]]), _sqdist(X, X[m[1]])
        mask = d1 < d0
        mask[m[0]], mask[m[1]] = False, True
        trace.append(float(np.sum(np.where(mask, d1, d0))))
        new = [
            int(np.flatnonzero(~mask)[np.argmax(d1[~mask])]),
            int(np.flatnonzero(mask)[np.argmax(d0[mask])]),
        ]
        if new == m:
            break
        m = new
    d0, d1 = _sqdist(X, X[m[0]]), _sqdist(X, X[m[1]])
    mask = d1 < d0
    mask[m[0]], mask[m[1]] = False, True
    obj = float(np.sum(np.where(mask, d1, d0)))
    hints = (X[m[0]].reshape(data.shape), X[m[1]].reshape(data.shape))
    left, right = _orient(idx, mask)
    if left.min() != idx[~mask].min():
        hints = hints[::-1]
    return SplitResult(left, right, obj, hints=hints, trace=trace)


def optimal_1d_split(values) -> tuple[int, float]:
    """Exact 2-means on sorted scalars: the prefix length minimizing total SSE.

    Returns ``(mu, objective)``; ties pick the smallest ``mu``.
    """
    s = np.asarray(values, dtype=float)
    N = s.size
    if N < 2:
        raise ValueError("need at least 2 values")
    s = s - s.mean()
    mu = np.arange(1, N)
    c1, c2 = np.cumsum(s)[:-1], np.cumsum(s * s)[:-1]
    t1, t2 = s.sum() - c1, np.sum(s * s) - c2
    obj = np.maximum(c2 - c1**2 / mu + t2 - t1**2 / (N - mu), 0.0)
    # round-off can split exact ties; treat near-equal values as ties
    best = obj.min()
    i = int(np.flatnonzero(obj <= best + 1e-12 * max(np.sum(s * s), 1e-300))[0])
    return i + 1, float(obj[i])


def feature_values(data: DataSet, indices) -> np.ndarray:
    """Spectral norm of each sample's deviation from the node centroid."""
    idx = np.asarray(indices, dtype=int)
    X = data.subset(idx)
    dev = X.mean(axis=0) - X
    if not data.is_patch:
        return np.linalg.norm(dev, axis=1)
    return np.linalg.svd(dev.reshape((-1,) + data.shape), compute_uv=False)[:, 0]


def feature_order(data: DataSet, indices) -> np.ndarray:
    """Node indices sorted by ascending feature value, ties by index."""
    idx = np.asarray(indices, dtype=int)
    s = feature_values(data, idx)
    return idx[np.lexsort((idx, s))]


def split_1d_feature(data: DataSet, indices, cfg: ClusteringMethod = ClusteringMethod()) -> SplitResult:
    idx = _indices(indices)
    s = feature_values(data, idx)
    order = np.lexsort((idx, s))
    mu, obj = optimal_1d_split(s[order])
    # the prefix (small deviations) is the left child
    return SplitResult(np.sort(idx[order[:mu]]), np.sort(idx[order[mu:]]), obj)


def fiedler_vector(W: np.ndarray) -> np.ndarray:
    """Fiedler vector of the symmetric normalized Laplacian of ``W``."""
    deg = W.sum(axis=1)
    inv = np.zeros_like(deg)
    inv[deg > 0] = 1.0 / np.sqrt(deg[deg > 0])
    L = np.eye(len(W)) - inv[:, None] * W * inv[None, :]
    try:
        _, vecs = scipy.linalg.eigh(L, subset_by_index=[1, 1])
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ClusteringError(f"Fiedler eigenproblem did not converge: {exc}") from exc
    v = vecs[:, 0]
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return v


def split_spectral(data: DataSet, indices, cfg: ClusteringMethod = ClusteringMethod()) -> SplitResult:
    """Sign split of the Fiedler vector of a Gaussian similarity graph.

    Weights are ``exp(-d^2 / (2 sigma^2))`` on the complete graph without
    self loops; ``sigma`` defaults to the median pairwise distance.
    """
    idx = _indices(indices)
    if idx.size > SPECTRAL_MAX_POINTS:
        raise ClusteringError(f"spectral split limited to {SPECTRAL_MAX_POINTS} points, got {idx.size}")
    X = data.subset(idx)
    sq = np.sum(X * X, axis=1)
    D2 = np.maximum(sq[:, None] + sq[None, :] - 2 * X @ X.T, 0.0)
    np.fill_diagonal(D2, 0.0)
    sigma = cfg.spectral_sigma
    if sigma is None:
        sigma = float(np.median(np.sqrt(D2[np.triu_indices(len(X), 1)])))
        if sigma == 0:
            sigma = 1.0
    W = np.exp(-D2 / (2 * sigma**2))
    np.fill_diagonal(W, 0.0)
    v = fiedler_vector(W)
    mask = v < 0
    if mask.all() or not mask.any():
        mask[int(np.argmin(np.abs(v)))] = not mask[0]
    left, right = _orient(idx, mask)
    return SplitResult(left, right, split_wcss(data, left, right))


def split_halving(data: DataSet, indices, cfg: ClusteringMethod = ClusteringMethod()) -> SplitResult:
    """Split the sorted index set into two equal halves (first half left).

    Only meant for the classical-Haar equivalence checks.
    """
    idx = np.sort(_indices(indices))
    h = (idx.size + 1) // 2
    left, right = idx[:h], idx[h:]
    return SplitResult(left, right, split_wcss(data, left, right))


def exhaustive_2means_oracle(data: DataSet, indices) -> SplitResult:
    """Global WCSS minimizer over all bipartitions (test oracle, <= 20 points)."""
    idx = np.sort(_indices(indices))
    if idx.size > ORACLE_MAX_POINTS:
        raise ValueError(f"oracle limited to {ORACLE_MAX_POINTS} points")
    X = data.subset(idx)
    m = idx.size
    best, best_left = np.inf, None
    rest = range(1, m)
    # the lowest index always sits on the left; lexicographic enumeration
    # order keeps the first minimum found
    candidates = []
    for r in range(0, m - 1):
        for combo in itertools.combinations(rest, r):
            candidates.append((0,) + combo)
    candidates.sort()
    for left in candidates:
        mask = np.zeros(m, dtype=bool)
        mask[list(left)] = True
        obj = _wcss(X[mask]) + _wcss(X[~mask])
        if best_left is None or obj < best - 1e-12 * max(1.0, abs(best)):
            best, best_left = obj, mask
    return SplitResult(idx[best_left], idx[~best_left], float(best))


_SPLITTERS = {
    "two_means": split_2means,
    "two_maxoids": split_2maxoids,
    "one_d_feature": split_1d_feature,
    "spectral": split_spectral,
    "halving": split_halving,
}


def split(data: DataSet, indices, cfg: ClusteringMethod) -> SplitResult:
    return _SPLITTERS[cfg.kind](data, indices, cfg)
