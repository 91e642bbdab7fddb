"""Orthogonal Matching Pursuit and the atom usage statistic."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .data import DataSet

UNIT_NORM_TOL = 1e-8
SINGULAR_TOL = 1e-10


@dataclass
class SparseColumn:
    support: list
    coefficients: np.ndarray
    residual_norm: float
    path: list = field(default_factory=list)  # residual norm after each selection
    singular: bool = False


@dataclass
class SparseCode:
    supports: list
    coefficients: list
    residual_norms: np.ndarray
    S: int
    K: int
    errors: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.supports)

    def to_dense(self) -> np.ndarray:
        X = np.zeros((self.K, self.N))
        for j, (sup, coef) in enumerate(zip(self.supports, self.coefficients)):
            X[list(sup), j] = coef
        return X

    def triplets(self):
        for j, (sup, coef) in enumerate(zip(self.supports, self.coefficients)):
            for k, c in zip(sup, coef):
                yield j, int(k), float(c)

    def save_csv(self, path):
        tmp = f"{path}.tmp"
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["column", "atom", "coefficient"])
            for j, k, c in self.triplets():
                w.writerow([j, k, repr(c)])
        os.replace(tmp, path)

    @classmethod
    def load_csv(cls, path, K: int, N: int | None = None, S: int = 0) -> "SparseCode":
        cols = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                cols.setdefault(int(row["column"]), []).append((int(row["atom"]), float(row["coefficient"])))
        if N is None:
            N = max(cols) + 1 if cols else 0
        supports = [[k for k, _ in cols.get(j, [])] for j in range(N)]
        coefs = [np.array([c for _, c in cols.get(j, [])]) for j in range(N)]
        S = S or max((len(s) for s in supports), default=0)
        return cls(supports, coefs, np.full(N, np.nan), S, K)


def check_atoms(D: np.ndarray):
    norms = np.linalg.norm(D, axis=0)
    bad = np.flatnonzero(np.abs(norms - 1) > UNIT_NORM_TOL)
    if bad.size:
        raise ValueError(f"dictionary atoms {bad.tolist()} are not unit norm")


def _as_matrix(dictionary) -> np.ndarray:
    return dictionary.matrix if hasattr(dictionary, "matrix") else np.asarray(dictionary, dtype=float)


def omp_encode(y, dictionary, S: int, tol: float | None = None, check: bool = True) -> SparseColumn:
    """Greedy OMP on one sample.

    Each step picks the atom with the largest absolute correlation with the
    residual (lowest index on ties) and refits all active coefficients by
    least squares, maintained through an incremental QR factorization.
    Stops after ``S`` atoms or once the residual norm drops to ``tol``
    (default ``1e-9 * ||y||``).
    """
    D = _as_matrix(dictionary)
    if S < 1:
        raise ValueError("sparsity S must be >= 1")
    if D.ndim != 2 or D.shape[1] == 0:
        raise ValueError("empty dictionary")
    if check:
        check_atoms(D)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape != (D.shape[0],):
        raise ValueError(f"sample has length {y.size}, atoms {D.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise ValueError("sample has non-finite entries")
    ynorm = float(np.linalg.norm(y))
    if tol is None:
        tol = 1e-9 * ynorm
    n, K = D.shape
    Q = np.zeros((n, min(S, K, n)))
    R = np.zeros((Q.shape[1], Q.shape[1]))
    qty = np.zeros(Q.shape[1])
    support = []
    active = np.zeros(K, dtype=bool)
    residual = y.copy()
    rnorm = ynorm
    path = []
    singular = False
    while len(support) < Q.shape[1] and rnorm > tol:
        corr = np.abs(D.T @ residual)
        corr[active] = -1.0
        k = int(np.argmax(corr))
        m = len(support)
        d = D[:, k]
        # two passes of Gram-Schmidt keep Q orthonormal to round-off
        r = Q[:, :m].T @ d
        w = d - Q[:, :m] @ r
        r2 = Q[:, :m].T @ w
        w -= Q[:, :m] @ r2
        r += r2
        wn = float(np.linalg.norm(w))
        if wn <= SINGULAR_TOL:
            singular = True
            break
        Q[:, m] = w / wn
        R[:m, m] = r
        R[m, m] = wn
        qty[m] = Q[:, m] @ y
        support.append(k)
        active[k] = True
        residual = y - Q[:, :m + 1] @ qty[:m + 1]
        rnorm = float(np.linalg.norm(residual))
        path.append(rnorm)
    m = len(support)
    coef = _back_substitute(R[:m, :m], qty[:m]) if m else np.zeros(0)
    return SparseColumn(support, coef, rnorm, path, singular)


def _back_substitute(R, b):
    x = np.zeros_like(b)
    for i in range(len(b) - 1, -1, -1):
        x[i] = (b[i] - R[i, i + 1:] @ x[i + 1:]) / R[i, i]
    return x


def encode_all(data, dictionary, S: int, tol: float | None = None) -> SparseCode:
    """Column-wise OMP; a failing column is recorded in ``errors`` and left empty."""
    D = _as_matrix(dictionary)
    if S < 1:
        raise ValueError("sparsity S must be >= 1")
    check_atoms(D)
    Y = data.values if isinstance(data, DataSet) else np.atleast_2d(np.asarray(data, dtype=float))
    if Y.shape[1] != D.shape[0]:
        raise ValueError(f"samples have length {Y.shape[1]}, atoms {D.shape[0]}")
    supports, coefs, res, errors = [], [], [], {}
    for j, y in enumerate(Y):
        try:
            col = omp_encode(y, D, S, tol, check=False)
        except (ValueError, np.linalg.LinAlgError) as exc:
            errors[j] = str(exc)
            col = SparseColumn([], np.zeros(0), float(np.linalg.norm(y)))
        supports.append(col.support)
        coefs.append(col.coefficients)
        res.append(col.residual_norm)
    return SparseCode(supports, coefs, np.array(res), S, D.shape[1], errors)


def reconstruct(code: SparseCode, dictionary) -> np.ndarray:
    """``(N, n)`` array of the encoded samples ``D @ X``, one per row."""
    return (_as_matrix(dictionary) @ code.to_dense()).T


@dataclass
class UsageStats:
    eta: np.ndarray
    levels: np.ndarray
    orders: np.ndarray

    def rows(self):
        for o, lvl, e in zip(self.orders, self.levels, self.eta):
            yield int(o), int(lvl), float(e)

    def save_csv(self, path):
        tmp = f"{path}.tmp"
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["order", "level", "eta"])
            for o, lvl, e in self.rows():
                w.writerow([o, lvl, repr(e)])
        os.replace(tmp, path)


def usage_stats(code, dictionary=None) -> UsageStats:
    """eta_k = sum over columns of |X_kj|; accepts a SparseCode or a dense X."""
    X = code.to_dense() if isinstance(code, SparseCode) else np.asarray(code, dtype=float)
    # correctly rounded sums: exact regardless of column order
    eta = np.array([math.fsum(row) for row in np.abs(X)]).reshape(-1)
    if dictionary is not None and hasattr(dictionary, "atoms"):
        levels = np.array([a.level for a in dictionary.atoms])
        orders = np.array([a.order for a in dictionary.atoms])
    else:
        levels = np.zeros(len(eta), dtype=int)
        orders = np.arange(len(eta))
    return UsageStats(eta, levels, orders)
