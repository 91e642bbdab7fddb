"""Sample containers, norms and the per-sample preprocessing transforms.

A data set is stored as an ``(N, n)`` array of row-major vectorized samples
together with the sample shape, either ``(n,)`` for flat vectors or
``(m1, m2)`` for image patches.  Sample ids are the 0-based row indices.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy import fft


@dataclass(frozen=True)
class DataSet:
    values: np.ndarray
    shape: tuple = field(default=())

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] < 1:
            raise ValueError("a DataSet needs at least one sample")
        shape = tuple(int(s) for s in self.shape) or (values.shape[1],)
        if int(np.prod(shape)) != values.shape[1]:
            raise ValueError(f"sample shape {shape} does not match vector length {values.shape[1]}")
        if not np.all(np.isfinite(values)):
            raise ValueError("samples must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def from_samples(cls, samples) -> "DataSet":
        samples = [np.asarray(s, dtype=float) for s in samples]
        if not samples:
            raise ValueError("a DataSet needs at least one sample")
        shape = samples[0].shape
        if any(s.shape != shape for s in samples):
            raise ValueError("all samples must share one shape")
        return cls(np.stack([s.reshape(-1) for s in samples]), shape)

    def __len__(self):
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def is_patch(self) -> bool:
        return len(self.shape) == 2

    def sample(self, j: int) -> np.ndarray:
        return self.values[j].reshape(self.shape)

    def subset(self, indices) -> np.ndarray:
        return self.values[np.asarray(indices, dtype=int)]


def frobenius_norm(s) -> float:
    return float(np.sqrt(np.sum(np.square(np.asarray(s, dtype=float)))))


def spectral_norm(s) -> float:
    """Largest singular value; the Euclidean norm for flat samples."""
    s = np.asarray(s, dtype=float)
    if s.ndim < 2:
        return frobenius_norm(s)
    if s.size == 0:
        return 0.0
    return float(np.linalg.svd(s, compute_uv=False)[0])


def rank_r_approx(s, r: int) -> np.ndarray:
    """Best rank-``r`` approximation in Frobenius norm (truncated SVD)."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 2:
        raise ValueError("rank-r approximation needs a patch-shaped sample")
    if not 1 <= r <= min(s.shape):
        raise ValueError(f"rank {r} out of range 1..{min(s.shape)}")
    u, sv, vt = np.linalg.svd(s, full_matrices=False)
    return (u[:, :r] * sv[:r]) @ vt[:r]


def dct_coefficients(s) -> np.ndarray:
    return fft.dctn(np.asarray(s, dtype=float), type=2, norm="ortho")


def inverse_dct(c) -> np.ndarray:
    return fft.idctn(np.asarray(c, dtype=float), type=2, norm="ortho")


def dct_mterm_approx(s, M: int) -> np.ndarray:
    """Keep the ``M`` largest-magnitude orthonormal DCT-II coefficients.

    Ties in magnitude are resolved by the row-major coefficient index, so
    the selection is deterministic.
    """
    s = np.asarray(s, dtype=float)
    if not 1 <= M <= s.size:
        raise ValueError(f"M = {M} out of range 1..{s.size}")
    c = dct_coefficients(s)
    flat = c.reshape(-1)
    keep = np.argsort(-np.abs(flat), kind="stable")[:M]
    kept = np.zeros_like(flat)
    kept[keep] = flat[keep]
    return inverse_dct(kept.reshape(c.shape))


@dataclass(frozen=True)
class Preprocessor:
    """Per-sample transform applied before clustering.

    ``kind`` is one of ``identity``, ``rank_r``, ``dct_mterm`` or
    ``spectral_norm_feature``.  The last one maps every sample to the
    scalar spectral norm of its deviation from the data set centroid.
    """

    kind: str = "identity"
    param: int = 0

    def check(self, data: DataSet):
        if self.kind == "rank_r":
            if not data.is_patch:
                raise ValueError("rank_r preprocessing needs patch-shaped samples")
            if not 1 <= self.param <= min(data.shape):
                raise ValueError(f"rank {self.param} out of range for shape {data.shape}")
        elif self.kind == "dct_mterm":
            if not 1 <= self.param <= data.n:
                raise ValueError(f"M = {self.param} out of range 1..{data.n}")
        elif self.kind not in ("identity", "spectral_norm_feature"):
            raise ValueError(f"unknown preprocessor {self.kind!r}")

    def apply(self, data: DataSet) -> DataSet:
        self.check(data)
        if self.kind == "identity":
            return data
        if self.kind == "spectral_norm_feature":
            centroid = data.values.mean(axis=0).reshape(data.shape)
            feats = [spectral_norm(centroid - data.sample(j)) for j in range(data.N)]
            return DataSet(np.array(feats)[:, None], (1,))
        fn = rank_r_approx if self.kind == "rank_r" else dct_mterm_approx
        return DataSet.from_samples([fn(data.sample(j), self.param) for j in range(data.N)])


# CSV layout: a header line "# shape m1 m2 n" and one vectorized sample per
# row.  Flat samples are written with m1 = n and m2 = 1 and read back flat.

def save_csv(data: DataSet, path):
    m1, m2 = data.shape if data.is_patch else (data.n, 1)
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(f"# shape {m1} {m2} {data.n}\n")
        np.savetxt(fh, data.values, delimiter=",", fmt="%.17g")
    os.replace(tmp, path)


def load_csv(path) -> DataSet:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[:2] != ["#", "shape"]:
            raise ValueError(f"{path}: expected header '# shape m1 m2 n'")
        m1, m2, n = (int(h) for h in header[2:])
        if m1 * m2 != n:
            raise ValueError(f"{path}: inconsistent shape header {m1}x{m2} != {n}")
        values = np.loadtxt(fh, delimiter=",", ndmin=2)
    if values.shape[1] != n:
        raise ValueError(f"{path}: rows have {values.shape[1]} entries, header says {n}")
    shape = (n,) if m2 == 1 else (m1, m2)
    return DataSet(values, shape)
