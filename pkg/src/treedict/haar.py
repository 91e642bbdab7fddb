"""Classical 1-D orthonormal Haar transform, used as a correctness oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT1_2 = 1.0 / np.sqrt(2.0)


@dataclass
class HaarCoefficients:
    a00: float
    details: list  # details[j] has 2**j entries, j = 0..L-1

    @property
    def L(self) -> int:
        return len(self.details)

    @property
    def N(self) -> int:
        return 2**self.L

    def vector(self) -> np.ndarray:
        """(a00, d0, d1, ..., d_{L-1}) flattened."""
        return np.concatenate([[self.a00]] + [np.asarray(d) for d in self.details])


def _levels(n: int) -> int:
    L = int(n).bit_length() - 1
    if n < 1 or 2**L != n:
        raise ValueError(f"signal length {n} is not a power of two")
    return L


def haar_analysis(signal) -> HaarCoefficients:
    a = np.asarray(signal, dtype=float).reshape(-1)
    L = _levels(a.size)
    details = [None] * L
    for j in range(L - 1, -1, -1):
        even, odd = a[0::2], a[1::2]
        details[j] = (even - odd) * SQRT1_2
        a = (even + odd) * SQRT1_2
    return HaarCoefficients(float(a[0]), details)


def haar_reconstruction(coeffs: HaarCoefficients) -> np.ndarray:
    a = np.array([coeffs.a00], dtype=float)
    for j, d in enumerate(coeffs.details):
        d = np.asarray(d, dtype=float)
        if d.shape != (2**j,):
            raise ValueError(f"detail level {j} has shape {d.shape}, expected ({2**j},)")
        out = np.empty(2 * a.size)
        out[0::2] = (a + d) * SQRT1_2
        out[1::2] = (a - d) * SQRT1_2
        a = out
    return a


def haar_explicit(signal, colevel: int, k: int) -> tuple:
    """Approximation and detail at co-level ``colevel`` (level L - colevel) by direct sums.

    Returns ``(a, d)``; ``d`` is ``None`` at co-level 0 where no detail exists.
    """
    a = np.asarray(signal, dtype=float).reshape(-1)
    L = _levels(a.size)
    if not 0 <= colevel <= L:
        raise ValueError(f"co-level {colevel} out of range 0..{L}")
    if not 0 <= k < 2 ** (L - colevel):
        raise ValueError(f"k = {k} out of range at co-level {colevel}")
    w = 2**colevel
    scale = 2.0 ** (-colevel / 2)
    block = a[k * w:(k + 1) * w]
    approx = scale * block.sum()
    if colevel == 0:
        return float(approx), None
    half = w // 2
    detail = scale * (block[:half].sum() - block[half:].sum())
    return float(approx), float(detail)
