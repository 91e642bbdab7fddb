"""Grayscale image I/O, patch extraction/reassembly, PSNR and atom mosaics.

Images are 2-D float arrays with intensities in [0, 1].
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .data import DataSet


class PGMError(ValueError):
    pass


def _tokens(buf: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    n = len(buf)
    while len(out) < count:
        while pos < n and buf[pos:pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos:pos + 1] == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PGMError("truncated PGM header")
        out.append(buf[start:pos])
    return out, pos


def decode_pgm(buf: bytes) -> tuple[np.ndarray, int]:
    """Decode P2/P5 bytes into ``(integer pixel array, maxval)``."""
    magic = buf[:2]
    if magic not in (b"P2", b"P5"):
        raise PGMError(f"not a P2/P5 PGM (magic {magic!r})")
    try:
        (w, h, maxval), pos = _tokens(buf, 3, 2)
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise PGMError(f"malformed PGM header: {exc}") from exc
    if width < 1 or height < 1 or not 0 < maxval <= 65535:
        raise PGMError(f"invalid PGM header values {width}x{height} maxval {maxval}")
    count = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        payload = buf[pos:pos + count * dtype.itemsize]
        if len(payload) < count * dtype.itemsize:
            raise PGMError("truncated PGM payload")
        pixels = np.frombuffer(payload, dtype=dtype).astype(np.int64)
    else:
        try:
            toks, _ = _tokens(buf, count, pos)
        except PGMError:
            raise PGMError("truncated PGM payload") from None
        try:
            pixels = np.array([int(t) for t in toks], dtype=np.int64)
        except ValueError as exc:
            raise PGMError(f"malformed PGM pixel value: {exc}") from exc
    if pixels.max(initial=0) > maxval:
        raise PGMError("pixel value exceeds maxval")
    return pixels.reshape(height, width), maxval


def load_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        pixels, maxval = decode_pgm(fh.read())
    return pixels / maxval


def encode_pgm(img, maxval: int = 255, plain: bool = False) -> bytes:
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError("expected a 2-D grayscale image")
    if not 0 < maxval <= 65535:
        raise ValueError("maxval must be in 1..65535")
    pixels = np.rint(np.clip(img, 0.0, 1.0) * maxval).astype(np.int64)
    h, w = pixels.shape
    if plain:
        rows = "\n".join(" ".join(str(v) for v in row) for row in pixels)
        return f"P2\n{w} {h}\n{maxval}\n{rows}\n".encode()
    dtype = ">u2" if maxval > 255 else "u1"
    return f"P5\n{w} {h}\n{maxval}\n".encode() + pixels.astype(dtype).tobytes()


def save_pgm(img, path, maxval: int = 255, plain: bool = False):
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(encode_pgm(img, maxval, plain))
    os.replace(tmp, path)


@dataclass(frozen=True)
class PatchGrid:
    patch_shape: tuple
    origins: tuple  # ((row, col), ...)
    overlap: bool

    def to_json(self) -> dict:
        return {"patch_shape": list(self.patch_shape), "origins": [list(o) for o in self.origins],
                "overlap": self.overlap}


def _check_patch(img, m1, m2):
    h, w = img.shape
    if m1 < 1 or m2 < 1 or m1 > h or m2 > w:
        raise ValueError(f"patch {m1}x{m2} does not fit a {h}x{w} image")


def extract_random_patches(img, m1: int, m2: int, count: int, seed: int = 0) -> DataSet:
    """Uniformly sampled (with replacement) overlapping patches.

    Origins are drawn with numpy's PCG64 generator seeded by ``seed``.
    """
    img = np.asarray(img, dtype=float)
    _check_patch(img, m1, m2)
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, img.shape[0] - m1 + 1, size=count)
    cols = rng.integers(0, img.shape[1] - m2 + 1, size=count)
    return DataSet(np.stack([img[r:r + m1, c:c + m2].reshape(-1) for r, c in zip(rows, cols)]), (m1, m2))


def _anchors(size, m):
    starts = list(range(0, size - m + 1, m))
    if starts[-1] + m < size:
        starts.append(size - m)
    return starts


def extract_grid_patches(img, m1: int, m2: int) -> tuple[DataSet, PatchGrid]:
    """Non-overlapping tiling; remainders are covered by border-anchored blocks."""
    img = np.asarray(img, dtype=float)
    _check_patch(img, m1, m2)
    rows, cols = _anchors(img.shape[0], m1), _anchors(img.shape[1], m2)
    origins = tuple((r, c) for r in rows for c in cols)
    values = np.stack([img[r:r + m1, c:c + m2].reshape(-1) for r, c in origins])
    overlap = img.shape[0] % m1 != 0 or img.shape[1] % m2 != 0
    return DataSet(values, (m1, m2)), PatchGrid((m1, m2), origins, overlap)


def reassemble(patches, grid: PatchGrid, height: int, width: int) -> np.ndarray:
    """Average the patch contributions per pixel and clamp to [0, 1]."""
    values = patches.values if isinstance(patches, DataSet) else np.asarray(patches, dtype=float)
    m1, m2 = grid.patch_shape
    if len(values) != len(grid.origins) or (len(values) and values.shape[1] != m1 * m2):
        raise ValueError("patch data does not match the grid")
    acc = np.zeros((height, width))
    cnt = np.zeros((height, width))
    for (r, c), v in zip(grid.origins, values):
        if r < 0 or c < 0 or r + m1 > height or c + m2 > width:
            raise ValueError(f"patch origin {(r, c)} outside a {height}x{width} image")
        acc[r:r + m1, c:c + m2] += v.reshape(m1, m2)
        cnt[r:r + m1, c:c + m2] += 1
    out = np.divide(acc, cnt, out=np.zeros_like(acc), where=cnt > 0)
    return np.clip(out, 0.0, 1.0)


def psnr(a, b) -> float:
    """PSNR in dB for peak 1.0; ``math.inf`` for identical images."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return math.inf
    return 10 * math.log10(1.0 / mse)


def atom_mosaic(dictionary, columns: int, order=None, separator: float = 1.0) -> np.ndarray:
    """Tile patch-shaped atoms, each rescaled to [0, 1], with 1-pixel separators.

    ``order`` lists atom indices to draw (e.g. sorted by descending usage);
    by default all atoms in dictionary order.  Constant atoms render as 0.5.
    """
    shape = tuple(dictionary.shape)
    if len(shape) != 2:
        raise ValueError("mosaics need patch-shaped atoms")
    if columns < 1:
        raise ValueError("columns must be >= 1")
    order = range(dictionary.K) if order is None else list(order)
    tiles = [dictionary.atoms[i].vector.reshape(shape) for i in order]
    m1, m2 = shape
    ncols = min(columns, max(len(tiles), 1))
    nrows = max(math.ceil(len(tiles) / ncols), 1)
    out = np.full((nrows * (m1 + 1) + 1, ncols * (m2 + 1) + 1), separator)
    for i, t in enumerate(tiles):
        lo, hi = t.min(), t.max()
        t = np.full(shape, 0.5) if hi == lo else (t - lo) / (hi - lo)
        r, c = divmod(i, ncols)
        out[1 + r * (m1 + 1):1 + r * (m1 + 1) + m1, 1 + c * (m2 + 1):1 + c * (m2 + 1) + m2] = t
    return out
