"""Residual vector quantization of feature frames with k-means codebooks.

Frames are standardized per dimension, then each level runs k-means on the
residual left by the levels before it. Encoding is greedy (nearest centroid
per level, lowest index on ties) followed by a fixed-point pass through the
decoder so that re-encoding decoded frames is stable.

Binary codebook layout (all little-endian)::

    offset  size       field
    0       4          magic b"RVQC"
    4       2          format version (uint16, currently 1)
    6       2          reserved, zero
    8       4          dim D (uint32)
    12      4          codebook size K (uint32)
    16      4          number of levels L (uint32)
    20      4          reserved, zero
    24      8          train seed (int64)
    32      8*D        per-dimension mean (float64)
    32+8D   8*D        per-dimension std (float64)
    32+16D  8*L*K*D    centroids, level-major then centroid then dimension
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from swarakit import kernels
from swarakit.errors import (
    DegenerateData,
    DimensionMismatch,
    EmptyCodes,
    IndexOutOfRange,
    TooFewFrames,
)

MAGIC = b"RVQC"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHIIIIq")

DEFAULT_LEVELS = 4
DEFAULT_K = 64
DEFAULT_MAX_ITERS = 100
SHIFT_TOL = 1e-6
# fixed reduction block; independent of the worker count so sums are reproducible
CHUNK = 2048


@dataclass(frozen=True, eq=False)
class RvqCodebook:
    levels: np.ndarray  # (L, K, D)
    mean: np.ndarray  # (D,)
    std: np.ndarray  # (D,)
    train_seed: int = 0

    def __post_init__(self):
        if self.levels.ndim != 3 or self.levels.shape[0] < 1:
            raise ValueError("levels must have shape (n_levels, K, D) with n_levels >= 1")
        if self.mean.shape != (self.dim,) or self.std.shape != (self.dim,):
            raise ValueError("normalization stats must have shape (D,)")
        if not (np.all(np.isfinite(self.levels)) and np.all(np.isfinite(self.mean)) and np.all(self.std > 0)):
            raise ValueError("codebook contains non-finite values or non-positive std")

    @property
    def n_levels(self) -> int:
        return self.levels.shape[0]

    @property
    def codebook_size(self) -> int:
        return self.levels.shape[1]

    @property
    def dim(self) -> int:
        return self.levels.shape[2]

    def standardize(self, frames: np.ndarray) -> np.ndarray:
        return (frames - self.mean) / self.std

    def destandardize(self, z: np.ndarray) -> np.ndarray:
        return z * self.std + self.mean

    def equals(self, other: "RvqCodebook") -> bool:
        """Bit-for-bit equality."""
        return (
            self.train_seed == other.train_seed
            and self.levels.shape == other.levels.shape
            and self.levels.tobytes() == other.levels.tobytes()
            and self.mean.tobytes() == other.mean.tobytes()
            and self.std.tobytes() == other.std.tobytes()
        )


@dataclass(frozen=True, eq=False)
class CodeSequence:
    codes: np.ndarray  # (n_frames, n_levels) int64

    @property
    def n_frames(self) -> int:
        return self.codes.shape[0]

    @property
    def n_levels(self) -> int:
        return self.codes.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CodeSequence):
            return NotImplemented
        return self.codes.shape == other.codes.shape and bool(np.array_equal(self.codes, other.codes))


@dataclass(frozen=True)
class LevelStats:
    histogram: np.ndarray
    perplexity: float
    dead_codes: int


# --------------------------------------------------------------------------
# training

def _as_frames(frames) -> np.ndarray:
    x = np.ascontiguousarray(frames, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"frames must be a 2-D matrix, got shape {x.shape}")
    return x


def _assign(x: np.ndarray, centroids: np.ndarray, pool: ThreadPoolExecutor | None) -> tuple[np.ndarray, np.ndarray]:
    starts = range(0, x.shape[0], CHUNK)
    if pool is None:
        parts = [kernels.nearest_centroid(x[s:s + CHUNK], centroids) for s in starts]
    else:
        parts = list(pool.map(lambda s: kernels.nearest_centroid(x[s:s + CHUNK], centroids), starts))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _cluster_sums(x: np.ndarray, idx: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    sums = np.zeros((k, x.shape[1]))
    counts = np.zeros(k, dtype=np.int64)
    for s in range(0, x.shape[0], CHUNK):
        part = np.zeros((k, x.shape[1]))
        np.add.at(part, idx[s:s + CHUNK], x[s:s + CHUNK])
        sums += part
        counts += np.bincount(idx[s:s + CHUNK], minlength=k)
    return sums, counts


def _kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = kernels.nearest_centroid(x, x[chosen[-1]][None, :])[1]
    for _ in range(1, k):
        total = d2.sum()
        if total > 0.0:
            nxt = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            nxt = min(nxt, n - 1)
        else:
            # every point coincides with a chosen centroid: duplicate the first
            nxt = chosen[0]
        chosen.append(nxt)
        d2 = np.minimum(d2, kernels.nearest_centroid(x, x[nxt][None, :])[1])
    return x[chosen].copy()


def kmeans(x: np.ndarray, k: int, seed: int, max_iters: int = DEFAULT_MAX_ITERS,
           pool: ThreadPoolExecutor | None = None) -> np.ndarray:
    """Lloyd's algorithm from a k-means++ start. Returns the (k, D) centroids."""
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp(x, k, rng)
    for _ in range(max_iters):
        idx, dist = _assign(x, centroids, pool)
        sums, counts = _cluster_sums(x, idx, k)
        new = centroids.copy()
        live = counts > 0
        new[live] = sums[live] / counts[live, None]
        empty = np.flatnonzero(~live)
        if empty.size:
            # farthest points first; stable sort keeps the lowest index on ties
            order = np.argsort(-dist, kind="stable")
            new[empty] = x[order[: empty.size]]
        shift = np.sqrt(np.max(np.sum((new - centroids) ** 2, axis=1)))
        centroids = new
        if shift < SHIFT_TOL:
            break
    return centroids


def _mean_sq(dist: np.ndarray) -> float:
    return float(np.sum(dist)) / dist.shape[0]


def _pin_residual_mean(resid: np.ndarray, centroids: np.ndarray, prev_err: float,
                       pool: ThreadPoolExecutor | None) -> np.ndarray:
    """Make sure this level cannot increase the mean squared residual.

    The Lloyd codebook is kept when it already does no worse than leaving the
    residual alone. Otherwise the centroid nearest the residual mean is
    replaced by that mean, and failing that (rounding) by the zero vector,
    which reproduces the previous error exactly.
    """
    if _mean_sq(_assign(resid, centroids, pool)[1]) <= prev_err:
        return centroids
    mu = resid.mean(axis=0)
    slot = int(kernels.nearest_centroid(mu[None, :], centroids)[0][0])
    pinned = centroids.copy()
    pinned[slot] = mu
    if _mean_sq(_assign(resid, pinned, pool)[1]) <= prev_err:
        return pinned
    pinned[slot] = 0.0
    return pinned


def _norm_stats(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)
    return mean, std


def train_rvq(frames, n_levels: int = DEFAULT_LEVELS, codebook_size: int = DEFAULT_K,
              max_iters: int = DEFAULT_MAX_ITERS, seed: int = 0, jobs: int = 1) -> RvqCodebook:
    """Fit an RVQ codebook. Level l uses k-means++ seeded with ``seed + l``.

    ``jobs`` only spreads the assignment step over threads; results are
    bit-identical for any value.
    """
    x = _as_frames(frames)
    n = x.shape[0]
    if n_levels < 1 or max_iters < 1 or codebook_size < 1:
        raise ValueError("n_levels, codebook_size and max_iters must all be >= 1")
    if n < codebook_size:
        raise TooFewFrames(f"need at least K={codebook_size} frames, got {n}")
    if not np.all(np.isfinite(x)):
        raise DegenerateData("frames contain NaN or infinite values")

    mean, std = _norm_stats(x)
    resid = (x - mean) / std
    pool = ThreadPoolExecutor(jobs) if jobs > 1 else None
    try:
        # same arithmetic as the assignment kernel so the comparison is exact
        prev_err = _mean_sq(_assign(resid, np.zeros((1, x.shape[1])), pool)[1])
        books = []
        for level in range(n_levels):
            c = kmeans(resid, codebook_size, seed + level, max_iters, pool)
            c = _pin_residual_mean(resid, c, prev_err, pool)
            idx, dist = _assign(resid, c, pool)
            resid = resid - c[idx]
            prev_err = _mean_sq(dist)
            books.append(c)
    finally:
        if pool is not None:
            pool.shutdown()
    return RvqCodebook(np.stack(books), mean, std, int(seed))


# --------------------------------------------------------------------------
# encode / decode

def _greedy(z: np.ndarray, cb: RvqCodebook) -> np.ndarray:
    codes = np.empty((z.shape[0], cb.n_levels), dtype=np.int64)
    resid = z
    for level in range(cb.n_levels):
        idx, _ = kernels.nearest_centroid(resid, cb.levels[level])
        codes[:, level] = idx
        resid = resid - cb.levels[level][idx]
    return codes


def _frames_for(frames, cb: RvqCodebook) -> np.ndarray | None:
    x = np.asarray(frames, dtype=np.float64)
    if x.ndim == 2 and x.shape[1] == cb.dim:
        return x
    if x.size == 0 and x.ndim <= 2:
        return None
    raise DimensionMismatch(f"expected frames of dimension {cb.dim}, got shape {x.shape}")


def encode_greedy(frames, cb: RvqCodebook) -> CodeSequence:
    """Plain greedy RVQ: nearest centroid per level on successive residuals."""
    x = _frames_for(frames, cb)
    if x is None:
        return CodeSequence(np.zeros((0, cb.n_levels), dtype=np.int64))
    return CodeSequence(_greedy(cb.standardize(x), cb))


def _reencode(codes: np.ndarray, cb: RvqCodebook) -> np.ndarray:
    return _greedy(cb.standardize(_decode_rows(codes, cb, cb.n_levels)), cb)


def _cycle_min(start: np.ndarray, cb: RvqCodebook) -> np.ndarray:
    """Smallest tuple on the cycle that the re-encoding orbit of ``start`` enters."""
    seen: dict[tuple, int] = {}
    path: list[tuple] = []
    cur = start[None, :]
    key = tuple(cur[0].tolist())
    while key not in seen:
        seen[key] = len(path)
        path.append(key)
        cur = _reencode(cur, cb)
        key = tuple(cur[0].tolist())
    return np.array(min(path[seen[key]:]), dtype=np.int64)


def encode(frames, cb: RvqCodebook, fast_steps: int = 4) -> CodeSequence:
    """Greedy encoding made into a projection.

    Greedy RVQ alone is not idempotent: for a few frames the decoded vector
    greedily re-encodes to a different tuple, and the re-encoding map can
    even cycle. Each frame's greedy tuple is therefore followed through
    repeated decode/re-encode until the orbit repeats, and the smallest
    tuple (lexicographic) on that cycle is returned. Any tuple on the cycle
    leads back to the same answer, so ``encode(decode(encode(x))) ==
    encode(x)``. Almost every frame is a fixed point after at most one step;
    the first ``fast_steps`` steps run vectorized, the rest per frame.
    """
    x = _frames_for(frames, cb)
    if x is None:
        return CodeSequence(np.zeros((0, cb.n_levels), dtype=np.int64))
    codes = _greedy(cb.standardize(x), cb)
    active = np.arange(codes.shape[0])
    for _ in range(fast_steps):
        if active.size == 0:
            break
        sub = codes[active]
        again = _reencode(sub, cb)
        moved = np.any(again != sub, axis=1)
        codes[active[moved]] = again[moved]
        active = active[moved]
    for i in active:
        codes[i] = _cycle_min(codes[i], cb)
    return CodeSequence(codes)


def _check_codes(codes: CodeSequence, cb: RvqCodebook) -> np.ndarray:
    c = np.asarray(codes.codes)
    if c.ndim != 2 or c.shape[1] != cb.n_levels:
        raise DimensionMismatch(f"codes have shape {c.shape}; codebook has {cb.n_levels} levels")
    if c.size and (c.min() < 0 or c.max() >= cb.codebook_size):
        raise IndexOutOfRange(f"code indices must lie in [0, {cb.codebook_size}), got [{c.min()}, {c.max()}]")
    return c


def decode(codes: CodeSequence, cb: RvqCodebook, n_levels: int | None = None) -> np.ndarray:
    """Sum the selected centroids (first ``n_levels`` levels) and de-standardize."""
    c = _check_codes(codes, cb)
    use = cb.n_levels if n_levels is None else n_levels
    if not 0 <= use <= cb.n_levels:
        raise ValueError(f"n_levels must be in [0, {cb.n_levels}], got {use}")
    return _decode_rows(c, cb, use)


def _decode_rows(c: np.ndarray, cb: RvqCodebook, n_levels: int) -> np.ndarray:
    z = np.zeros((c.shape[0], cb.dim))
    for level in range(n_levels):
        z += cb.levels[level][c[:, level]]
    return cb.destandardize(z)


def residual_mse(frames, cb: RvqCodebook) -> list[float]:
    """Mean squared standardized residual per element after each level."""
    x = _as_frames(frames)
    if x.shape[1] != cb.dim:
        raise DimensionMismatch(f"expected frames of dimension {cb.dim}, got {x.shape[1]}")
    resid = cb.standardize(x)
    out = []
    for level in range(cb.n_levels):
        idx, dist = kernels.nearest_centroid(resid, cb.levels[level])
        resid = resid - cb.levels[level][idx]
        out.append(float(np.sum(dist)) / (x.shape[0] * cb.dim))
    return out


def codebook_stats(codes: CodeSequence, cb: RvqCodebook) -> list[LevelStats]:
    c = _check_codes(codes, cb)
    if c.shape[0] == 0:
        raise EmptyCodes("no codes to summarize")
    stats = []
    for level in range(cb.n_levels):
        hist = np.bincount(c[:, level], minlength=cb.codebook_size)
        p = hist[hist > 0] / c.shape[0]
        entropy = float(-np.sum(p * np.log(p)))
        stats.append(LevelStats(hist, float(np.exp(entropy)), int(np.count_nonzero(hist == 0))))
    return stats


# --------------------------------------------------------------------------
# persistence

def codebook_to_bytes(cb: RvqCodebook) -> bytes:
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, 0, cb.dim, cb.codebook_size, cb.n_levels, 0, cb.train_seed)
    body = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in (cb.mean, cb.std, cb.levels))
    return header + body


def codebook_from_bytes(data: bytes) -> RvqCodebook:
    if len(data) < _HEADER.size:
        raise ValueError("codebook file is truncated")
    magic, version, _, dim, k, n_levels, _, seed = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"not a codebook file (magic {magic!r})")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported codebook format version {version}")
    expected = _HEADER.size + 8 * (2 * dim + n_levels * k * dim)
    if len(data) != expected:
        raise ValueError(f"codebook file should be {expected} bytes, got {len(data)}")
    arr = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    mean, std = arr[:dim].copy(), arr[dim:2 * dim].copy()
    levels = arr[2 * dim:].reshape(n_levels, k, dim).copy()
    return RvqCodebook(levels, mean, std, int(seed))


def save_codebook(cb: RvqCodebook, path: str | Path) -> None:
    Path(path).write_bytes(codebook_to_bytes(cb))


def load_codebook(path: str | Path) -> RvqCodebook:
    return codebook_from_bytes(Path(path).read_bytes())
