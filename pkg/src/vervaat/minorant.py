"""Convex minorant of a sampled path or lattice walk.

The minorant of a grid path is the lower convex hull of its grid points,
computed by one monotone scan.  Slope comparisons use the cross-product
form on grid indices, so for integer-valued walks every comparison is
exact integer arithmetic and for float paths no division is involved;
collinear points merge into one segment (exact equality test, a
measure-zero event for continuous samples but routine for walks).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paths import LatticeWalk, SampledPath

__all__ = [
    "MinorantResult",
    "convex_minorant",
    "last_segment_slope",
    "last_segment_slope_block",
    "segment_count_block",
    "segment_count_stats",
    "SegmentCountStats",
]


@dataclass(frozen=True)
class MinorantResult:
    vertex_indices: np.ndarray   # increasing, first 0, last N
    slopes: np.ndarray           # strictly increasing, one per segment

    @property
    def n_segments(self) -> int:
        return len(self.slopes)

    def values_at_vertices(self, path: SampledPath) -> np.ndarray:
        return path.values[self.vertex_indices]


def hull_indices(values) -> list:
    """Indices of the lower convex hull of (i, values[i]); amortized O(N).

    Works on any sequence with uniform index spacing.  Keeps index k between
    j and i only if slope(j,k) < slope(k,i) strictly, so collinear interior
    points are dropped.
    """
    stack: list = []
    for i, v in enumerate(values):
        while len(stack) >= 2:
            j, vj = stack[-2]
            k, vk = stack[-1]
            # pop k when slope(j,k) >= slope(k,i), cross-multiplied
            if (vk - vj) * (i - k) >= (v - vk) * (k - j):
                stack.pop()
            else:
                break
        stack.append((i, v))
    return [i for i, _ in stack]


def convex_minorant(path: "SampledPath | LatticeWalk") -> MinorantResult:
    if isinstance(path, LatticeWalk):
        vals = list(path.values)
        h = 1.0
    else:
        vals = path.values.tolist()
        h = path.duration / path.n_steps
    idx = hull_indices(vals)
    vertices = np.asarray(idx, dtype=np.int64)
    vv = np.asarray([vals[i] for i in idx], dtype=float)
    slopes = np.diff(vv) / (np.diff(vertices) * h)
    return MinorantResult(vertex_indices=vertices, slopes=slopes)


def last_segment_slope(path: "SampledPath | LatticeWalk") -> float:
    return float(convex_minorant(path).slopes[-1])


def last_segment_slope_block(values: np.ndarray, duration: float) -> np.ndarray:
    """Final minorant slope for each row, without building the hulls.

    The last segment's line supports the path from below and passes through
    the final point, so its slope is the largest back-looking chord slope
    max_j (v_N - v_j) / (t_N - t_j).
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[1] - 1
    times = np.arange(n) * (duration / n)
    chords = (values[:, -1:] - values[:, :-1]) / (duration - times)[None, :]
    return chords.max(axis=1)


def segment_count_block(values: np.ndarray, duration: float) -> np.ndarray:
    counts = np.empty(values.shape[0], dtype=np.int64)
    for r in range(values.shape[0]):
        counts[r] = len(hull_indices(values[r].tolist())) - 1
    return counts


@dataclass(frozen=True)
class SegmentCountStats:
    histogram: dict
    mean: float
    se: float
    n: int


def segment_count_stats(paths) -> SegmentCountStats:
    """Histogram, mean, and standard error of per-path segment counts."""
    counts = np.asarray([convex_minorant(p).n_segments for p in paths], dtype=float)
    if counts.size == 0:
        raise ValueError("segment_count_stats needs a nonempty ensemble")
    uniq, freq = np.unique(counts.astype(np.int64), return_counts=True)
    mean = float(counts.mean())
    se = float(counts.std(ddof=1) / np.sqrt(counts.size)) if counts.size > 1 else 0.0
    return SegmentCountStats(histogram={int(u): int(f) for u, f in zip(uniq, freq)},
                             mean=mean, se=se, n=int(counts.size))
