"""Path containers and deterministic path transforms.

Two path flavours appear throughout: integer lattice walks with +-1 steps,
and real-valued paths sampled on a uniform time grid.  The transforms here
are the deterministic core everything else builds on: cyclic rotation at the
first minimum (Vervaat transform), increment reordering by starting height
(quantile transform), cyclic shift, time reversal with an endpoint offset,
and the exchange of the excursion straddling a given time.

Conventions, fixed once and used everywhere:

* lattice walks start at 0; the argmin of a walk ranges over indices 1..n
  (index 0 excluded), while the argmin of a sampled path ranges over the
  whole grid 0..N; ties resolve to the smallest index;
* sampled paths live on the uniform grid i * duration / N and are expected
  to start at 0; level crossings between grid points are assigned to the
  later grid point.

Split indices are plain ints.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "LatticeWalk",
    "SampledPath",
    "argmin_first",
    "vervaat_discrete",
    "vervaat_grid",
    "quantile_discrete",
    "shift_cyclic",
    "dual_reverse",
    "exchange_straddling",
    "first_return_time",
    "zero_set_indices",
    "embed_walk",
]


@dataclass(frozen=True)
class LatticeWalk:
    """A finite walk with steps in {+1, -1}, started at 0."""

    steps: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(s not in (1, -1) for s in self.steps):
            raise ValueError("walk steps must be +1 or -1")

    @property
    def n(self) -> int:
        return len(self.steps)

    @cached_property
    def values(self) -> tuple[int, ...]:
        out = [0]
        for s in self.steps:
            out.append(out[-1] + s)
        return tuple(out)

    @property
    def endpoint(self) -> int:
        return sum(self.steps)

    def to_string(self) -> str:
        return "".join("+" if s == 1 else "-" for s in self.steps)

    @classmethod
    def from_string(cls, text: str) -> "LatticeWalk":
        bad = set(text) - {"+", "-"}
        if bad:
            raise ValueError(f"walk string may contain only '+'/'-', got {bad!r}")
        return cls(tuple(1 if c == "+" else -1 for c in text))


@dataclass(frozen=True)
class SampledPath:
    """A real-valued path on the uniform grid i * duration / n_steps."""

    duration: float
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("values must be a 1-d array with at least 2 points")
        if not (self.duration > 0):
            raise ValueError("duration must be positive")

    @property
    def n_steps(self) -> int:
        return self.values.size - 1

    @cached_property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * (self.duration / self.n_steps)

    def value_at(self, t: float) -> float:
        """Linear interpolation between grid points."""
        return float(np.interp(t, self.times, self.values))

    def write_csv(self, fileobj) -> None:
        fileobj.write("t,value\n")
        for t, v in zip(self.times, self.values):
            fileobj.write(f"{t:.17g},{v:.17g}\n")

    @classmethod
    def read_csv(cls, fileobj) -> "SampledPath":
        header = fileobj.readline().strip()
        if header != "t,value":
            raise ValueError(f"expected header 't,value', got {header!r}")
        ts, vs = [], []
        for line in fileobj:
            line = line.strip()
            if not line:
                break
            a, b = line.split(",")
            ts.append(float(a))
            vs.append(float(b))
        if len(ts) < 2:
            raise ValueError("path CSV needs at least 2 rows")
        return cls(duration=ts[-1], values=np.asarray(vs))


def argmin_first(path: "SampledPath | LatticeWalk") -> int:
    """Index of the first minimum.

    For a lattice walk the search runs over indices 1..n (a walk always
    starts at 0, and the rotation below excludes the starting point); for a
    sampled path it runs over the whole grid 0..N.
    """
    if isinstance(path, LatticeWalk):
        if path.n == 0:
            raise ValueError("empty walk has no argmin")
        vals = path.values
        best = 1
        for i in range(2, path.n + 1):
            if vals[i] < vals[best]:
                best = i
        return best
    return int(np.argmin(path.values))


def vervaat_discrete(walk: LatticeWalk) -> tuple[LatticeWalk, int]:
    """Rotate a walk at its first minimum over indices 1..n.

    Returns the rotated walk V and the helper index K = n - argmin.  The
    rotated step sequence is exactly steps[tau:] + steps[:tau], so the
    endpoint is preserved and V(j) >= 0 for j <= K while V(j) > V(n) for
    K < j < n (and at j = K too whenever the minimum was negative).
    """
    tau = argmin_first(walk)
    rotated = walk.steps[tau:] + walk.steps[:tau]
    return LatticeWalk(rotated), walk.n - tau


def vervaat_grid(path: SampledPath) -> SampledPath:
    """Grid version of the rotation at the minimum.

    tau is the first grid argmin over 0..N.  Ahead of the minimum the values
    are path[tau + i] - path[tau]; the wrapped part carries the endpoint
    offset, (path[j] - path[tau]) + path[N].  Inputs are expected to start
    at 0, which makes the two branches agree where they meet.
    """
    v = path.values
    tau = int(np.argmin(v))
    head = v[tau:] - v[tau]
    tail = (v[1 : tau + 1] - v[tau]) + v[-1]
    return SampledPath(path.duration, np.concatenate([head, tail]))


def quantile_discrete(walk: LatticeWalk) -> LatticeWalk:
    """Reorder the steps of a walk by their starting height.

    Step j (1-based) starts at height w(j-1); steps are stably sorted by the
    key (w(j-1), j) and their increments re-accumulated.  The result visits
    the same increments, so the endpoint is preserved.
    """
    vals = walk.values
    order = sorted(range(1, walk.n + 1), key=lambda j: (vals[j - 1], j))
    return LatticeWalk(tuple(walk.steps[j - 1] for j in order))


def shift_cyclic(path: SampledPath, u: float) -> SampledPath:
    """Cyclic shift by u in [0, 1] of the normalized time, snapped to grid.

    Output is f(u + t) - f(u) until the wrap, then the wrapped branch
    (f(u + t - 1) - f(u)) + f(1), which carries the endpoint offset so that
    shifting the rotated walk by K/n recovers the original walk exactly.
    """
    if not (0.0 <= u <= 1.0):
        raise ValueError("shift fraction u must lie in [0, 1]")
    v = path.values
    n = path.n_steps
    j = int(round(u * n))
    head = v[j:] - v[j]
    tail = (v[1 : j + 1] - v[j]) + v[-1]
    return SampledPath(path.duration, np.concatenate([head, tail]))


def dual_reverse(path: SampledPath, shift: float) -> SampledPath:
    """Time-reverse a path and add a constant shift to every value."""
    return SampledPath(path.duration, path.values[::-1] + shift)


def zero_set_indices(path: SampledPath) -> np.ndarray:
    """Grid indices treated as zeroes of the path.

    A grid point is a zero if its value is exactly 0, or if the sign changed
    since the previous grid point (the crossing is assigned to the later
    grid point).
    """
    v = path.values
    exact = v == 0.0
    crossed = np.zeros_like(exact)
    crossed[1:] = v[:-1] * v[1:] < 0.0
    return np.nonzero(exact | crossed)[0]


def exchange_straddling(path: SampledPath, u: float) -> SampledPath:
    """Swap the excursion straddling time u with the initial path segment.

    With G the last zero at or before u and D the first zero at or after u
    (D falls back to the final grid point if the path never returns to
    zero), the straddling stretch path[G..D] moves to the front and the
    initial stretch path[0..G] follows it; the rest is unchanged.  Splice
    points carry the exact zero of the incoming stretch start; detected
    sign-change zeroes make the splice resolution-limited by one grid cell.
    """
    if not (0.0 <= u <= path.duration):
        raise ValueError("u must lie within the path duration")
    v = path.values
    n = path.n_steps
    k = int(round(u / path.duration * n))
    zeros = zero_set_indices(path)
    if k in zeros:
        raise ValueError("degenerate straddle point: u sits on a detected zero")
    left = zeros[zeros < k]
    right = zeros[zeros > k]
    g = int(left[-1]) if left.size else 0
    d = int(right[0]) if right.size else n
    out = v.copy()
    out[: d - g] = v[g:d]
    out[d - g : d + 1] = v[: g + 1]
    return SampledPath(path.duration, out)


def first_return_time(path: SampledPath, level: float, after: float = 0.0) -> float | None:
    """First grid time beyond `after` at which the path touches or crosses level.

    Exact grid touches count; a strict sign change between consecutive grid
    points counts at the later grid point.  Returns None if no such time
    exists.
    """
    v = path.values
    d = v - level
    hit = d[1:] == 0.0
    crossed = d[:-1] * d[1:] < 0.0
    times = path.times[1:]
    ok = (hit | crossed) & (times > after)
    idx = np.nonzero(ok)[0]
    if idx.size == 0:
        return None
    return float(times[idx[0]])


def embed_walk(walk: LatticeWalk, duration: float | None = None, scale: float = 1.0) -> SampledPath:
    """Linear grid embedding of a walk: N = n cells over the given duration.

    Defaults to lattice time units (duration n, unscaled heights); pass
    duration=1.0, scale=n**-0.5 for the diffusive rescaling.
    """
    if duration is None:
        duration = float(walk.n)
    return SampledPath(duration, np.asarray(walk.values, dtype=float) * scale)
