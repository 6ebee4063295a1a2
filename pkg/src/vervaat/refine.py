"""Conditional grid refinement for path functionals.

Samplers in this package are exact at their grid points, but functionals
like the running minimum, the argmin location, or a first-passage time
read off the polygon carry a sqrt(h) bias; for the first-return law that
bias lands exactly where the density blows up like t^(-1/2).  Between
neighbouring grid points the sampled processes are conditionally Brownian
bridges, so the interval minimum, the location of that minimum, and
boundary-crossing indicators all have closed conditional laws and can be
drawn exactly from auxiliary uniforms.  The estimators here consume a
block of sampled values plus those uniforms and emit refined functionals.
Samplers stay pure; nothing in this module draws randomness itself.

Conventions:

* value blocks have shape (reps, len(times)); times are increasing and
  start at 0; the uniform grid case passes duration and infers h;
* per-interval quantities have one column fewer than value blocks;
* levels and lines are compared with the path, not the other way round:
  "crossing" always means the path going weakly below;
* rows that never cross report nan, never a sentinel index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "interval_minima",
    "min_location_fraction",
    "RefinedMin",
    "refined_argmin",
    "first_passage_below",
    "FirstReturn",
    "refined_first_return",
    "rotate_block",
    "marginal_columns",
    "line_crossing_probability",
    "first_line_crossing",
    "origin_refined_times",
    "endpoint_refined_times",
]


def interval_minima(values: np.ndarray, duration: float, uniforms: np.ndarray) -> np.ndarray:
    """Exact conditional minimum of each grid interval of a Brownian-type block.

    Given endpoint values a, b of one interval of width h, the interval
    minimum m satisfies P(m <= x) = exp(-2(a-x)(b-x)/h) for x <= min(a,b),
    inverted here as m = (a + b - sqrt((a-b)^2 - 2h ln U)) / 2.
    """
    values = np.asarray(values, dtype=float)
    a = values[:, :-1]
    b = values[:, 1:]
    h = duration / a.shape[1]
    return 0.5 * (a + b - np.sqrt((a - b) ** 2 - 2.0 * h * np.log(uniforms)))


def min_location_fraction(a: np.ndarray, b: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Fraction of the interval elapsed at the minimum, given the minimum.

    The two branches around the minimum are independent first passages, so
    the elapsed fraction concentrates as (a-m)^2 / ((a-m)^2 + (b-m)^2).
    Degenerate flat intervals fall back to 1/2.
    """
    da = np.square(a - m)
    db = np.square(b - m)
    den = da + db
    with np.errstate(invalid="ignore"):
        theta = np.where(den > 0.0, da / np.where(den > 0.0, den, 1.0), 0.5)
    return theta


@dataclass(frozen=True)
class RefinedMin:
    index: np.ndarray       # interval holding the refined global minimum
    time: np.ndarray        # refined argmin time
    value: np.ndarray       # refined minimum value
    gap: np.ndarray         # grid minimum minus refined minimum, >= 0


def refined_argmin(values: np.ndarray, duration: float, minima: np.ndarray) -> RefinedMin:
    values = np.asarray(values, dtype=float)
    n_int = minima.shape[1]
    h = duration / n_int
    idx = np.argmin(minima, axis=1)
    rows = np.arange(values.shape[0])
    m_star = minima[rows, idx]
    a = values[rows, idx]
    b = values[rows, idx + 1]
    theta = min_location_fraction(a, b, m_star)
    time = (idx + theta) * h
    gap = values.min(axis=1) - m_star
    return RefinedMin(index=idx, time=time, value=m_star, gap=gap)


def first_passage_below(values: np.ndarray, duration: float, minima: np.ndarray,
                        levels: np.ndarray) -> np.ndarray:
    """Refined first time the path passes weakly below per-row levels.

    The interval containing the passage is the first one whose refined
    minimum reaches the level; within it the descent from the left value a
    to the minimum m takes the theta-fraction of the interval, and the
    level crossing splits that descent by first-passage scaling
    ((a - level)/(a - m))^2.
    """
    values = np.asarray(values, dtype=float)
    levels = np.asarray(levels, dtype=float)
    n_int = minima.shape[1]
    h = duration / n_int
    hit = minima <= levels[:, None]
    has = hit.any(axis=1)
    out = np.full(values.shape[0], np.nan)
    if not has.any():
        return out
    rows = np.flatnonzero(has)
    j = np.argmax(hit[rows], axis=1)
    a = values[rows, j]
    b = values[rows, j + 1]
    m = minima[rows, j]
    lev = levels[rows]
    theta = min_location_fraction(a, b, m)
    # a > level at the passage interval: an earlier interval would have hit first
    drop = a - m
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(drop > 0.0, (a - lev) / np.where(drop > 0.0, drop, 1.0), 0.0)
    out[rows] = (j + theta * np.square(frac)) * h
    return out


@dataclass(frozen=True)
class FirstReturn:
    z: np.ndarray            # refined first return time of the rotated path
    anchor_index: np.ndarray
    anchor_time: np.ndarray  # refined argmin time of the unrotated path
    min_value: np.ndarray
    gap: np.ndarray


def refined_first_return(values: np.ndarray, duration: float, uniforms: np.ndarray,
                         lam: float) -> FirstReturn:
    """First return to 0 of the rotation of a bridge block ending at lam < 0.

    Rotating at the (refined) argmin sends the return time to
    duration - argmin_time + first_passage(min + |lam|): the rotated path
    re-hits zero where the original bridge first passed below min - lam.
    """
    minima = interval_minima(values, duration, uniforms)
    ref = refined_argmin(values, duration, minima)
    levels = ref.value - lam
    t_pass = first_passage_below(values, duration, minima, levels)
    z = duration - ref.time + t_pass
    return FirstReturn(z=z, anchor_index=ref.index, anchor_time=ref.time,
                       min_value=ref.value, gap=ref.gap)


def rotate_block(values: np.ndarray, tau: np.ndarray | None = None,
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic rotation of each row at its first grid argmin (full range 0..N).

    Returns (rotated block, rotation indices).  Wrapped entries pick up the
    row's total increment.  Rows whose rotation index is 0 come back
    unchanged.  Passing tau rotates at caller-chosen indices instead of the
    argmin (the cyclic-shift identity is the same gather).
    """
    values = np.asarray(values, dtype=float)
    n_rows, n_pts = values.shape
    if tau is None:
        tau = np.argmin(values, axis=1)
    else:
        tau = np.asarray(tau, dtype=np.int64)
    cols = tau[:, None] + np.arange(n_pts)[None, :]
    wrap = cols > n_pts - 1
    cols = np.where(wrap, cols - (n_pts - 1), cols)
    rows = np.arange(n_rows)[:, None]
    delta = (values[:, -1] - values[:, 0])[:, None]
    rotated = values[rows, cols] - values[rows, tau[:, None]] + wrap * delta
    return rotated, tau


def marginal_columns(values: np.ndarray, duration: float, t_list) -> np.ndarray:
    """Columns of a block at the grid indices nearest the requested times."""
    values = np.asarray(values, dtype=float)
    n_int = values.shape[1] - 1
    idx = [int(round(t / duration * n_int)) for t in np.atleast_1d(t_list)]
    return values[:, idx]


def line_crossing_probability(values: np.ndarray, times: np.ndarray,
                              line_values: np.ndarray,
                              floor_values: np.ndarray | None = None) -> np.ndarray:
    """Per-interval probability that the path dips weakly below a piecewise
    linear boundary, conditioned on staying above a lower floor boundary.

    Both boundaries are linear inside each interval, so the dip probability
    of a Brownian bridge is exp(-2 d_a d_b / h) in boundary-relative
    coordinates, exactly.  The conditional probability is (A - B)/(1 - B)
    where A dips the line and B dips the floor (the floor never exceeds the
    line).  Intervals whose floor-dip probability reaches 1 are boundary
    tangencies where the conditioned process escapes faster than any line;
    they report 0.
    """
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    line_values = np.broadcast_to(np.asarray(line_values, dtype=float), values.shape)
    dt = np.diff(times)[None, :]

    def dip(rel_a, rel_b):
        return np.exp(-2.0 * np.maximum(rel_a, 0.0) * np.maximum(rel_b, 0.0) / dt)

    a_line = values[:, :-1] - line_values[:, :-1]
    b_line = values[:, 1:] - line_values[:, 1:]
    big = dip(a_line, b_line)
    if floor_values is None:
        return big
    floor_values = np.broadcast_to(np.asarray(floor_values, dtype=float), values.shape)
    small = dip(values[:, :-1] - floor_values[:, :-1], values[:, 1:] - floor_values[:, 1:])
    den = 1.0 - small
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(den > 1e-12, (big - small) / np.where(den > 1e-12, den, 1.0), 0.0)
    return np.clip(p, 0.0, 1.0)


def first_line_crossing(values: np.ndarray, times: np.ndarray, line_values: np.ndarray,
                        fire: np.ndarray) -> np.ndarray:
    """First time the path passes weakly below a piecewise linear boundary.

    An interval crosses if its right grid point sits at or under the line
    (deterministic, time by linear interpolation of the gap) or if its fill
    indicator fired (time at the interval midpoint).  Grid equality at
    time 0 does not count; rows without any crossing report nan.
    """
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    line_values = np.broadcast_to(np.asarray(line_values, dtype=float), values.shape)
    diff = values - line_values
    below_right = diff[:, 1:] <= 0.0
    event = below_right | fire
    has = event.any(axis=1)
    out = np.full(values.shape[0], np.nan)
    if not has.any():
        return out
    rows = np.flatnonzero(has)
    j = np.argmax(event[rows], axis=1)
    t0 = times[j]
    t1 = times[j + 1]
    da = diff[rows, j]
    db = diff[rows, j + 1]
    grid_cross = below_right[rows, j]
    with np.errstate(invalid="ignore", divide="ignore"):
        root = t0 + (t1 - t0) * np.where(da > db, da / np.where(da > db, da - db, 1.0), 0.0)
    out[rows] = np.where(grid_cross, root, 0.5 * (t0 + t1))
    return out


def origin_refined_times(n_uniform: int, duration: float = 1.0, halvings: int = 24) -> np.ndarray:
    """Uniform grid with geometric refinement packed against time 0.

    The first uniform cell of a first-passage functional carries
    sqrt(2h/pi) of probability mass all by itself; halving down to
    h * 2^-24 spreads that mass over resolvable intervals.
    """
    h = duration / n_uniform
    geo = h * np.exp2(-np.arange(halvings, 0, -1, dtype=float))
    return np.concatenate([[0.0], geo, np.arange(1, n_uniform + 1) * h])


def endpoint_refined_times(n_uniform: int, duration: float = 1.0, halvings: int = 24) -> np.ndarray:
    """Mirror image of origin_refined_times: refinement packed against the end."""
    return duration - origin_refined_times(n_uniform, duration, halvings)[::-1]
