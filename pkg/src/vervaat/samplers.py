"""Exact-on-grid samplers for Brownian motion, bridges, excursions,
first-passage bridges, meanders, and the transformed bridges built from them.

Everything is generated from finite-dimensional Gaussian laws, never from an
SDE discretization: bridges come from a pinned Brownian motion, Bessel(3)
bridges are norms of 3-dimensional Brownian bridges, excursions and meanders
ride on those, and the composite samplers (decomposed transform, drifting
excursion, back-to-back meanders) concatenate exact pieces.  Grid values
therefore have the exact joint law of the target process at grid times.

Draw order is part of each sampler's contract: a path drawn from
RngStream(seed, id) is bit-identical to the corresponding row of the batch
kernels in this module, which is what makes worker fan-out invisible.
Per-sampler draw budgets (M grid intervals):

  bm / bridge           M normals
  bessel3 bridge        3M normals (three pinned components, consecutive)
  excursion             3M normals (bessel route) or M (rotation route)
  first-passage bridge  3M normals
  meander               1 uniform (Rayleigh endpoint), then 3M normals
  decomposed transform  1 normal (Z), then the two pieces' budgets
  denisov pair          1 uniform (arcsine split), then two meanders

Composite samplers whose pieces live on their own sub-grids return the
uniform-grid path by linear interpolation of the exact pieces, plus a record
holding the pieces themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .paths import SampledPath, vervaat_grid
from .rng import RngStream, normal_quantile, uniform_block

__all__ = [
    "SamplerSpec",
    "DecompositionRecord",
    "sample_bm",
    "sample_bridge",
    "sample_bessel3_bridge",
    "sample_excursion",
    "sample_fpb",
    "sample_meander",
    "sample_vervaat_bridge_direct",
    "sample_vervaat_bridge_decomposed",
    "sample_drifting_excursion",
    "sample_meander_pair_denisov",
    "draw",
    "PROCESS_NAMES",
]


# ---------------------------------------------------------------------------
# construction kernels: pure functions of pre-drawn normals, batch-shaped.
# times is a 1-d increasing array starting at 0; xi has one column per
# interval (three per interval for bessel construction).

def uniform_times(ell: float, n: int) -> np.ndarray:
    return np.arange(n + 1) * (ell / n)


def bm_from_normals(xi: np.ndarray, times: np.ndarray) -> np.ndarray:
    dt = np.diff(times)
    out = np.empty((xi.shape[0], times.size))
    out[:, 0] = 0.0
    np.cumsum(xi * np.sqrt(dt)[None, :], axis=1, out=out[:, 1:])
    return out


def bridge_from_normals(xi: np.ndarray, lam: float, times: np.ndarray) -> np.ndarray:
    w = bm_from_normals(xi, times)
    frac = times / times[-1]
    out = w - frac[None, :] * (w[:, -1:] - lam)
    out[:, -1] = lam  # x - (x - lam) can land one rounding off
    return out


def bessel3_from_normals(xi: np.ndarray, x: float, y: float, times: np.ndarray) -> np.ndarray:
    """Norm of a 3-d Brownian bridge from (x,0,0) to (y,0,0); xi has 3M columns."""
    m = times.size - 1
    mean = (x * (times[-1] - times) + y * times) / times[-1]
    b1 = bridge_from_normals(xi[:, :m], 0.0, times) + mean[None, :]
    b2 = bridge_from_normals(xi[:, m:2 * m], 0.0, times)
    b3 = bridge_from_normals(xi[:, 2 * m:], 0.0, times)
    out = np.sqrt(b1 * b1 + b2 * b2 + b3 * b3)
    # endpoints are pinned by construction; enforce them against rounding
    out[:, 0] = x
    out[:, -1] = y
    return out


def fpb_from_normals(xi: np.ndarray, lam: float, times: np.ndarray) -> np.ndarray:
    return lam + bessel3_from_normals(xi, abs(lam), 0.0, times)


# ---------------------------------------------------------------------------
# public samplers

@dataclass(frozen=True)
class SamplerSpec:
    """Which process to draw, with its endpoint, duration, and grid size."""

    process: str
    lam: float = 0.0
    ell: float = 1.0
    n_grid: int = 4096

    def __post_init__(self) -> None:
        if self.n_grid < 2:
            raise ValueError("grid size must be at least 2")
        if not self.ell > 0:
            raise ValueError("duration must be positive")
        if self.process not in PROCESS_NAMES:
            raise ValueError(f"unknown process {self.process!r}")


@dataclass(frozen=True)
class DecompositionRecord:
    """Exact pieces behind a decomposed transform sample.

    The excursion piece spans [0, z], the passage piece [z, 1]; both end/start
    at exactly 0 at the splice.  value_at stitches them for marginal queries.
    """

    z: float
    excursion_piece: SampledPath
    passage_piece: SampledPath

    def value_at(self, t: float) -> float:
        if t <= self.z:
            return self.excursion_piece.value_at(t)
        return self.passage_piece.value_at(t - self.z)


def sample_bm(n: int, stream: RngStream) -> SampledPath:
    """Standard Brownian motion on [0,1], exact increments."""
    times = uniform_times(1.0, n)
    vals = bm_from_normals(stream.normal(n)[None, :], times)
    return SampledPath(1.0, vals[0])


def sample_bridge(lam: float, ell: float, n: int, stream: RngStream) -> SampledPath:
    """Brownian bridge from 0 to lam over [0, ell]; endpoint pinned exactly."""
    times = uniform_times(ell, n)
    vals = bridge_from_normals(stream.normal(n)[None, :], lam, times)
    return SampledPath(ell, vals[0])


def sample_bessel3_bridge(x: float, y: float, ell: float, n: int,
                          stream: RngStream) -> SampledPath:
    """Bessel(3) bridge from x >= 0 to y >= 0 over [0, ell]."""
    if x < 0 or y < 0:
        raise ValueError("bessel3 bridge endpoints must be nonnegative")
    times = uniform_times(ell, n)
    vals = bessel3_from_normals(stream.normal(3 * n)[None, :], x, y, times)
    return SampledPath(ell, vals[0])


def sample_excursion(ell: float, n: int, stream: RngStream,
                     route: str = "bessel") -> SampledPath:
    """Brownian excursion over [0, ell].

    route="bessel": Bessel(3) bridge 0 -> 0 (3n normals).
    route="rotation": rotate a zero-endpoint bridge at its minimum (n normals).
    The two agree in law; the test suite checks that rather than assuming it.
    """
    if route == "bessel":
        return sample_bessel3_bridge(0.0, 0.0, ell, n, stream)
    if route == "rotation":
        return vervaat_grid(sample_bridge(0.0, ell, n, stream))
    raise ValueError(f"unknown excursion route {route!r}")


def sample_fpb(lam: float, ell: float, n: int, stream: RngStream) -> SampledPath:
    """First-passage bridge: from 0, first hit of lam < 0 exactly at ell.

    Time reversal of the Biane-Yor identity: lam plus a Bessel(3) bridge
    from |lam| down to 0.  Stays strictly above lam before the end.
    """
    if lam >= 0:
        raise ValueError("first-passage bridge needs lam < 0")
    times = uniform_times(ell, n)
    vals = fpb_from_normals(stream.normal(3 * n)[None, :], lam, times)
    return SampledPath(ell, vals[0])


def sample_meander(n: int, stream: RngStream) -> SampledPath:
    """Brownian meander on [0,1]: Bessel(3) bridge to a Rayleigh endpoint."""
    rho = math.sqrt(2.0 * float(stream.exponential(1)[0]))
    times = uniform_times(1.0, n)
    vals = bessel3_from_normals(stream.normal(3 * n)[None, :], 0.0, rho, times)
    return SampledPath(1.0, vals[0])


def sample_vervaat_bridge_direct(lam: float, n: int, stream: RngStream) -> SampledPath:
    """Rotation-at-the-minimum of a bridge ending at lam, on [0,1]."""
    return vervaat_grid(sample_bridge(lam, 1.0, n, stream))


def piece_cells(z: float, n: int) -> tuple[int, int]:
    """Grid split for the decomposed sampler: ceil(z n) cells to the
    excursion piece, clamped so both pieces keep at least 2 cells."""
    n1 = min(max(int(math.ceil(z * n)), 2), n - 2)
    return n1, n - n1


def sample_vervaat_bridge_decomposed(lam: float, n: int, stream: RngStream,
                                     ) -> tuple[SampledPath, DecompositionRecord]:
    """Transformed bridge assembled from its two conditional pieces.

    Z = G^2/(lam^2 + G^2) for one standard normal G (exact law of the first
    return time), then an excursion of length Z and a first-passage bridge
    from 0 to lam over the remaining time, on sub-grids of ceil(Z n) and
    n - ceil(Z n) cells.  The returned uniform-grid path interpolates the
    pieces; the record keeps them exact.
    """
    if lam >= 0:
        raise ValueError("decomposed sampler needs lam < 0")
    g = float(stream.normal(1)[0])
    z = g * g / (lam * lam + g * g)
    n1, n2 = piece_cells(z, n)
    exc = sample_excursion(z, n1, stream, route="bessel")
    fpb = sample_fpb(lam, 1.0 - z, n2, stream)
    record = DecompositionRecord(z=z, excursion_piece=exc, passage_piece=fpb)
    grid = uniform_times(1.0, n)
    values = np.where(
        grid <= z,
        np.interp(grid, exc.times, exc.values),
        np.interp(grid - z, fpb.times, fpb.values),
    )
    values[-1] = lam
    return SampledPath(1.0, values), record


def sample_drifting_excursion(lam: float, n: int, stream: RngStream) -> SampledPath:
    """Excursion plus the deterministic drift lam * t, on [0,1]."""
    if lam >= 0:
        raise ValueError("drifting excursion needs lam < 0")
    exc = sample_excursion(1.0, n, stream, route="bessel")
    values = exc.values + lam * exc.times
    values[-1] = lam
    return SampledPath(1.0, values)


def denisov_split(a: float, n: int) -> tuple[int, int]:
    """Grid split for the glued meander pair: round(a n) cells to the
    segment on [0, a], clamped so both segments keep at least 2 cells."""
    n1 = min(max(int(round(a * n)), 2), n - 2)
    return n1, n - n1


def glue_meander_pair(a: float, post_vals: np.ndarray, pre_vals: np.ndarray,
                      n: int) -> np.ndarray:
    """Assemble a rotated-at-the-minimum Brownian path from two standard
    meanders and the arcsine split a.

    On [0, a] the path is sqrt(a) * post(t/a); on [a, 1] it is
    sqrt(1-a) * (pre(1 - (t-a)/(1-a)) - pre(1)) + sqrt(a) * post(1), i.e.
    the pre-minimum meander run backwards and anchored so the two segments
    meet.  Piece grids are uniform within each segment; the output is
    interpolated onto the uniform n-grid.
    """
    n1 = post_vals.shape[-1] - 1
    n2 = pre_vals.shape[-1] - 1
    seg1_t = np.arange(n1 + 1) * (a / n1)
    seg1_v = math.sqrt(a) * post_vals
    seg2_t = a + np.arange(1, n2 + 1) * ((1.0 - a) / n2)
    anchor = math.sqrt(a) * post_vals[-1] - math.sqrt(1.0 - a) * pre_vals[-1]
    seg2_v = math.sqrt(1.0 - a) * pre_vals[-2::-1] + anchor
    glued_t = np.concatenate([seg1_t, seg2_t])
    glued_v = np.concatenate([seg1_v, seg2_v])
    return np.interp(uniform_times(1.0, n), glued_t, glued_v)


def sample_meander_pair_denisov(n: int, stream: RngStream) -> tuple[SampledPath, int]:
    """Rotation-at-the-minimum of Brownian motion via the two-meander split.

    Draws the arcsine split A, then two standard meanders on sub-grids of
    round(A n) and n - round(A n) cells, and glues them.  Returns the path
    and the uniform-grid index nearest the junction.  The path starts at 0
    and stays above min(0, terminal value) by construction.
    """
    a = float(stream.arcsine(1)[0])
    n1, n2 = denisov_split(a, n)
    post = sample_meander(n1, stream)
    pre = sample_meander(n2, stream)
    values = glue_meander_pair(a, post.values, pre.values, n)
    return SampledPath(1.0, values), n1


# ---------------------------------------------------------------------------
# name-based dispatch for the command line

PROCESS_NAMES = (
    "bm", "bridge", "excursion", "fpb", "meander",
    "vervaat-direct", "vervaat-decomposed", "drift-excursion", "denisov",
)


def draw(spec: SamplerSpec, stream: RngStream) -> SampledPath:
    """One path for a SamplerSpec; composite records are dropped here."""
    p, lam, ell, n = spec.process, spec.lam, spec.ell, spec.n_grid
    if p == "bm":
        return sample_bm(n, stream)
    if p == "bridge":
        return sample_bridge(lam, ell, n, stream)
    if p == "excursion":
        return sample_excursion(ell, n, stream)
    if p == "fpb":
        return sample_fpb(lam, ell, n, stream)
    if p == "meander":
        return sample_meander(n, stream)
    if p == "vervaat-direct":
        return sample_vervaat_bridge_direct(lam, n, stream)
    if p == "vervaat-decomposed":
        return sample_vervaat_bridge_decomposed(lam, n, stream)[0]
    if p == "drift-excursion":
        return sample_drifting_excursion(lam, n, stream)
    if p == "denisov":
        return sample_meander_pair_denisov(n, stream)[0]
    raise ValueError(f"unknown process {p!r}")


# ---------------------------------------------------------------------------
# batch kernels (fixed-size processes): one stream id per row, draw order
# identical to the one-path samplers above.

def bm_block(master_seed: int, stream_ids, n: int) -> np.ndarray:
    u = uniform_block(master_seed, stream_ids, n)
    return bm_from_normals(normal_quantile(u), uniform_times(1.0, n))


def bridge_block(master_seed: int, stream_ids, lam: float, ell: float, n: int,
                 times: np.ndarray | None = None) -> np.ndarray:
    if times is None:
        times = uniform_times(ell, n)
    u = uniform_block(master_seed, stream_ids, times.size - 1)
    return bridge_from_normals(normal_quantile(u), lam, times)


def bessel3_block(master_seed: int, stream_ids, x: float, y: float, ell: float,
                  n: int, times: np.ndarray | None = None) -> np.ndarray:
    if times is None:
        times = uniform_times(ell, n)
    u = uniform_block(master_seed, stream_ids, 3 * (times.size - 1))
    return bessel3_from_normals(normal_quantile(u), x, y, times)


def fpb_block(master_seed: int, stream_ids, lam: float, ell: float, n: int,
              times: np.ndarray | None = None) -> np.ndarray:
    if times is None:
        times = uniform_times(ell, n)
    u = uniform_block(master_seed, stream_ids, 3 * (times.size - 1))
    return fpb_from_normals(normal_quantile(u), lam, times)


def meander_block(master_seed: int, stream_ids, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Batch meanders; returns (values, rho endpoints)."""
    times = uniform_times(1.0, n)
    u = uniform_block(master_seed, stream_ids, 1 + 3 * n)
    rho = np.sqrt(-2.0 * np.log(u[:, 0]))
    xi = normal_quantile(u[:, 1:])
    m = times.size - 1
    mean_unit = times / times[-1]
    b1 = bridge_from_normals(xi[:, :m], 0.0, times) + rho[:, None] * mean_unit[None, :]
    b2 = bridge_from_normals(xi[:, m:2 * m], 0.0, times)
    b3 = bridge_from_normals(xi[:, 2 * m:], 0.0, times)
    out = np.sqrt(b1 * b1 + b2 * b2 + b3 * b3)
    out[:, 0] = 0.0
    out[:, -1] = rho
    return out, rho
