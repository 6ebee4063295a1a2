"""Named verification experiments with reproducible pass/fail reports.

Each experiment binds one distributional identity to Monte Carlo or exact
computation and emits an ExperimentReport whose canonical JSON form is
byte-stable: replicates get counter-based stream ids ((family << 32) |
replicate index), work is cut into fixed 2048-replicate chunks, and
aggregation follows chunk order, so any worker count produces identical
bytes.  Wall time is kept on the report object but left out of the
canonical serialization.

Route conventions, applied consistently:
  - Rotation-route marginals compared against closed forms rotate at the
    grid index nearest the refined argmin and are level-corrected by the
    refined minimum gap.  Shift-based checks use raw grid rotations (level
    offsets cancel in differences).  Terminal values are exact under any
    rotation and stay raw.
  - Piece-assembled and glued-meander routes group replicates by split
    size and scale unit-duration pieces (same law by Brownian scaling);
    functionals are read off the exact piece grids.  These single-pass
    group loops ignore the worker pool.
  - Polygon events (a path staying above a line) are evaluated on raw grid
    values; their thresholds carry the documented grid allowance.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import partial

import numpy as np
from scipy.special import ndtr

from . import closed_forms as cf
from . import gof, lattice, minorant, refine, samplers
from .rng import normal_quantile, uniform_block
from .thresholds import THRESHOLDS

__all__ = [
    "CHUNK", "DEFAULT_SEED", "DEFAULT_REPS", "DEFAULT_GRID",
    "EXPERIMENT_IDS", "ExperimentReport",
    "experiment_decomposition", "experiment_duality", "experiment_biane_shift",
    "experiment_moments_VB", "experiment_meander_moments",
    "experiment_above_drift", "experiment_non_markov",
    "experiment_discrete_to_continuum", "experiment_minorant",
    "experiment_vervaat_limit",
    "run_experiment", "run_all",
]

CHUNK = 2048
DEFAULT_SEED = 20260817
DEFAULT_REPS = 100_000
DEFAULT_GRID = 4096
QUARTERS = (0.25, 0.5, 0.75)

EXPERIMENT_IDS = (
    "decomposition",
    "duality",
    "biane_shift",
    "moments_vb",
    "meander_moments",
    "above_drift",
    "non_markov",
    "discrete_to_continuum",
    "minorant",
    "vervaat_limit",
)


# ---------------------------------------------------------------------------
# report plumbing

@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    reps: int
    grid: int
    seed: int
    checks: list
    passed: bool
    wall_time_s: float

    def canonical_dict(self) -> dict:
        # wall time deliberately excluded: reports must be byte-identical
        # across reruns and worker counts
        return {
            "schema": 1,
            "experiment": self.experiment,
            "params": self.params,
            "reps": self.reps,
            "grid": self.grid,
            "seed": self.seed,
            "thresholds_version": THRESHOLDS.version,
            "passed": self.passed,
            "checks": self.checks,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.canonical_dict(), sort_keys=True,
                          separators=(",", ":"), allow_nan=False)


def _check(name: str, value, threshold, passed: bool, detail: str = "") -> dict:
    return {
        "name": name,
        "value": float(value),
        "threshold": None if threshold is None else float(threshold),
        "passed": bool(passed),
        "detail": detail,
    }


def _ks_check(name, samples, cdf, cap, detail="", atoms=None):
    r = gof.ks_one_sample(samples, cdf, atoms=atoms)
    return _check(name, r.statistic, cap, r.statistic < cap, detail)


def _ks2_check(name, x, y, cap, detail=""):
    r = gof.ks_two_sample(x, y)
    return _check(name, r.statistic, cap, r.statistic < cap, detail)


def _z_check(name, samples, target, detail=""):
    z = gof.moment_z(samples, target)
    return _check(name, z, THRESHOLDS.moment_sigmas,
                  abs(z) <= THRESHOLDS.moment_sigmas, detail)


def _finish(experiment, params, reps, grid, seed, checks, t_start):
    passed = all(c["passed"] for c in checks)
    return ExperimentReport(experiment=experiment, params=params, reps=reps,
                            grid=grid, seed=seed, checks=checks, passed=passed,
                            wall_time_s=time.perf_counter() - t_start)


# ---------------------------------------------------------------------------
# stream id layout and worker fan-out

def _ids(experiment: str, sub: int, start: int, stop: int) -> np.ndarray:
    """Stream ids for replicates [start, stop) of one draw family."""
    family = EXPERIMENT_IDS.index(experiment) * 64 + sub + 1
    return np.uint64(family << 32) + np.arange(start, stop, dtype=np.uint64)


def _fan(fn, reps: int, workers: int) -> list:
    """Run fn(start, stop) over fixed chunks, serially or in a pool.

    Results come back in chunk order either way, so aggregation does not
    depend on the worker count.
    """
    spans = [(s, min(s + CHUNK, reps)) for s in range(0, reps, CHUNK)]
    if workers <= 1:
        return [fn(s, e) for s, e in spans]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, *zip(*spans)))


def _cat(parts: list, k: int) -> np.ndarray:
    return np.concatenate([p[k] for p in parts])


def _row_interp(block: np.ndarray, pos: np.ndarray) -> np.ndarray:
    """Linear interpolation of each row at a per-row fractional column."""
    ncol = block.shape[1]
    pos = np.clip(np.asarray(pos, dtype=float), 0.0, ncol - 1.0)
    lo = np.minimum(np.floor(pos).astype(np.int64), ncol - 2)
    frac = pos - lo
    rows = np.arange(block.shape[0])
    return block[rows, lo] * (1.0 - frac) + block[rows, lo + 1] * frac


def _corrected_rotation(w: np.ndarray, ref: refine.RefinedMin, n: int,
                        t_list) -> np.ndarray:
    """Marginals of the rotated block, anchored at the refined minimum.

    Rotates at the grid index nearest the refined argmin and raises every
    value by the gap between that grid point and the refined minimum, so
    interior marginals lose their O(grid^-1/2) level bias.
    """
    tau = np.clip(np.rint(ref.time * n).astype(np.int64), 0, n)
    rot, _ = refine.rotate_block(w, tau)
    corr = w[np.arange(w.shape[0]), tau] - ref.value
    return refine.marginal_columns(rot, 1.0, t_list) + corr[:, None]


# ---------------------------------------------------------------------------
# decomposition: first-return law, route-equivalent marginals, piece laws

def _dec_direct_chunk(seed, lam, n, t_list, start, stop):
    w = samplers.bridge_block(seed, _ids("decomposition", 0, start, stop), lam, 1.0, n)
    u = uniform_block(seed, _ids("decomposition", 1, start, stop), n)
    minima = refine.interval_minima(w, 1.0, u)
    ref = refine.refined_argmin(w, 1.0, minima)
    t_pass = refine.first_passage_below(w, 1.0, minima, ref.value - lam)
    z = 1.0 - ref.time + t_pass
    marg = _corrected_rotation(w, ref, n, t_list)
    return z, marg


def _decomposed_functionals(seed, lam, n, reps, t_list):
    """Piece-assembled route, grouped by excursion sub-grid size.

    Pieces are drawn at unit duration and scaled by sqrt(Z) (excursion)
    and sqrt(1-Z) with a rescaled target level (descent piece), which is
    the same law as drawing them at their true durations.
    """
    ids = _ids("decomposition", 2, 0, reps)
    u0 = uniform_block(seed, ids, 1)[:, 0]
    g = normal_quantile(u0)
    z = g * g / (lam * lam + g * g)
    n1_all = np.clip(np.ceil(z * n).astype(np.int64), 2, n - 2)
    t_arr = np.asarray(t_list, dtype=float)
    marg = np.empty((reps, t_arr.size))
    exc_max = np.empty(reps)
    exc_mid = np.empty(reps)
    min_frac = np.empty(reps)
    for n1 in np.unique(n1_all):
        sel = np.flatnonzero(n1_all == n1)
        n1 = int(n1)
        n2 = n - n1
        u = uniform_block(seed, ids[sel], 1 + 3 * n)
        zz = z[sel]
        xi = normal_quantile(u[:, 1:])
        t1 = samplers.uniform_times(1.0, n1)
        e_hat = samplers.bessel3_from_normals(xi[:, :3 * n1], 0.0, 0.0, t1)
        t2 = samplers.uniform_times(1.0, n2)
        lam_unit = lam / np.sqrt(1.0 - zz)
        xi2 = xi[:, 3 * n1:]
        b1 = (samplers.bridge_from_normals(xi2[:, :n2], 0.0, t2)
              + np.abs(lam_unit)[:, None] * (1.0 - t2)[None, :])
        b2 = samplers.bridge_from_normals(xi2[:, n2:2 * n2], 0.0, t2)
        b3 = samplers.bridge_from_normals(xi2[:, 2 * n2:], 0.0, t2)
        f_hat = np.sqrt(b1 * b1 + b2 * b2 + b3 * b3) + lam_unit[:, None]
        f_hat[:, 0] = 0.0
        f_hat[:, -1] = lam_unit
        exc_max[sel] = e_hat.max(axis=1)
        exc_mid[sel] = _row_interp(e_hat, np.full(sel.size, 0.5 * n1))
        min_frac[sel] = np.argmin(f_hat - lam_unit[:, None] * t2[None, :], axis=1) / n2
        sz = np.sqrt(zz)
        sr = np.sqrt(1.0 - zz)
        for j, t in enumerate(t_arr):
            on_exc = t <= zz
            v1 = sz * _row_interp(e_hat, t / np.maximum(zz, 1e-300) * n1)
            v2 = sr * _row_interp(f_hat, (t - zz) / np.maximum(1.0 - zz, 1e-300) * n2)
            marg[sel, j] = np.where(on_exc, v1, v2)
    return z, marg, exc_max, exc_mid, min_frac


def experiment_decomposition(lam: float = -1.0, n: int = DEFAULT_GRID,
                             reps: int = DEFAULT_REPS, seed: int = DEFAULT_SEED,
                             workers: int = 1) -> ExperimentReport:
    if lam >= 0:
        raise ValueError("decomposition experiment needs lam < 0")
    t0 = time.perf_counter()
    parts = _fan(partial(_dec_direct_chunk, seed, lam, n, QUARTERS), reps, workers)
    z_direct = _cat(parts, 0)
    marg_direct = _cat(parts, 1)
    z2, marg2, exc_max, exc_mid, min_frac = _decomposed_functionals(
        seed, lam, n, reps, QUARTERS)

    cap = THRESHOLDS.ks_path_functional
    checks = [
        _ks_check("first_return_ks", z_direct, lambda t: cf.F_z(lam, t), cap,
                  "refined first-return times, rotation route, vs closed-form cdf"),
    ]
    for j, t in enumerate(QUARTERS):
        checks.append(_ks2_check(
            f"marginal_two_sample_t{int(t * 100):02d}",
            marg_direct[:, j], marg2[:, j], cap,
            "rotation route vs piece-assembled route"))
    order = np.argsort(z2, kind="stable")
    nbins = 16
    max_z = 0.0
    for b in range(nbins):
        sel = order[b * reps // nbins:(b + 1) * reps // nbins]
        _, zr = gof.correlation_z(exc_max[sel], min_frac[sel])
        max_z = max(max_z, abs(zr))
    checks.append(_check(
        "piece_independence_max_z", max_z, THRESHOLDS.independence_sigmas,
        max_z <= THRESHOLDS.independence_sigmas,
        "max |corr|*sqrt(bin size) of piece functionals over 16 split-time bins"))
    checks.append(_ks_check(
        "piece1_midpoint_ks", exc_mid, lambda x: cf.maxwell_cdf(0.5, x), cap,
        "rescaled excursion-piece midpoint vs its closed-form law"))
    return _finish("decomposition", {"lam": lam}, reps, n, seed, checks, t0)


# ---------------------------------------------------------------------------
# duality: reversed-shifted mirror route vs primal route, last-hit law

def _dual_primal_chunk(seed, lam, n, t_list, start, stop):
    w = samplers.bridge_block(seed, _ids("duality", 0, start, stop), lam, 1.0, n)
    u = uniform_block(seed, _ids("duality", 1, start, stop), n)
    minima = refine.interval_minima(w, 1.0, u)
    ref = refine.refined_argmin(w, 1.0, minima)
    rot, _ = refine.rotate_block(w)
    marg = refine.marginal_columns(rot, 1.0, t_list)
    # last hit of lam by the rotated path = reversed-time first passage of
    # the bridge below (refined min + lam), measured from the right end
    t_rev = refine.first_passage_below(w[:, ::-1], 1.0, minima[:, ::-1],
                                       ref.value + lam)
    last_hit = 1.0 - t_rev - ref.time
    return marg, last_hit


def _dual_mirror_chunk(seed, lam, n, t_list, start, stop):
    w = samplers.bridge_block(seed, _ids("duality", 2, start, stop), -lam, 1.0, n)
    u = uniform_block(seed, _ids("duality", 3, start, stop), n)
    fr = refine.refined_first_return(w, 1.0, u, -lam)
    rot, _ = refine.rotate_block(w)
    idx = [n - int(round(t * n)) for t in t_list]
    marg = rot[:, idx] + lam
    return marg, 1.0 - fr.z


def experiment_duality(lam: float = 1.0, n: int = DEFAULT_GRID,
                       reps: int = DEFAULT_REPS, seed: int = DEFAULT_SEED,
                       workers: int = 1) -> ExperimentReport:
    if lam <= 0:
        raise ValueError("duality experiment is parameterized by lam > 0")
    t0 = time.perf_counter()
    p1 = _fan(partial(_dual_primal_chunk, seed, lam, n, QUARTERS), reps, workers)
    p2 = _fan(partial(_dual_mirror_chunk, seed, lam, n, QUARTERS), reps, workers)
    marg1, last_hit = _cat(p1, 0), _cat(p1, 1)
    marg2, last_dual = _cat(p2, 0), _cat(p2, 1)

    cap = THRESHOLDS.ks_path_functional
    checks = [
        _ks_check("last_hit_ks", last_hit, lambda t: cf.F_zhat(lam, t), cap,
                  "refined last hit of the endpoint level vs its mirror-law cdf"),
        _ks2_check("last_hit_two_sample", last_hit, last_dual, cap,
                   "direct last hit vs one minus the mirror route's first return"),
    ]
    for j, t in enumerate(QUARTERS):
        checks.append(_ks2_check(
            f"marginal_two_sample_t{int(t * 100):02d}",
            marg1[:, j], marg2[:, j], cap,
            "primal rotation vs reversed-shifted mirror rotation"))
    return _finish("duality", {"lam": lam}, reps, n, seed, checks, t0)


# ---------------------------------------------------------------------------
# uniform shift: shifted rotation is a plain bridge; min location law

def _biane_chunk(seed, lam, n, t_list, start, stop):
    w = samplers.bridge_block(seed, _ids("biane_shift", 0, start, stop), lam, 1.0, n)
    u = uniform_block(seed, _ids("biane_shift", 1, start, stop), n)
    fr = refine.refined_first_return(w, 1.0, u, lam)
    rot, _ = refine.rotate_block(w)
    ua = uniform_block(seed, _ids("biane_shift", 2, start, stop), 1)[:, 0]
    a = ua * fr.z
    k = np.clip(np.rint(a * n).astype(np.int64), 0, n - 1)
    shifted, _ = refine.rotate_block(rot, k)
    marg = refine.marginal_columns(shifted, 1.0, t_list)
    u2 = uniform_block(seed, _ids("biane_shift", 3, start, stop), n)
    minima = refine.interval_minima(shifted, 1.0, u2)
    loc = refine.refined_argmin(shifted, 1.0, minima).time
    return marg, 1.0 - a, loc


def experiment_biane_shift(lam: float = -1.0, n: int = DEFAULT_GRID,
                           reps: int = DEFAULT_REPS, seed: int = DEFAULT_SEED,
                           workers: int = 1) -> ExperimentReport:
    if lam >= 0:
        raise ValueError("shift experiment needs lam < 0")
    t0 = time.perf_counter()
    parts = _fan(partial(_biane_chunk, seed, lam, n, QUARTERS), reps, workers)
    marg = _cat(parts, 0)
    shift_loc = _cat(parts, 1)
    path_loc = _cat(parts, 2)

    cap = THRESHOLDS.ks_path_functional
    checks = []
    for j, t in enumerate(QUARTERS):
        sd = math.sqrt(t * (1.0 - t))
        checks.append(_ks_check(
            f"bridge_marginal_ks_t{int(t * 100):02d}", marg[:, j],
            lambda x, t=t, sd=sd: ndtr((x - lam * t) / sd), cap,
            "shifted-rotation marginal vs Gaussian bridge marginal"))
    checks.append(_ks2_check(
        "min_location_two_sample", path_loc, shift_loc, cap,
        "refined minimum location of the shifted path vs one minus the "
        "drawn shift"))
    spec_a = cf.f_a_spec(lam)
    checks.append(_ks_check(
        "min_location_ks", shift_loc, lambda t: 1.0 - spec_a.cdf(1.0 - t), cap,
        "one minus the uniform shift vs the minimum-location law"))
    return _finish("biane_shift", {"lam": lam}, reps, n, seed, checks, t0)


# ---------------------------------------------------------------------------
# moments of the rotated Brownian path, direct and glued-meander routes

def _vb_direct_chunk(seed, n, t_list, start, stop):
    w = samplers.bm_block(seed, _ids("moments_vb", 0, start, stop), n)
    u = uniform_block(seed, _ids("moments_vb", 1, start, stop), n)
    minima = refine.interval_minima(w, 1.0, u)
    ref = refine.refined_argmin(w, 1.0, minima)
    marg = _corrected_rotation(w, ref, n, t_list)
    rot, _ = refine.rotate_block(w)
    return marg, rot[:, -1]


def _meander_values(xi: np.ndarray, rho: np.ndarray, n: int) -> np.ndarray:
    times = samplers.uniform_times(1.0, n)
    b1 = samplers.bridge_from_normals(xi[:, :n], 0.0, times) + rho[:, None] * times[None, :]
    b2 = samplers.bridge_from_normals(xi[:, n:2 * n], 0.0, times)
    b3 = samplers.bridge_from_normals(xi[:, 2 * n:], 0.0, times)
    out = np.sqrt(b1 * b1 + b2 * b2 + b3 * b3)
    out[:, 0] = 0.0
    out[:, -1] = rho
    return out


def _glued_functionals(seed, n, reps, t_list):
    """Glued-meander route, grouped by the split sub-grid size."""
    ids = _ids("moments_vb", 2, 0, reps)
    u0 = uniform_block(seed, ids, 1)[:, 0]
    s = np.sin(0.5 * np.pi * u0)
    a_all = s * s
    n1_all = np.clip(np.rint(a_all * n).astype(np.int64), 2, n - 2)
    t_arr = np.asarray(t_list, dtype=float)
    marg = np.empty((reps, t_arr.size))
    terminal = np.empty(reps)
    for n1 in np.unique(n1_all):
        sel = np.flatnonzero(n1_all == n1)
        n1 = int(n1)
        n2 = n - n1
        u = uniform_block(seed, ids[sel], 3 + 3 * n)
        a = a_all[sel]
        rho1 = np.sqrt(-2.0 * np.log(u[:, 1]))
        post = _meander_values(normal_quantile(u[:, 2:2 + 3 * n1]), rho1, n1)
        rho2 = np.sqrt(-2.0 * np.log(u[:, 2 + 3 * n1]))
        pre = _meander_values(normal_quantile(u[:, 3 + 3 * n1:]), rho2, n2)
        sa = np.sqrt(a)
        sb = np.sqrt(1.0 - a)
        terminal[sel] = sa * post[:, -1] - sb * pre[:, -1]
        for j, t in enumerate(t_arr):
            on1 = t <= a
            v1 = sa * _row_interp(post, t / np.maximum(a, 1e-300) * n1)
            back = (1.0 - (t - a) / np.maximum(1.0 - a, 1e-300)) * n2
            v2 = sb * (_row_interp(pre, back) - pre[:, -1]) + sa * post[:, -1]
            marg[sel, j] = np.where(on1, v1, v2)
    return marg, terminal


def experiment_moments_VB(n: int = DEFAULT_GRID, reps: int = DEFAULT_REPS,
                          seed: int = DEFAULT_SEED, workers: int = 1,
                          ) -> ExperimentReport:
    t0 = time.perf_counter()
    t_grid = tuple(round(0.1 * k, 1) for k in range(1, 10))
    parts = _fan(partial(_vb_direct_chunk, seed, n, t_grid), reps, workers)
    marg_d = _cat(parts, 0)
    term_d = _cat(parts, 1)
    marg_g, term_g = _glued_functionals(seed, n, reps, t_grid)

    checks = []
    for route, marg in (("direct", marg_d), ("glued", marg_g)):
        for j, t in enumerate(t_grid):
            tag = f"{int(t * 100):02d}"
            checks.append(_z_check(f"{route}_mean_t{tag}", marg[:, j],
                                   float(cf.mean_vb(t)[0]),
                                   "marginal mean vs closed form"))
            checks.append(_z_check(f"{route}_m2_t{tag}", marg[:, j] ** 2,
                                   float(cf.second_moment_vb(t)[0]),
                                   "marginal second moment vs closed form"))
    checks.append(_z_check("direct_var_terminal", term_d ** 2, 1.0,
                           "terminal value is a standard normal"))
    checks.append(_z_check("glued_var_terminal", term_g ** 2, 1.0,
                           "terminal value is a standard normal"))
    checks.append(_ks2_check("route_two_sample_t50", marg_d[:, 4], marg_g[:, 4],
                             THRESHOLDS.ks_path_functional,
                             "direct vs glued marginal at the midpoint"))
    return _finish("moments_vb", {}, reps, n, seed, checks, t0)


# ---------------------------------------------------------------------------
# meander moment curves

def _meander_chunk(seed, n, t_list, start, stop):
    vals, rho = samplers.meander_block(seed, _ids("meander_moments", 0, start, stop), n)
    return refine.marginal_columns(vals, 1.0, t_list), rho


def experiment_meander_moments(n: int = DEFAULT_GRID, reps: int = DEFAULT_REPS,
                               seed: int = DEFAULT_SEED, workers: int = 1,
                               ) -> ExperimentReport:
    t0 = time.perf_counter()
    parts = _fan(partial(_meander_chunk, seed, n, QUARTERS), reps, workers)
    marg = _cat(parts, 0)
    rho = _cat(parts, 1)

    checks = []
    for j, t in enumerate(QUARTERS):
        tag = f"{int(t * 100):02d}"
        checks.append(_z_check(f"mean_t{tag}", marg[:, j],
                               float(cf.meander_mean(t)[0]),
                               "marginal mean vs closed form"))
        checks.append(_z_check(f"m2_t{tag}", marg[:, j] ** 2,
                               float(cf.meander_m2(t)[0]),
                               "marginal second moment vs closed form"))
        checks.append(_z_check(f"cross_t{tag}", marg[:, j] * rho,
                               float(cf.meander_cross(t)[0]),
                               "marginal-times-endpoint moment vs closed form"))
    checks.append(_z_check("m2_t100", rho ** 2, 2.0,
                           "endpoint second moment equals 2"))
    checks.append(_ks_check("endpoint_ks", rho,
                            lambda x: 1.0 - np.exp(-0.5 * np.maximum(x, 0.0) ** 2),
                            THRESHOLDS.ks_path_functional,
                            "endpoint law is standard Rayleigh"))
    xs = np.linspace(0.0, 8.0, 16001)
    quad_mean = float(np.trapezoid(xs * cf.meander_marginal(0.5, xs), xs))
    diff = abs(quad_mean - float(cf.meander_mean(0.5)[0]))
    checks.append(_check("marginal_mean_quadrature", diff, 1e-6, diff < 1e-6,
                         "quadrature of the printed marginal density against "
                         "the closed-form mean at the midpoint"))
    return _finish("meander_moments", {}, reps, n, seed, checks, t0)


# ---------------------------------------------------------------------------
# staying above the drift line; conditioned first return; chord law;
# drifting-excursion passage time

def _drift_bridge_chunk(seed, lam, n, start, stop):
    w = samplers.bridge_block(seed, _ids("above_drift", 0, start, stop), lam, 1.0, n)
    u = uniform_block(seed, _ids("above_drift", 1, start, stop), n)
    fr = refine.refined_first_return(w, 1.0, u, lam)
    rot, _ = refine.rotate_block(w)
    t_grid = np.arange(1, n) / n
    above = np.all(rot[:, 1:n] > lam * t_grid[None, :], axis=1)
    return above, fr.z


def _chord_chunk(seed, lam, x, n, start, stop):
    """Exact chord-avoidance probability per first-passage path.

    Cell fills of a first-passage bridge are Brownian bridges conditioned to
    stay above the target level, so the per-cell chord-dip probability has a
    closed form and the product over cells estimates the continuum event
    without grid bias.  The mesh is dyadically refined toward the endpoint,
    where the chord meets the path; the last-cell truncation is O(1e-6).
    """
    times = refine.endpoint_refined_times(n)
    f = samplers.fpb_block(seed, _ids("above_drift", 2, start, stop), lam, 1.0,
                           n, times=times)
    out = []
    for xx in (x, lam):
        chord = xx + (lam - xx) * times
        p = refine.line_crossing_probability(f, times, chord[None, :], lam)
        out.append(np.prod(1.0 - p, axis=1))
    return tuple(out)


def _drift_excursion_chunk(seed, lam, n, start, stop):
    times = refine.origin_refined_times(n)
    m = times.size - 1
    exc = samplers.bessel3_block(seed, _ids("above_drift", 4, start, stop),
                                 0.0, 0.0, 1.0, n, times=times)
    line = (-lam) * times
    p = refine.line_crossing_probability(exc, times, line[None, :], 0.0)
    fire = p > uniform_block(seed, _ids("above_drift", 5, start, stop), m)
    h = refine.first_line_crossing(exc, times, line[None, :], fire)
    return (h,)


def experiment_above_drift(lam: float = -1.0, n: int = DEFAULT_GRID,
                           reps: int = DEFAULT_REPS, seed: int = DEFAULT_SEED,
                           workers: int = 1) -> ExperimentReport:
    if lam >= 0:
        raise ValueError("drift experiment needs lam < 0")
    t0 = time.perf_counter()
    # 3x oversampling: the conditioned law keeps roughly a third of paths
    attempts = 3 * reps
    parts = _fan(partial(_drift_bridge_chunk, seed, lam, n), attempts, workers)
    above = _cat(parts, 0)
    z = _cat(parts, 1)
    target = cf.prob_above_drift(lam)

    freq = float(np.mean(above[:reps]))
    se = math.sqrt(target * (1.0 - target) / reps)
    zstat = (freq - target) / se
    checks = [
        _check("stay_above_frequency_z", zstat, THRESHOLDS.moment_sigmas,
               abs(zstat) <= THRESHOLDS.moment_sigmas,
               f"frequency {freq:.5f} vs {target:.5f}"),
        _ks_check("conditioned_first_return_ks", z[above],
                  cf.f_z_conditioned_spec(lam).cdf, THRESHOLDS.ks_loose,
                  "first-return times among paths above the drift line"),
    ]

    x = lam / 2.0
    chord_reps = max(reps // 5, 2000)
    chord_parts = _fan(partial(_chord_chunk, seed, lam, x, n), chord_reps, workers)
    stay = _cat(chord_parts, 0)
    ctarget = abs(x) / abs(lam)
    checks.append(_z_check("chord_avoidance_z", stay, ctarget,
                           "exact per-path chord-avoidance probability vs "
                           "the linear-in-x closed form"))
    triv = _cat(chord_parts, 1)
    tfreq = float(np.mean(triv))
    checks.append(_check("chord_at_level_certain", tfreq, 1.0, tfreq == 1.0,
                         "the chord through the target level is never crossed"))

    h_parts = _fan(partial(_drift_excursion_chunk, seed, lam, n), reps, workers)
    h = _cat(h_parts, 0)
    checks.append(_ks_check("passage_time_ks", h, lambda t: cf.F_z(lam, t),
                            THRESHOLDS.ks_path_functional,
                            "drifting-excursion first passage below zero vs "
                            "the first-return law"))
    return _finish("above_drift", {"lam": lam, "chord_x": x}, reps, n, seed,
                   checks, t0)


# ---------------------------------------------------------------------------
# failure of the Markov property: exact discrete laws, continuous ratio
# regression, terminal-sign dichotomy

def _discrete_return_laws(n: int, a: int, t0: int, x0: int):
    """Exact conditional laws of the first return after t0, by enumeration.

    Conditioning (i): a zero in (0, t0] and height x0 at t0.
    Conditioning (ii): strictly positive on (0, t0] and height x0 at t0.
    Returns the two pmfs over return indices, as exact rationals.
    """
    ens = lattice.enumerate_bridges(n, a)
    steps = np.array(ens.walks, dtype=np.int64)
    vals = np.zeros((steps.shape[0], n + 1), dtype=np.int64)
    np.cumsum(steps, axis=1, out=vals[:, 1:])
    tau = np.argmin(vals[:, 1:], axis=1) + 1  # walk rotation convention
    cols = (tau[:, None] + np.arange(n)[None, :]) % n
    rot_steps = np.take_along_axis(steps, cols, axis=1)
    v = np.zeros_like(vals)
    np.cumsum(rot_steps, axis=1, out=v[:, 1:])
    interior = v[:, 1:t0 + 1]
    at_t0 = v[:, t0] == x0
    early_zero = at_t0 & (interior == 0).any(axis=1)
    positive = at_t0 & (interior > 0).all(axis=1)
    later = v[:, t0 + 1:] == 0
    ret = np.where(later.any(axis=1), np.argmax(later, axis=1) + t0 + 1, -1)
    laws = []
    for mask in (early_zero, positive):
        total = int(mask.sum())
        if total == 0:
            raise ValueError("empty conditioning event; pick another height")
        pm = {}
        for r in np.unique(ret[mask]):
            pm[int(r)] = Fraction(int((ret[mask] == r).sum()), total)
        laws.append(lattice.ExactPmf(pm))
    return laws[0], laws[1]


def _discrete_terminal_sign(n: int):
    """Enumerate all length-n walks with a unique minimum; rotate at it.

    Returns (count of rotations with an early zero and positive endpoint,
    exact share of positive endpoints among early-positive rotations).
    """
    codes = np.arange(1 << n, dtype=np.uint32)
    bits = (codes[:, None] >> np.arange(n)[None, :]) & 1
    steps = 2 * bits.astype(np.int64) - 1
    vals = np.zeros((steps.shape[0], n + 1), dtype=np.int64)
    np.cumsum(steps, axis=1, out=vals[:, 1:])
    mins = vals.min(axis=1)
    unique = (vals == mins[:, None]).sum(axis=1) == 1
    steps = steps[unique]
    vals = vals[unique]
    tau = np.argmin(vals, axis=1) % n  # full-range argmin; endpoint wraps to 0
    cols = (tau[:, None] + np.arange(n)[None, :]) % n
    rot = np.take_along_axis(steps, cols, axis=1)
    v = np.zeros((rot.shape[0], n + 1), dtype=np.int64)
    np.cumsum(rot, axis=1, out=v[:, 1:])
    half = v[:, 1:n // 2 + 1]
    zero_early = (half == 0).any(axis=1)
    pos_early = (half > 0).all(axis=1)
    term_pos = v[:, -1] > 0
    contradiction = int((zero_early & term_pos).sum())
    share = Fraction(int((pos_early & term_pos).sum()), int(pos_early.sum()))
    return contradiction, share


def _nm_weight_bound(lam: float, t0: float) -> float:
    rem_star = min(lam * lam / 3.0, 1.0 - t0)
    return rem_star ** -1.5 * math.exp(-lam * lam / (2.0 * rem_star))


def _nm_sample_chunk(seed, lam, t0, x0, weighted, sub, start, stop):
    u = uniform_block(seed, _ids("non_markov", sub, start, stop), 3)
    g = normal_quantile(u[:, 0])
    tau = t0 + x0 * x0 / (g * g)
    bound = _nm_weight_bound(lam, t0)
    rem = 1.0 - tau
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        w = np.where(rem > 0.0, rem ** -1.5 * np.exp(-lam * lam / (2.0 * rem)), 0.0)
    acc = u[:, 1] < w / bound
    if weighted:
        acc &= u[:, 2] < tau  # extra density factor t, a subunit weight here
    return (tau[acc],)


def _vb_terminal_chunk(seed, n, start, stop):
    w = samplers.bm_block(seed, _ids("non_markov", 3, start, stop), n)
    rot, _ = refine.rotate_block(w)
    pos = np.all(rot[:, 1:n // 2 + 1] > 0.0, axis=1)
    zero = np.any(rot[:, 1:] <= 0.0, axis=1)
    return pos, zero, rot[:, -1] > 0.0


def experiment_non_markov(lam: float = -1.0, t0: float = 0.25, x0: float = 0.5,
                          n: int = DEFAULT_GRID, reps: int = DEFAULT_REPS,
                          seed: int = DEFAULT_SEED, workers: int = 1,
                          ) -> ExperimentReport:
    t_start = time.perf_counter()
    checks = []
    for nn in (16, 20):
        td = nn // 4
        xd = 2 - (td % 2)
        law1, law2 = _discrete_return_laws(nn, -2, td, xd)
        tv = sum(abs(law1.mass(k) - law2.mass(k))
                 for k in set(law1.support) | set(law2.support)) / 2
        checks.append(_check(
            f"discrete_laws_differ_n{nn}", float(tv), None, law1 != law2,
            f"exact conditional return laws after step {td} at height {xd}; "
            f"total variation {tv}"))

    f1_spec, f2_spec = cf.nonmarkov_densities(lam, t0, x0)
    p1 = _fan(partial(_nm_sample_chunk, seed, lam, t0, x0, False, 1), 4 * reps, workers)
    p2 = _fan(partial(_nm_sample_chunk, seed, lam, t0, x0, True, 2), 4 * reps, workers)
    t1 = _cat(p1, 0)
    t2 = _cat(p2, 0)
    checks.append(_ks_check("return_after_zero_ks", t1, f1_spec.cdf,
                            THRESHOLDS.ks_path_functional,
                            "rejection-sampled conditional return times vs "
                            "their quadrature cdf"))
    edges = np.linspace(t0, 1.0, 41)
    c1, _ = np.histogram(t1, edges)
    c2, _ = np.histogram(t2, edges)
    keep = c1 >= 50
    centers = 0.5 * (edges[:-1] + edges[1:])[keep]
    ratio = (c2[keep] / t2.size) / (c1[keep] / t1.size)
    c_hat = float(np.sum(centers * ratio) / np.sum(centers * centers))
    ss_res = float(np.sum((ratio - c_hat * centers) ** 2))
    r2 = 1.0 - ss_res / float(np.sum(ratio ** 2))
    checks.append(_check("ratio_linearity_r2", r2, THRESHOLDS.r2_min,
                         r2 > THRESHOLDS.r2_min,
                         "uncentered through-origin fit of the conditional-"
                         f"law histogram ratio against t; slope {c_hat:.4f}"))

    contradiction, share = _discrete_terminal_sign(16)
    checks.append(_check("discrete_zero_forces_negative", contradiction, 0.0,
                         contradiction == 0,
                         "rotations of unique-minimum walks: an early zero "
                         "never ends positive, by exact enumeration"))
    checks.append(_check("discrete_positive_share", float(share),
                         THRESHOLDS.min_positive_share,
                         share >= Fraction(
                             THRESHOLDS.min_positive_share).limit_denominator(100),
                         f"exact share {share} of positive endpoints among "
                         "early-positive rotations, n=16"))
    parts = _fan(partial(_vb_terminal_chunk, seed, n), reps, workers)
    pos = _cat(parts, 0)
    zero = _cat(parts, 1)
    term_pos = _cat(parts, 2)
    mc_contra = float(np.mean(zero & term_pos))
    checks.append(_check("grid_zero_forces_negative", mc_contra, 0.0,
                         mc_contra == 0.0,
                         "rotated-path grid zeroes never precede a positive "
                         "endpoint"))
    mc_share = float(np.mean(term_pos[pos]))
    checks.append(_check("positive_share", mc_share,
                         THRESHOLDS.min_positive_share,
                         mc_share >= THRESHOLDS.min_positive_share,
                         "positive endpoints among paths positive through "
                         "the first half"))
    return _finish("non_markov", {"lam": lam, "t0": t0, "x0": x0},
                   reps, n, seed, checks, t_start)


# ---------------------------------------------------------------------------
# local limit of the discrete first-return law

def experiment_discrete_to_continuum(lam: float = -1.0, seed: int = DEFAULT_SEED,
                                     reps: int = DEFAULT_REPS,
                                     n: int = DEFAULT_GRID, workers: int = 1,
                                     ) -> ExperimentReport:
    """Exact computation; reps/grid/workers are accepted for uniformity."""
    t0 = time.perf_counter()
    sizes = (200, 800, 3200)
    tvs = []
    checks = []
    for nn in sizes:
        a = -int(round(math.sqrt(nn)))
        if (nn + a) % 2:
            a -= 1
        pmf = lattice.z_pmf(nn, a)
        tv = 0.0
        for l, mass in pmf.items():
            lo = cf.F_z(lam, (l - 1) / nn)[0]
            hi = cf.F_z(lam, (l + 1) / nn)[0]
            tv += abs(float(mass) - (hi - lo))
        tv *= 0.5
        tvs.append(tv)
        checks.append(_check(f"tv_n{nn}", tv,
                             THRESHOLDS.tv_cap if nn == sizes[-1] else None,
                             tv < THRESHOLDS.tv_cap if nn == sizes[-1] else True,
                             f"walk length {nn}, target level {a}, cells of "
                             "width two steps"))
    decreasing = tvs[0] > tvs[1] > tvs[2]
    checks.append(_check("tv_decreasing", tvs[0] - tvs[2], 0.0, decreasing,
                         "distance shrinks along the refinement sequence"))
    return _finish("discrete_to_continuum", {"lam": lam}, 0, 0, seed, checks, t0)


# ---------------------------------------------------------------------------
# convex minorant: last-segment slope law, segment-count stability

def _slope_chunk(seed, lam, n, start, stop):
    w = samplers.bridge_block(seed, _ids("minorant", 0, start, stop), lam, 1.0, n)
    rot, _ = refine.rotate_block(w)
    return (minorant.last_segment_slope_block(rot, 1.0),)


def _count_chunk(seed, lam, n, sub, start, stop):
    w = samplers.bridge_block(seed, _ids("minorant", sub, start, stop), lam, 1.0, n)
    rot, _ = refine.rotate_block(w)
    return (minorant.segment_count_block(rot, 1.0),)


def experiment_minorant(lam: float = -1.0, n: int = DEFAULT_GRID,
                        reps: int = DEFAULT_REPS, seed: int = DEFAULT_SEED,
                        workers: int = 1) -> ExperimentReport:
    if lam >= 0:
        raise ValueError("minorant experiment needs lam < 0")
    t0 = time.perf_counter()
    parts = _fan(partial(_slope_chunk, seed, lam, n), reps, workers)
    slopes = _cat(parts, 0)
    checks = [
        _ks_check("last_slope_ks", slopes, lambda a: cf.slope_last_segment_cdf(lam, a),
                  THRESHOLDS.ks_loose,
                  "final minorant slope vs its closed-form cdf (with the "
                  "single-chord atom at the endpoint slope)",
                  atoms={lam: cf.prob_above_drift(lam)}),
    ]
    reps2 = max(reps // 10, 1000)
    coarse = _cat(_fan(partial(_count_chunk, seed, lam, n // 2, 1), reps2, workers), 0)
    fine = _cat(_fan(partial(_count_chunk, seed, lam, n, 2), reps2, workers), 0)
    m1, s1 = float(coarse.mean()), float(coarse.std(ddof=1) / math.sqrt(reps2))
    m2, s2 = float(fine.mean()), float(fine.std(ddof=1) / math.sqrt(reps2))
    shift = abs(m1 - m2)
    cap = THRESHOLDS.segment_sigmas * math.sqrt(s1 * s1 + s2 * s2)
    checks.append(_check("segment_count_grid_shift", shift, cap, shift <= cap,
                         f"mean count {m1:.4f} at {n // 2} cells vs {m2:.4f} "
                         f"at {n} cells"))
    checks.append(_check("segment_count_mean", m2, None, True,
                         f"estimate only: mean segments {m2:.4f} +/- {s2:.4f} "
                         f"at {n} cells supports a finite expected count"))
    return _finish("minorant", {"lam": lam}, reps, n, seed, checks, t0)


# ---------------------------------------------------------------------------
# zero-endpoint limit: rotation of a plain bridge matches the radial bridge

def _limit_rotation_chunk(seed, n, t_list, start, stop):
    w = samplers.bridge_block(seed, _ids("vervaat_limit", 0, start, stop), 0.0, 1.0, n)
    u = uniform_block(seed, _ids("vervaat_limit", 1, start, stop), n)
    minima = refine.interval_minima(w, 1.0, u)
    ref = refine.refined_argmin(w, 1.0, minima)
    return (_corrected_rotation(w, ref, n, t_list),)


def _limit_radial_chunk(seed, n, t_list, start, stop):
    b = samplers.bessel3_block(seed, _ids("vervaat_limit", 2, start, stop),
                               0.0, 0.0, 1.0, n)
    return (refine.marginal_columns(b, 1.0, t_list),)


def experiment_vervaat_limit(n: int = DEFAULT_GRID, reps: int = DEFAULT_REPS,
                             seed: int = DEFAULT_SEED, workers: int = 1,
                             ) -> ExperimentReport:
    t0 = time.perf_counter()
    m1 = _cat(_fan(partial(_limit_rotation_chunk, seed, n, QUARTERS), reps, workers), 0)
    m2 = _cat(_fan(partial(_limit_radial_chunk, seed, n, QUARTERS), reps, workers), 0)
    checks = []
    for j, t in enumerate(QUARTERS):
        checks.append(_ks2_check(
            f"marginal_two_sample_t{int(t * 100):02d}", m1[:, j], m2[:, j],
            THRESHOLDS.ks_path_functional,
            "rotation of a zero-endpoint bridge vs the radial bridge"))
    return _finish("vervaat_limit", {}, reps, n, seed, checks, t0)


# ---------------------------------------------------------------------------
# dispatch

def run_experiment(name: str, seed: int = DEFAULT_SEED, reps: int = DEFAULT_REPS,
                   grid: int = DEFAULT_GRID, workers: int = 1) -> ExperimentReport:
    if name == "decomposition":
        return experiment_decomposition(-1.0, grid, reps, seed, workers)
    if name == "duality":
        return experiment_duality(1.0, grid, reps, seed, workers)
    if name == "biane_shift":
        return experiment_biane_shift(-1.0, grid, reps, seed, workers)
    if name == "moments_vb":
        return experiment_moments_VB(grid, reps, seed, workers)
    if name == "meander_moments":
        return experiment_meander_moments(grid, reps, seed, workers)
    if name == "above_drift":
        return experiment_above_drift(-1.0, grid, reps, seed, workers)
    if name == "non_markov":
        return experiment_non_markov(-1.0, 0.25, 0.5, grid, reps, seed, workers)
    if name == "discrete_to_continuum":
        return experiment_discrete_to_continuum(-1.0, seed, reps, grid, workers)
    if name == "minorant":
        return experiment_minorant(-1.0, grid, reps, seed, workers)
    if name == "vervaat_limit":
        return experiment_vervaat_limit(grid, reps, seed, workers)
    raise ValueError(f"unknown experiment {name!r}")


def run_all(seed: int = DEFAULT_SEED, reps: int = DEFAULT_REPS,
            grid: int = DEFAULT_GRID, workers: int = 1) -> list[ExperimentReport]:
    return [run_experiment(name, seed, reps, grid, workers)
            for name in EXPERIMENT_IDS]
