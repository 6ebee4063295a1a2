"""Goodness-of-fit statistics for the verification suite.

Plain statistics only; every pass/fail threshold lives in thresholds.py so
that a report can cite one versioned configuration.  The one-sample KS
statistic accepts any nondecreasing cdf callable; mixed laws need their
atoms declared so the lower comparison uses the cdf's left limit at a jump
instead of overstating the gap by the jump mass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "KsResult",
    "ks_one_sample",
    "ks_two_sample",
    "moment_z",
    "correlation_z",
    "chi_square",
    "tv_discrete",
]


@dataclass(frozen=True)
class KsResult:
    statistic: float
    n: int


def ks_one_sample(samples, cdf, min_samples: int = 100,
                  atoms: dict | None = None) -> KsResult:
    """Sup distance between the empirical CDF and a reference cdf callable.

    The cdf is evaluated on the sorted sample and required to be
    nondecreasing there with values in [0, 1]; a decreasing stretch means a
    mis-specified reference and raises rather than returning garbage.

    For a mixed reference, pass atoms as {value: mass}.  The cdf callable is
    taken right-continuous; at a declared atom the lower comparison uses the
    left limit cdf(v) - mass, which is what the sup over x < v sees.
    """
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    if n < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {n}")
    f = np.asarray(cdf(xs), dtype=float)
    if f.shape != xs.shape:
        raise ValueError("cdf callable must return one value per sample")
    if np.any(np.diff(f) < -1e-12):
        raise ValueError("cdf is not monotone on the sample range")
    if f.min() < -1e-12 or f.max() > 1.0 + 1e-12:
        raise ValueError("cdf values outside [0, 1]")
    f_left = f
    if atoms:
        f_left = f.copy()
        for value, mass in atoms.items():
            f_left[xs == value] -= mass
    grid = np.arange(1, n + 1) / n
    d_plus = float(np.max(grid - f))
    d_minus = float(np.max(f_left - (grid - 1.0 / n)))
    return KsResult(statistic=max(d_plus, d_minus), n=n)


def ks_two_sample(x, y) -> KsResult:
    """Sup distance between two empirical CDFs; n reported as min(n1, n2)."""
    xs = np.sort(np.asarray(x, dtype=float))
    ys = np.sort(np.asarray(y, dtype=float))
    pooled = np.concatenate([xs, ys])
    f1 = np.searchsorted(xs, pooled, side="right") / xs.size
    f2 = np.searchsorted(ys, pooled, side="right") / ys.size
    stat = float(np.max(np.abs(f1 - f2)))
    return KsResult(statistic=stat, n=int(min(xs.size, ys.size)))


def moment_z(samples, target: float) -> float:
    """z-score of the sample mean against a target value."""
    xs = np.asarray(samples, dtype=float)
    se = xs.std(ddof=1) / np.sqrt(xs.size)
    if se == 0.0:
        return 0.0 if float(xs.mean()) == target else np.inf
    return float((xs.mean() - target) / se)


def correlation_z(x, y) -> tuple[float, float]:
    """Sample correlation and its null z-score r * sqrt(n)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = float(np.corrcoef(x, y)[0, 1])
    return r, r * np.sqrt(x.size)


def chi_square(observed, expected) -> tuple[float, int]:
    """Pearson chi-square statistic and its degrees of freedom."""
    obs = np.asarray(observed, dtype=float)
    exp = np.asarray(expected, dtype=float)
    if obs.shape != exp.shape or np.any(exp <= 0):
        raise ValueError("observed/expected must match with positive expectations")
    stat = float(np.sum((obs - exp) ** 2 / exp))
    return stat, obs.size - 1


def tv_discrete(p: dict, q: dict) -> float:
    """Total variation distance between two pmfs given as mappings.

    Accepts exact rationals or floats; the result is a float.
    """
    keys = set(p) | set(q)
    total = sum(abs(p.get(k, 0) - q.get(k, 0)) for k in keys)
    return float(total) / 2.0
