"""Closed-form densities, kernels, and moments used by the verification suite.

Everything here is deterministic numerics: exact formulas where they exist,
adaptive quadrature behind a monotone interpolation table where only the
density is in closed form. Proper densities are normalization-checked at
construction time.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.special import erf, erfcx

__all__ = [
    "DensitySpec",
    "KernelSet",
    "KERNELS",
    "f_z", "F_z", "f_zhat", "F_zhat",
    "f_a", "F_a", "f_a_spec",
    "f_z_conditioned", "f_z_conditioned_spec",
    "prob_above_drift",
    "slope_last_segment_cdf",
    "mean_vb", "second_moment_vb",
    "meander_mean", "meander_m2", "meander_cross",
    "meander_marginal", "meander_joint",
    "nonmarkov_densities",
    "gaussian_kernel", "bessel_kernel", "first_hit_density",
    "bessel3_bridge_marginal",
    "maxwell_density", "maxwell_cdf",
    "arcsine_density", "rayleigh_density",
]

_SQRT_HALF_PI = math.sqrt(0.5 * math.pi)


# ---------------------------------------------------------------------------
# density container

class QuadratureError(ArithmeticError):
    pass


def _panel_mass(scalar_pdf, a: float, b: float,
                left_edge: bool = False, right_edge: bool = False) -> float:
    """Integral of the density over one knot panel.

    Edge panels are integrated under a square-root substitution so that
    integrable endpoint singularities (anything milder than x^-1) are
    resolved exactly instead of tripping the adaptive rule.
    """
    w = b - a
    if left_edge:
        f = lambda s: scalar_pdf(a + s * s) * 2.0 * s
        hi = math.sqrt(w)
    elif right_edge:
        f = lambda s: scalar_pdf(b - s * s) * 2.0 * s
        hi = math.sqrt(w)
    else:
        f = scalar_pdf
        hi = None
    if hi is None:
        val, _ = quad(f, a, b, epsabs=1e-12, epsrel=1e-10, limit=200)
    else:
        val, _ = quad(f, 0.0, hi, epsabs=1e-12, epsrel=1e-10, limit=200)
    return val


class DensitySpec:
    """A one-dimensional density with a vectorized CDF.

    The CDF is built once from cumulative panel quadrature on an
    endpoint-clustered knot grid, then evaluated through a monotone cubic
    interpolant. Construction asserts normalization for proper densities.
    """

    def __init__(self, name: str, params: dict, support: tuple,
                 pdf: Callable[[np.ndarray], np.ndarray],
                 knots: int = 800, check_norm: bool = True,
                 cdf: Callable[[np.ndarray], np.ndarray] | None = None):
        self.name = name
        self.params = dict(params)
        self.support = (float(support[0]), float(support[1]))
        self._pdf = pdf
        lo, hi = self.support
        u = np.linspace(0.0, 1.0, knots)
        x = lo + (hi - lo) * 0.5 * (1.0 - np.cos(np.pi * u))
        if cdf is not None:
            # exact cdf sampled at the knots, interpolated between them
            cum = np.atleast_1d(np.asarray(cdf(x), dtype=float))
            cum[0] = 0.0
        else:
            masses = np.empty(knots - 1)
            scalar = lambda s: float(pdf(np.asarray([s]))[0])
            for k in range(knots - 1):
                masses[k] = _panel_mass(scalar, x[k], x[k + 1],
                                        left_edge=(k == 0), right_edge=(k == knots - 2))
                if not np.isfinite(masses[k]):
                    raise QuadratureError(f"panel quadrature failed for {name}")
            cum = np.concatenate([[0.0], np.cumsum(masses)])
        self.total_mass = float(cum[-1])
        if check_norm and abs(self.total_mass - 1.0) > 1e-8:
            raise QuadratureError(
                f"{name} integrates to {self.total_mass!r}, expected 1")
        self._cdf = PchipInterpolator(x, np.minimum(cum / cum[-1], 1.0))

    def pdf(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.support
        out = np.zeros_like(x)
        inside = (x > lo) & (x < hi)
        if np.any(inside):
            out[inside] = self._pdf(x[inside]) / self.total_mass
        return out

    def cdf(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.support
        out = np.clip(self._cdf(np.clip(x, lo, hi)), 0.0, 1.0)
        out[x <= lo] = 0.0
        out[x >= hi] = 1.0
        return out


# ---------------------------------------------------------------------------
# first-return law and relatives

def f_z(lam: float, t) -> np.ndarray:
    """Density of the first return time of the transformed bridge, lam < 0.

    At exactly 0 and 1 the tabulation convention returns 0.0.
    """
    if lam >= 0:
        raise ValueError("f_z requires lam < 0")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    inside = (t > 0.0) & (t < 1.0)
    ti = t[inside]
    out[inside] = (abs(lam) / np.sqrt(2.0 * np.pi * ti * (1.0 - ti) ** 3)
                   * np.exp(-lam * lam * ti / (2.0 * (1.0 - ti))))
    return out


def F_z(lam: float, t) -> np.ndarray:
    if lam >= 0:
        raise ValueError("F_z requires lam < 0")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    inside = (t > 0.0) & (t < 1.0)
    ti = t[inside]
    out[inside] = erf(abs(lam) * np.sqrt(ti / (2.0 * (1.0 - ti))))
    out[t >= 1.0] = 1.0
    return out


def f_zhat(lam: float, t) -> np.ndarray:
    """Mirror law: f_zhat(lam, t) = f_z(-lam, 1-t) for lam > 0."""
    if lam <= 0:
        raise ValueError("f_zhat requires lam > 0")
    return f_z(-lam, 1.0 - np.atleast_1d(np.asarray(t, dtype=float)))


def F_zhat(lam: float, t) -> np.ndarray:
    if lam <= 0:
        raise ValueError("F_zhat requires lam > 0")
    return 1.0 - F_z(-lam, 1.0 - np.atleast_1d(np.asarray(t, dtype=float)))


def f_a(lam: float, a) -> np.ndarray:
    """Density of the uniform-on-[0, Z] shift location: integral of f_z(t)/t over (a, 1).

    Unbounded (like a^{-1/2}) as a -> 0, integrable.
    """
    if lam >= 0:
        raise ValueError("f_a requires lam < 0")
    a = np.atleast_1d(np.asarray(a, dtype=float))
    out = np.zeros_like(a)
    for i, ai in enumerate(a):
        if not 0.0 < ai < 1.0:
            continue
        val, err = quad(lambda t: float(f_z(lam, t)[0]) / t, ai, 1.0,
                        epsabs=1e-12, epsrel=1e-10, limit=200)
        if not np.isfinite(val):
            raise QuadratureError("f_a quadrature failed")
        out[i] = val
    return out


def F_a(lam: float, a) -> np.ndarray:
    # semi-closed: P(U*Z <= a) = F_z(a) + a * integral of f_z(t)/t over (a, 1)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    out = F_z(lam, a) + a * f_a(lam, a)
    out[a >= 1.0] = 1.0
    return np.clip(out, 0.0, 1.0)


def f_a_spec(lam: float) -> DensitySpec:
    return DensitySpec("shift_location", {"lam": lam}, (0.0, 1.0),
                       lambda a: f_a(lam, a), cdf=lambda a: F_a(lam, a))


def prob_above_drift(lam: float) -> float:
    """P(the transformed bridge stays above the line t -> lam*t), lam < 0.

    Equals the mean of the first-return law; erfcx keeps the erfc-type
    integral stable for large |lam|.
    """
    if lam >= 0:
        raise ValueError("prob_above_drift requires lam < 0")
    return 1.0 - abs(lam) * _SQRT_HALF_PI * float(erfcx(abs(lam) / math.sqrt(2.0)))


def f_z_conditioned(lam: float, t) -> np.ndarray:
    """First-return law conditioned on staying above the drift line: t*f_z/E Z."""
    return np.atleast_1d(np.asarray(t, dtype=float)) * f_z(lam, t) / prob_above_drift(lam)


def f_z_conditioned_spec(lam: float) -> DensitySpec:
    return DensitySpec("first_return_conditioned", {"lam": lam}, (0.0, 1.0),
                       lambda t: f_z_conditioned(lam, t))


def slope_last_segment_cdf(lam: float, a) -> np.ndarray:
    """CDF of the final minorant slope on [lam, 0]: 1 + a*sqrt(pi/2)*erfcx(|lam|/sqrt 2).

    Carries an atom at a = lam whose mass is prob_above_drift(lam).
    """
    if lam >= 0:
        raise ValueError("slope_last_segment_cdf requires lam < 0")
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if np.any((a < lam - 1e-12) | (a > 1e-12)):
        raise ValueError("slope argument outside [lam, 0]")
    return 1.0 + np.clip(a, lam, 0.0) * _SQRT_HALF_PI * float(erfcx(abs(lam) / math.sqrt(2.0)))


# ---------------------------------------------------------------------------
# moments of the transformed Brownian path

def mean_vb(t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.sqrt(8.0 / np.pi) * (np.sqrt(t) + np.sqrt(1.0 - t) - 1.0)


def second_moment_vb(t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return (3.0 * t + ((4.0 - 8.0 * t) / np.pi) * np.arcsin(np.sqrt(t))
            - (4.0 / np.pi) * np.sqrt(t * (1.0 - t)))


def meander_mean(t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.sqrt(2.0 / np.pi) * (np.sqrt(t * (1.0 - t)) + np.arcsin(np.sqrt(t)))


def meander_m2(t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return 3.0 * t - t * t


def meander_cross(t) -> np.ndarray:
    # E[ value(t) * value(1) ]; 2 at t = 1, Rayleigh second moment
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return 2.0 * np.sqrt(t)


# ---------------------------------------------------------------------------
# meander marginal and joint laws

def meander_marginal(t: float, x) -> np.ndarray:
    """Meander one-time density at time t.

    Uses the standard error function normalization, under which the t -> 1
    marginal is exactly Rayleigh; validated by quadrature in the tests.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError("t must lie in (0, 1]")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    pos = x > 0
    xp = x[pos]
    if t == 1.0:
        out[pos] = xp * np.exp(-0.5 * xp * xp)
        return out
    out[pos] = (xp * t ** -1.5 * np.exp(-xp * xp / (2.0 * t))
                * erf(xp / np.sqrt(2.0 * (1.0 - t))))
    return out


def meander_joint(t: float, x, y) -> np.ndarray:
    """Joint density of the meander at (t, 1); integrates in y to the marginal."""
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie strictly inside (0, 1)")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.zeros(np.broadcast(x, y).shape)
    xb, yb = np.broadcast_arrays(x, y)
    pos = (xb > 0) & (yb > 0)
    xp, yp = xb[pos], yb[pos]
    s = 1.0 - t
    out[pos] = (xp * t ** -1.5 * np.exp(-xp * xp / (2.0 * t))
                * (gaussian_kernel(s, xp, yp) - gaussian_kernel(s, xp, -yp)))
    return out


# ---------------------------------------------------------------------------
# transition kernels

def gaussian_kernel(t: float, x, y) -> np.ndarray:
    if t <= 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.exp(-(y - x) ** 2 / (2.0 * t)) / np.sqrt(2.0 * np.pi * t)


def bessel_kernel(t: float, x, y) -> np.ndarray:
    """Radial kernel factor q(t,x,y); q(t,x,y) y^2 dy is the Bessel(3) transition law.

    Stable form (p_t(x,y) - p_t(x,-y)) / (xy) for xy/t away from 0, series
    otherwise; q(t,0,y) = 2 exp(-y^2/2t) / sqrt(2 pi t^3).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    xb, yb = np.broadcast_arrays(x, y)
    if np.any(xb < 0) or np.any(yb < 0):
        raise ValueError("kernel arguments must be nonnegative")
    out = np.empty(xb.shape)
    z = xb * yb / t
    small = z < 1e-6
    if np.any(small):
        xs, ys = xb[small], yb[small]
        zs = z[small]
        # sinh(z)/z expansion keeps the x or y -> 0 limits exact
        out[small] = (2.0 / (t * np.sqrt(2.0 * np.pi * t))
                      * np.exp(-(xs * xs + ys * ys) / (2.0 * t))
                      * (1.0 + zs * zs / 6.0 + zs ** 4 / 120.0))
    big = ~small
    if np.any(big):
        xbg, ybg = xb[big], yb[big]
        out[big] = (gaussian_kernel(t, xbg, ybg)
                    - gaussian_kernel(t, xbg, -ybg)) / (xbg * ybg)
    return out


def first_hit_density(t: float, y) -> np.ndarray:
    """Density in t of the first hit of level y > 0 by standard Brownian motion."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise ValueError("level must be positive")
    return y / np.sqrt(2.0 * np.pi * t ** 3) * np.exp(-y * y / (2.0 * t))


class KernelSet:
    """Bundle of the Gaussian kernel, the radial kernel, and the first-hit density."""

    p = staticmethod(gaussian_kernel)
    q = staticmethod(bessel_kernel)
    g = staticmethod(first_hit_density)

    @staticmethod
    def identity_gap(t: float, y) -> np.ndarray:
        """Relative deviation in q(t,0,y) = (2/y) g_t(y); zero in exact arithmetic."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        lhs = bessel_kernel(t, 0.0, y)
        rhs = 2.0 / y * first_hit_density(t, y)
        return np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300)


KERNELS = KernelSet()


def bessel3_bridge_marginal(x: float, y: float, ell: float, t: float) -> DensitySpec:
    """Time-t marginal of the Bessel(3) bridge x -> y over [0, ell].

    Chapman-Kolmogorov normalizes q_t(x,r) r^2 q_{ell-t}(r,y) / q_ell(x,y)
    exactly; the constructor asserts it numerically.
    """
    if not 0.0 < t < ell:
        raise ValueError("need 0 < t < ell")
    if x < 0 or y < 0:
        raise ValueError("endpoints must be nonnegative")
    denom = float(bessel_kernel(ell, x, y)[0])
    hi = x + y + 12.0 * math.sqrt(ell)

    def pdf(r):
        r = np.asarray(r, dtype=float)
        return (bessel_kernel(t, x, r) * r * r
                * bessel_kernel(ell - t, r, y) / denom)

    return DensitySpec("bessel3_bridge_marginal",
                       {"x": x, "y": y, "ell": ell, "t": t},
                       (0.0, hi), pdf)


def maxwell_density(sigma: float, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    pos = x > 0
    z = x[pos] / sigma
    out[pos] = np.sqrt(2.0 / np.pi) * z * z * np.exp(-0.5 * z * z) / sigma
    return out


def maxwell_cdf(sigma: float, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.maximum(x, 0.0) / sigma
    return erf(z / math.sqrt(2.0)) - np.sqrt(2.0 / np.pi) * z * np.exp(-0.5 * z * z)


# ---------------------------------------------------------------------------
# conditioned return laws at an interior time (the non-Markov pair)

def nonmarkov_densities(lam: float, t0: float, x0: float):
    """The two conditional return-time densities on (t0, 1).

    Same kernel shape, but the second carries an extra factor t; the ratio
    is linear through the origin, which is what the regression experiment
    checks. Both are normalized numerically.
    """
    if lam >= 0:
        raise ValueError("lam must be negative")
    if not 0.0 < t0 < 1.0:
        raise ValueError("t0 must lie in (0, 1)")
    if x0 <= 0:
        raise ValueError("x0 must be positive")

    def shape(t):
        t = np.asarray(t, dtype=float)
        dt = t - t0
        rem = 1.0 - t
        return (dt ** -1.5 * rem ** -1.5
                * np.exp(-x0 * x0 / (2.0 * dt) - lam * lam / (2.0 * rem)))

    f1 = DensitySpec("return_after_zero", {"lam": lam, "t0": t0, "x0": x0},
                     (t0, 1.0), shape, check_norm=False)
    f2 = DensitySpec("return_after_positive", {"lam": lam, "t0": t0, "x0": x0},
                     (t0, 1.0), lambda t: np.asarray(t) * shape(t),
                     check_norm=False)
    return f1, f2


# ---------------------------------------------------------------------------
# elementary laws

def arcsine_density(a) -> np.ndarray:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    out = np.zeros_like(a)
    inside = (a > 0.0) & (a < 1.0)
    ai = a[inside]
    out[inside] = 1.0 / (np.pi * np.sqrt(ai * (1.0 - ai)))
    return out


def rayleigh_density(x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.exp(-0.5 * x[pos] ** 2)
    return out
