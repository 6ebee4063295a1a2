"""Reproducible random streams for the samplers.

Every replicate gets its own counter-based stream keyed by
(master_seed, stream_id), so results never depend on how replicates are
batched across workers. All variates derive from raw Philox output through
closed-form inverse transforms; the normal quantile is a fixed rational
approximation rather than the platform library, keeping streams
bit-identical everywhere.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "RngStream",
    "normal_quantile",
    "uniform_block",
    "normal_block",
]

_INV_2_53 = 2.0 ** -53


def _to_uniform(raw: np.ndarray) -> np.ndarray:
    # top 53 bits, offset to the open interval (0, 1)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


# Rational minimax approximation to the standard normal quantile
# (Wichura's PPND16). Max absolute error below 1e-9 on (0,1); verified
# against an independent evaluation in the test suite.

_A = (3.3871328727963666080e0, 1.3314166789178437745e2,
      1.9715909503065514427e3, 1.3731693765509461125e4,
      4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4,
      3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0,
      5.76949722146069140550e0, 3.64784832476320460504e0,
      1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1,
      1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0,
      1.78482653991729133580e0, 2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4,
      1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coeffs, r):
    acc = np.full_like(r, coeffs[-1])
    for c in coeffs[-2::-1]:
        np.multiply(acc, r, out=acc)
        np.add(acc, c, out=acc)
    return acc


def normal_quantile(p: np.ndarray) -> np.ndarray:
    """Standard normal quantile, vectorized, max abs error < 1e-9."""
    p = np.asarray(p, dtype=np.float64)
    if np.any((p <= 0.0) | (p >= 1.0)):
        raise ValueError("quantile argument must lie strictly inside (0, 1)")
    q = p - 0.5
    # central branch evaluated on the whole array (85% of draws land there);
    # tail entries produce garbage here and are overwritten below
    with np.errstate(all="ignore"):
        r = 0.180625 - q * q
        out = q * _poly(_A, r) / _poly(_B, r)

    tail = np.abs(q) > 0.425
    if np.any(tail):
        qt = q[tail]
        r = np.where(qt < 0, p[tail], 1.0 - p[tail])
        r = np.sqrt(-np.log(r))
        near = r <= 5.0
        val = np.empty_like(r)
        if np.any(near):
            rn = r[near] - 1.6
            val[near] = _poly(_C, rn) / _poly(_D, rn)
        if np.any(~near):
            rf = r[~near] - 5.0
            val[~near] = _poly(_E, rf) / _poly(_F, rf)
        out[tail] = np.where(qt < 0, -val, val)
    return out


class RngStream:
    """One reproducible variate stream, keyed by (master_seed, stream_id).

    Consecutive draws advance a Philox counter; the draw order is part of
    each sampler's contract. Distinct keys give statistically independent
    streams.
    """

    __slots__ = ("master_seed", "stream_id", "_bitgen")

    def __init__(self, master_seed: int, stream_id: int = 0):
        if not 0 <= master_seed < 2 ** 64:
            raise ValueError("master_seed must fit in 64 bits")
        if not 0 <= stream_id < 2 ** 64:
            raise ValueError("stream_id must fit in 64 bits")
        self.master_seed = master_seed
        self.stream_id = stream_id
        key = np.array([master_seed, stream_id], dtype=np.uint64)
        self._bitgen = np.random.Philox(key=key)

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"

    def raw(self, n: int) -> np.ndarray:
        return self._bitgen.random_raw(n)

    def uniform(self, n: int) -> np.ndarray:
        """n uniforms on the open interval (0, 1)."""
        return _to_uniform(self.raw(n))

    def normal(self, n: int) -> np.ndarray:
        return normal_quantile(self.uniform(n))

    def exponential(self, n: int) -> np.ndarray:
        return -np.log(self.uniform(n))

    def rayleigh(self, n: int) -> np.ndarray:
        return np.sqrt(2.0 * self.exponential(n))

    def arcsine(self, n: int) -> np.ndarray:
        """Arcsine(0,1) variates via A = sin^2(pi U / 2)."""
        s = np.sin(0.5 * np.pi * self.uniform(n))
        return s * s


def uniform_block(master_seed: int, stream_ids, n: int) -> np.ndarray:
    """Uniforms for many streams at once, one row per stream id.

    Row i is exactly what RngStream(master_seed, stream_ids[i]).uniform(n)
    would produce, so batch kernels and the one-path samplers agree.
    """
    ids = np.asarray(stream_ids, dtype=np.uint64)
    out = np.empty((ids.size, n), dtype=np.float64)
    for i, sid in enumerate(ids):
        out[i] = RngStream(master_seed, int(sid)).uniform(n)
    return out


def normal_block(master_seed: int, stream_ids, n: int) -> np.ndarray:
    return normal_quantile(uniform_block(master_seed, stream_ids, n))
