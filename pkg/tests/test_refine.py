"""Conditional refinement: exact identities, hand cases, and law checks."""

import math

import numpy as np
from scipy.special import ndtr

from vervaat import refine
from vervaat import samplers as sp
from vervaat.gof import ks_one_sample
from vervaat.paths import SampledPath, vervaat_grid
from vervaat.rng import uniform_block

SEED = 771441


class TestIntervalMinima:
    def test_unit_uniform_gives_grid_minimum(self):
        vals = np.array([[0.0, 1.0, -0.5, 0.25]])
        u = np.ones((1, 3))
        m = refine.interval_minima(vals, 1.0, u)
        np.testing.assert_array_equal(m, [[0.0, -0.5, -0.5]])

    def test_never_above_endpoints(self):
        vals = sp.bridge_block(SEED, range(200), -1.0, 1.0, 16)
        u = uniform_block(SEED, np.arange(1000, 1200, dtype=np.uint64), 16)
        m = refine.interval_minima(vals, 1.0, u)
        assert np.all(m <= np.minimum(vals[:, :-1], vals[:, 1:]))

    def test_quantile_identity_with_dip_probability(self):
        # the inversion and the dip formula are the same law: feeding the
        # dip probability of level L back in as the uniform lands exactly on L
        a, b, h, level = 0.6, 0.4, 0.125, 0.1
        ustar = math.exp(-2.0 * (a - level) * (b - level) / h)
        m = refine.interval_minima(np.array([[a, b]]), h, np.array([[ustar]]))
        assert abs(m[0, 0] - level) < 1e-12


class TestMinLocationFraction:
    def test_edges_and_flat(self):
        a = np.array([1.0, 0.0, 0.5])
        b = np.array([0.0, 1.0, 0.5])
        m = np.array([0.0, 0.0, 0.5])
        np.testing.assert_allclose(refine.min_location_fraction(a, b, m),
                                   [1.0, 0.0, 0.5])


class TestRefinedArgmin:
    def test_hand_case(self):
        vals = np.array([[0.0, -1.0, 2.0, 3.0]])
        u = np.ones((1, 3))
        ref = refine.refined_argmin(vals, 1.0, refine.interval_minima(vals, 1.0, u))
        assert ref.index[0] == 0
        assert abs(ref.time[0] - 1.0 / 3.0) < 1e-15
        assert ref.value[0] == -1.0
        assert ref.gap[0] == 0.0

    def test_refined_minimum_below_grid_minimum(self):
        vals = sp.bridge_block(SEED, range(300), -1.0, 1.0, 32)
        u = uniform_block(SEED, np.arange(2000, 2300, dtype=np.uint64), 32)
        ref = refine.refined_argmin(vals, 1.0, refine.interval_minima(vals, 1.0, u))
        assert np.all(ref.gap >= 0.0)
        assert np.all(ref.value <= vals.min(axis=1))
        assert np.all((ref.time >= 0.0) & (ref.time <= 1.0))


class TestFirstPassageBelow:
    def test_hand_case(self):
        vals = np.array([[0.0, -1.0, 2.0, 3.0]])
        u = np.ones((1, 3))
        minima = refine.interval_minima(vals, 1.0, u)
        t = refine.first_passage_below(vals, 1.0, minima, np.array([-0.5]))
        # descent occupies the whole first interval; level sits halfway,
        # first-passage scaling squares the fraction
        assert abs(t[0] - 0.25 / 3.0) < 1e-15

    def test_unreachable_level_is_nan(self):
        vals = np.array([[0.0, 1.0, 2.0]])
        minima = refine.interval_minima(vals, 1.0, np.full((1, 2), 0.5))
        t = refine.first_passage_below(vals, 1.0, minima, np.array([-50.0]))
        assert np.isnan(t[0])

    def test_passage_law_unbiased_on_coarse_grid(self):
        # refined hitting times of level -1 for plain Brownian motion on a
        # 64-cell grid vs the reflection-principle law, conditioned on
        # hitting before 1; the refinement is what removes the grid bias
        reps, n = 4000, 64
        vals = sp.bm_block(SEED, range(3000, 3000 + reps), n)
        u = uniform_block(SEED, np.arange(9000, 9000 + reps, dtype=np.uint64), n)
        minima = refine.interval_minima(vals, 1.0, u)
        t = refine.first_passage_below(vals, 1.0, minima, np.full(reps, -1.0))
        hits = t[~np.isnan(t)]
        total = 2.0 * (1.0 - ndtr(1.0))

        def cdf(s):
            return 2.0 * (1.0 - ndtr(1.0 / np.sqrt(np.asarray(s)))) / total

        res = ks_one_sample(hits, cdf)
        assert res.statistic < 0.05


class TestRefinedFirstReturn:
    def test_return_law_on_coarse_grid(self):
        from vervaat.closed_forms import F_z
        reps, n, lam = 4000, 64, -1.0
        vals = sp.bridge_block(SEED, range(5000, 5000 + reps), lam, 1.0, n)
        u = uniform_block(SEED, np.arange(15000, 15000 + reps, dtype=np.uint64), n)
        fr = refine.refined_first_return(vals, 1.0, u, lam)
        assert np.all((fr.z > 0.0) & (fr.z <= 1.0))
        assert np.all(fr.anchor_time >= 0.0)
        res = ks_one_sample(fr.z, lambda s: F_z(lam, s))
        assert res.statistic < 0.05


class TestRotateBlock:
    def test_hand_case(self):
        vals = np.array([[0.0, 2.0, -1.0, 1.0]])
        rot, tau = refine.rotate_block(vals)
        assert tau[0] == 2
        np.testing.assert_array_equal(rot, [[0.0, 2.0, 4.0, 1.0]])

    def test_zero_rotation_is_identity(self):
        vals = np.array([[0.0, 1.0, 2.0, 3.0]])
        rot, tau = refine.rotate_block(vals)
        assert tau[0] == 0
        np.testing.assert_array_equal(rot, vals)

    def test_rows_match_single_path_transform(self):
        vals = sp.bridge_block(SEED, range(50), -1.0, 1.0, 32)
        rot, _ = refine.rotate_block(vals)
        for i in range(50):
            single = vervaat_grid(SampledPath(1.0, vals[i]))
            np.testing.assert_array_equal(rot[i], single.values)

    def test_complementary_rotation_inverts(self):
        vals = sp.bridge_block(SEED, range(60, 100), -1.0, 1.0, 32)
        rot, tau = refine.rotate_block(vals)
        back, _ = refine.rotate_block(rot, tau=(32 - tau) % 32)
        np.testing.assert_allclose(back, vals, atol=1e-12)


class TestMarginalColumns:
    def test_nearest_grid_rounding(self):
        vals = np.arange(10.0)[None, :]
        out = refine.marginal_columns(vals, 1.0, [0.25, 0.5, 0.33])
        np.testing.assert_array_equal(out, [[2.0, 4.0, 3.0]])


class TestLineCrossing:
    def test_certain_and_negligible(self):
        vals = np.array([[1.0, -1.0, 5.0]])
        line = np.zeros(3)
        p = refine.line_crossing_probability(vals, np.array([0.0, 0.5, 1.0]), line)
        assert p[0, 0] == 1.0  # endpoint already below
        assert p[0, 1] == 1.0
        far = refine.line_crossing_probability(vals + 100.0,
                                               np.array([0.0, 0.5, 1.0]), line)
        assert np.all(far < 1e-30)

    def test_floor_equal_to_line_gives_zero(self):
        vals = np.array([[1.0, 1.0, 1.0]])
        t = np.array([0.0, 0.5, 1.0])
        line = np.zeros(3)
        p = refine.line_crossing_probability(vals, t, line, line)
        np.testing.assert_array_equal(p, 0.0)

    def test_conditional_formula_matches_rejection(self):
        # one interval: dip-below-L probability conditioned on staying
        # above F, against brute rejection sampling of interval minima
        a, b, h, level, floor = 0.5, 0.7, 0.25, 0.2, 0.05
        reps = 200000
        u = uniform_block(SEED, np.arange(20000, 20000 + 1, dtype=np.uint64), reps)
        m = refine.interval_minima(
            np.tile([a, b], (reps, 1)), h, u.reshape(reps, 1))
        keep = m[:, 0] > floor
        freq = np.mean(m[keep, 0] <= level)
        p = refine.line_crossing_probability(
            np.array([[a, b]]), np.array([0.0, h]),
            np.array([[level, level]]), np.array([[floor, floor]]))[0, 0]
        se = math.sqrt(p * (1.0 - p) / keep.sum())
        assert abs(freq - p) < 4.0 * se


class TestFirstLineCrossing:
    def test_grid_crossing_interpolates(self):
        vals = np.array([[0.5, 2.0, -2.0]])
        t = np.array([0.0, 0.5, 1.0])
        fire = np.zeros((1, 2), dtype=bool)
        out = refine.first_line_crossing(vals, t, np.zeros(3), fire)
        assert abs(out[0] - 0.75) < 1e-15

    def test_start_on_line_does_not_count(self):
        vals = np.array([[0.0, 1.0, 2.0]])
        t = np.array([0.0, 0.5, 1.0])
        fire = np.zeros((1, 2), dtype=bool)
        assert np.isnan(refine.first_line_crossing(vals, t, np.zeros(3), fire)[0])

    def test_fired_interval_reports_midpoint(self):
        vals = np.array([[1.0, 1.0, 1.0]])
        t = np.array([0.0, 0.5, 1.0])
        fire = np.array([[False, True]])
        out = refine.first_line_crossing(vals, t, np.zeros(3), fire)
        assert out[0] == 0.75


class TestRefinedTimeGrids:
    def test_origin_grid_structure(self):
        t = refine.origin_refined_times(8)
        assert t[0] == 0.0
        assert t[-1] == 1.0
        assert np.all(np.diff(t) > 0.0)
        assert t.size == 8 + 24 + 1
        assert t[1] == (1.0 / 8) * 2.0 ** -24

    def test_endpoint_grid_mirrors_origin(self):
        a = refine.origin_refined_times(8)
        b = refine.endpoint_refined_times(8)
        np.testing.assert_allclose(b, 1.0 - a[::-1], atol=1e-18)
        assert np.all(np.diff(b) > 0.0)
