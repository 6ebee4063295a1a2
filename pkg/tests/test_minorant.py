"""Lower convex hull construction and the block shortcuts built on it."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vervaat import minorant
from vervaat.paths import LatticeWalk, SampledPath

float_paths = st.lists(
    st.floats(min_value=-8.0, max_value=8.0, allow_nan=False, width=32),
    min_size=2, max_size=30,
).map(lambda vs: SampledPath(1.0, np.asarray(vs, dtype=float)))


class TestHullIndices:
    def test_v_shape(self):
        idx = minorant.hull_indices([0.0, -2.0, 1.0])
        assert idx == [0, 1, 2]

    def test_concave_path_keeps_only_endpoints(self):
        idx = minorant.hull_indices([0.0, 3.0, 4.0, 3.0, 0.0])
        assert idx == [0, 4]

    def test_collinear_interior_points_merge(self):
        # exactly representable arithmetic progression
        idx = minorant.hull_indices([0.0, 0.5, 1.0, 1.5, 2.0])
        assert idx == [0, 4]

    def test_integer_walk_exactness(self):
        # all-integer values keep the cross-product comparisons exact
        idx = minorant.hull_indices([0, -1, -2, -1, -2, -3, 0])
        assert idx == [0, 2, 5, 6]


class TestConvexMinorant:
    def test_walk_slopes(self):
        w = LatticeWalk((-1, -1, 1, -1, -1, 1, 1))
        res = minorant.convex_minorant(w)
        # values 0,-1,-2,-1,-2,-3,-2,-1: hull through -2 at 2, -3 at 5
        np.testing.assert_array_equal(res.vertex_indices, [0, 2, 5, 7])
        np.testing.assert_allclose(res.slopes, [-1.0, -1.0 / 3.0, 1.0])
        assert res.n_segments == 3

    def test_sampled_path_slope_scaling(self):
        p = SampledPath(2.0, np.array([0.0, -1.0, 1.0]))
        res = minorant.convex_minorant(p)
        np.testing.assert_array_equal(res.vertex_indices, [0, 1, 2])
        np.testing.assert_allclose(res.slopes, [-1.0, 2.0])

    def test_values_at_vertices(self):
        p = SampledPath(1.0, np.array([0.0, -1.0, 1.0]))
        res = minorant.convex_minorant(p)
        np.testing.assert_array_equal(res.values_at_vertices(p), [0.0, -1.0, 1.0])

    @given(float_paths)
    def test_minorant_invariants(self, p):
        """Vertices bracket the path, slopes strictly increase, and the hull
        never sits above the path anywhere."""
        res = minorant.convex_minorant(p)
        vi = res.vertex_indices
        assert vi[0] == 0 and vi[-1] == p.n_steps
        assert np.all(np.diff(vi) > 0)
        if res.n_segments > 1:
            assert np.all(np.diff(res.slopes) > 0)
        hull = np.interp(np.arange(p.values.size), vi, p.values[vi])
        assert np.all(hull <= p.values + 1e-9)

    @given(float_paths)
    def test_idempotent_on_own_vertices(self, p):
        # the hull of the hull polygon is the hull itself, up to collinear
        # merges introduced by interpolation rounding; vertex values agree
        res = minorant.convex_minorant(p)
        vertex_path = SampledPath(1.0, p.values[res.vertex_indices].astype(float))
        again = minorant.convex_minorant(vertex_path)
        assert again.vertex_indices[0] == 0
        assert again.vertex_indices[-1] == res.n_segments


class TestBlockShortcuts:
    def test_last_slope_matches_full_hull(self):
        rng = np.random.default_rng(2026)
        vals = np.cumsum(rng.standard_normal((40, 33)), axis=1) * 0.2
        vals -= vals[:, :1]
        block = minorant.last_segment_slope_block(vals, 1.0)
        for r in range(vals.shape[0]):
            full = minorant.last_segment_slope(SampledPath(1.0, vals[r]))
            assert abs(block[r] - full) < 1e-12, r

    def test_segment_count_matches_full_hull(self):
        rng = np.random.default_rng(2027)
        vals = np.cumsum(rng.standard_normal((40, 33)), axis=1) * 0.2
        vals -= vals[:, :1]
        counts = minorant.segment_count_block(vals, 1.0)
        for r in range(vals.shape[0]):
            res = minorant.convex_minorant(SampledPath(1.0, vals[r]))
            assert counts[r] == res.n_segments, r

    def test_segment_count_stats(self):
        paths = [
            SampledPath(1.0, np.array([0.0, -1.0, 1.0])),   # 2 segments
            SampledPath(1.0, np.array([0.0, 1.0, 2.0])),    # 1 segment
            SampledPath(1.0, np.array([0.0, -1.0, -2.0])),  # 1 segment
        ]
        stats = minorant.segment_count_stats(paths)
        assert stats.histogram == {1: 2, 2: 1}
        assert abs(stats.mean - 4.0 / 3.0) < 1e-15
        assert stats.n == 3
        with pytest.raises(ValueError):
            minorant.segment_count_stats([])
