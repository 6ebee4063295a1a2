"""Deterministic path containers and transforms."""

import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vervaat.paths import (
    LatticeWalk,
    SampledPath,
    argmin_first,
    dual_reverse,
    embed_walk,
    exchange_straddling,
    first_return_time,
    quantile_discrete,
    shift_cyclic,
    vervaat_discrete,
    vervaat_grid,
    zero_set_indices,
)

walks = st.lists(st.sampled_from([1, -1]), min_size=1, max_size=40).map(
    lambda s: LatticeWalk(tuple(s)))


class TestLatticeWalk:
    def test_values_accumulate_steps(self):
        w = LatticeWalk((1, -1, -1, 1))
        assert w.values == (0, 1, 0, -1, 0)
        assert w.endpoint == 0
        assert w.n == 4

    def test_step_validation(self):
        with pytest.raises(ValueError):
            LatticeWalk((1, 0, -1))

    def test_string_round_trip(self):
        w = LatticeWalk.from_string("+-+--")
        assert w.steps == (1, -1, 1, -1, -1)
        assert w.to_string() == "+-+--"
        with pytest.raises(ValueError):
            LatticeWalk.from_string("+x-")


class TestSampledPath:
    def test_grid_and_interpolation(self):
        p = SampledPath(2.0, np.array([0.0, 1.0, 0.5]))
        np.testing.assert_array_equal(p.times, [0.0, 1.0, 2.0])
        assert p.value_at(0.5) == 0.5
        assert p.value_at(1.5) == 0.75

    def test_validation(self):
        with pytest.raises(ValueError):
            SampledPath(1.0, np.array([0.0]))
        with pytest.raises(ValueError):
            SampledPath(0.0, np.array([0.0, 1.0]))

    def test_csv_round_trip(self):
        p = SampledPath(1.0, np.array([0.0, 0.25, -0.125, 1.0]))
        buf = io.StringIO()
        p.write_csv(buf)
        buf.seek(0)
        q = SampledPath.read_csv(buf)
        assert q.duration == p.duration
        np.testing.assert_array_equal(q.values, p.values)


class TestArgmin:
    def test_walk_argmin_skips_start(self):
        # the walk revisits its starting height 0 at index 2; index 0 is
        # excluded from the search, so 2 is the first admissible minimum
        w = LatticeWalk((1, -1, 1, 1))
        assert argmin_first(w) == 2

    def test_walk_first_tie_wins(self):
        w = LatticeWalk((-1, 1, -1, 1))
        assert argmin_first(w) == 1

    def test_grid_argmin_includes_endpoints(self):
        p = SampledPath(1.0, np.array([0.0, 0.5, 0.25]))
        assert argmin_first(p) == 0


class TestVervaatDiscrete:
    def test_known_rotation(self):
        w = LatticeWalk((1, -1, -1, 1, 1, -1))  # min -1 first hit at index 3
        v, k = vervaat_discrete(w)
        assert k == 3
        assert v.steps == (1, 1, -1, 1, -1, -1)

    @given(walks)
    def test_rotation_is_cyclic(self, w):
        """The rotated walk is steps[tau:] + steps[:tau], nothing else."""
        v, k = vervaat_discrete(w)
        tau = w.n - k
        assert v.steps == w.steps[tau:] + w.steps[:tau]

    @given(walks)
    def test_stays_above_endpoint_floor(self, w):
        # before the wrap point the rotated walk is >= 0; strictly past it,
        # strictly above its own endpoint; the wrap point itself clears the
        # endpoint exactly when the minimum was negative
        v, k = vervaat_discrete(w)
        vals = v.values
        assert all(vals[j] >= 0 for j in range(k + 1))
        assert all(vals[j] > vals[v.n] for j in range(k + 1, v.n))
        if min(w.values[1:]) < 0 and k < v.n:
            assert vals[k] > vals[v.n]

    @given(walks)
    def test_shift_back_recovers_walk(self, w):
        v, k = vervaat_discrete(w)
        p = embed_walk(v, duration=1.0)
        back = shift_cyclic(p, k / w.n)
        np.testing.assert_allclose(back.values, np.asarray(w.values, float),
                                   atol=1e-12)

    @given(walks)
    def test_grid_rotation_matches_discrete_on_bridges(self, w):
        # grid argmin runs over 0..N, which only agrees with the walk
        # convention when the walk dips below its start
        if min(w.values[1:]) >= 0:
            return
        v, _ = vervaat_discrete(w)
        rotated = vervaat_grid(embed_walk(w))
        np.testing.assert_array_equal(rotated.values, np.asarray(v.values, float))


class TestQuantileDiscrete:
    def test_known_reordering(self):
        w = LatticeWalk((1, 1, -1, -1))
        q = quantile_discrete(w)
        # start heights: 0, 1, 2, 1; stable sort keys (0,1),(1,2),(1,4),(2,3)
        assert q.steps == (1, 1, -1, -1)

    def test_reorders_by_start_height(self):
        w = LatticeWalk((-1, 1, 1, -1))
        q = quantile_discrete(w)
        # start heights 0,-1,0,1: the step started lowest moves first
        assert q.steps == (1, -1, 1, -1)

    @given(walks)
    def test_preserves_increment_multiset(self, w):
        q = quantile_discrete(w)
        assert sorted(q.steps) == sorted(w.steps)
        assert q.endpoint == w.endpoint


class TestGridTransforms:
    def test_shift_validation(self):
        p = SampledPath(1.0, np.array([0.0, 1.0, 0.0]))
        with pytest.raises(ValueError):
            shift_cyclic(p, 1.5)

    def test_shift_zero_is_identity(self):
        p = SampledPath(1.0, np.array([0.0, 0.5, -0.25, 0.75]))
        np.testing.assert_array_equal(shift_cyclic(p, 0.0).values, p.values)

    def test_dual_reverse(self):
        p = SampledPath(1.0, np.array([0.0, 2.0, -1.0]))
        d = dual_reverse(p, 1.0)
        np.testing.assert_array_equal(d.values, [0.0, 3.0, 1.0])

    def test_zero_set_exact_and_crossing(self):
        p = SampledPath(1.0, np.array([0.0, 1.0, -1.0, -0.5, 0.0]))
        np.testing.assert_array_equal(zero_set_indices(p), [0, 2, 4])

    def test_first_return(self):
        p = SampledPath(4.0, np.array([0.0, 1.0, -1.0, 0.0, 2.0]))
        assert first_return_time(p, 0.0) == 2.0
        assert first_return_time(p, 0.0, after=2.5) == 3.0
        assert first_return_time(p, 5.0) is None


class TestExchangeStraddling:
    def test_swaps_excursions(self):
        # two unit excursions; straddle the second, it moves to the front
        v = np.array([0.0, 1.0, 0.0, -2.0, 0.0])
        p = SampledPath(4.0, v)
        out = exchange_straddling(p, 3.0)
        np.testing.assert_array_equal(out.values, [0.0, -2.0, 0.0, 1.0, 0.0])

    def test_rejects_zero_straddle_point(self):
        p = SampledPath(4.0, np.array([0.0, 1.0, 0.0, -2.0, 0.0]))
        with pytest.raises(ValueError):
            exchange_straddling(p, 2.0)

    def test_open_final_stretch_falls_back_to_endpoint(self):
        # path never returns to zero after index 2: the open stretch ends at
        # the final grid point and its last value is truncated by the splice
        v = np.array([0.0, -1.0, 0.0, 1.0, 2.0])
        p = SampledPath(4.0, v)
        out = exchange_straddling(p, 3.0)
        np.testing.assert_array_equal(out.values, [0.0, 1.0, 0.0, -1.0, 0.0])
