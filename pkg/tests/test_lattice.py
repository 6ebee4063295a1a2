"""Exact walk combinatorics against brute-force enumeration oracles."""

import itertools
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from vervaat import lattice
from vervaat.lattice import (
    ENUMERATION_CAP,
    ExactPmf,
    bijection_check,
    conditional_piece_laws,
    count_first_passage,
    empirical_z_pmf,
    enumerate_bridges,
    factorization_check,
    first_hit_index,
    helper_distribution,
    helper_uniform_check,
    rotate_at_min,
    z_pmf,
)
from vervaat.paths import LatticeWalk, quantile_discrete


def brute_first_passage(m: int, k: int) -> int:
    """Exhaustive count of length-m walks whose first visit to -k is at m."""
    if k == 0:
        return 1 if m == 0 else 0
    count = 0
    for steps in itertools.product((1, -1), repeat=m):
        s, first = 0, None
        for j, step in enumerate(steps, start=1):
            s += step
            if s == -k:
                first = j
                break
        if first == m:
            count += 1
    return count


small_pairs = [(2, -2), (4, -2), (5, -1), (6, -4), (7, -3), (8, -2), (9, -5)]


class TestExactPmf:
    def test_zero_masses_dropped(self):
        p = ExactPmf({1: Fraction(1, 2), 2: Fraction(0), 3: Fraction(1, 2)})
        assert p.support == (1, 3)
        assert p.mass(2) == 0
        assert p.mass(99) == 0

    def test_rejects_bad_total(self):
        with pytest.raises(ValueError):
            ExactPmf({1: Fraction(1, 2)})

    def test_equality_and_hash(self):
        p = ExactPmf({1: Fraction(1, 4), 3: Fraction(3, 4)})
        q = ExactPmf({3: Fraction(3, 4), 1: Fraction(1, 4)})
        assert p == q
        assert hash(p) == hash(q)
        assert p != ExactPmf({1: Fraction(1)})


class TestEnumeration:
    def test_counts_are_binomial(self):
        from math import comb
        for n, a in small_pairs:
            ens = enumerate_bridges(n, a)
            assert len(ens.walks) == comb(n, (n + a) // 2)
            assert all(sum(w) == a for w in ens.walks)

    def test_parity_and_range_rejected(self):
        with pytest.raises(ValueError):
            enumerate_bridges(4, -1)
        with pytest.raises(ValueError):
            enumerate_bridges(4, -6)
        with pytest.raises(ValueError):
            enumerate_bridges(0, 0)

    def test_cap(self):
        with pytest.raises(ValueError):
            enumerate_bridges(ENUMERATION_CAP + 2, 0)


class TestRotation:
    def test_known_rotation(self):
        steps = (1, -1, -1, 1, 1, -1)
        rotated, k = rotate_at_min(steps)
        assert rotated == (1, 1, -1, 1, -1, -1)
        assert k == 3

    def test_first_hit_index(self):
        assert first_hit_index((-1, 1, -1), -1) == 1
        assert first_hit_index((1, 1, -1), -1) is None
        assert first_hit_index((1, -1, -1), -2) is None


class TestFirstPassageCount:
    def test_matches_brute_force(self):
        for m in range(0, 11):
            for k in range(0, m + 2):
                assert count_first_passage(m, k) == brute_first_passage(m, k), (m, k)

    def test_known_values(self):
        assert count_first_passage(0, 0) == 1
        assert count_first_passage(3, 1) == 1
        assert count_first_passage(5, 1) == 2
        assert count_first_passage(4, 1) == 0  # parity


class TestFirstReturnLaw:
    def test_small_bridge_pmf(self):
        p = z_pmf(4, -2)
        assert p.mass(1) == Fraction(1, 4)
        assert p.mass(3) == Fraction(3, 4)
        assert p.support == (1, 3)

    def test_formula_equals_enumeration(self):
        for n, a in small_pairs:
            if a >= 0:
                continue
            assert z_pmf(n, a) == empirical_z_pmf(n, a), (n, a)

    def test_support_is_odd(self):
        assert all(l % 2 == 1 for l in z_pmf(10, -2).support)

    def test_needs_negative_endpoint(self):
        with pytest.raises(ValueError):
            z_pmf(4, 2)

    @settings(deadline=None, max_examples=25)
    @given(st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=4))
    def test_formula_equals_enumeration_property(self, drop, extra_pairs):
        """Closed-form first-return masses agree with exhaustive tallying.

        n = |a| + 2m is admissible for every negative endpoint a.
        """
        a = -drop
        n = drop + 2 * extra_pairs
        assert z_pmf(n, a) == empirical_z_pmf(n, a)


class TestPieceStructure:
    def test_piece_supports(self):
        n, a, l = 8, -2, 3
        pmf1, pmf2, exact = conditional_piece_laws(n, a, l)
        assert exact
        for p1 in pmf1.support:
            assert first_hit_index(p1, -1) == l
        for p2 in pmf2.support:
            # post piece runs from the return point down to the endpoint
            assert first_hit_index(p2, a + 1) == n - l

    def test_terminal_return_leaves_empty_second_piece(self):
        pmf1, pmf2, exact = conditional_piece_laws(5, -1, 5)
        assert exact
        assert pmf2.support == ((),)

    def test_impossible_return_time_rejected(self):
        with pytest.raises(ValueError):
            conditional_piece_laws(4, -2, 2)

    def test_factorization_spot(self):
        assert factorization_check(8, -2)
        assert factorization_check(7, -3)


class TestHelperOffset:
    def test_uniform_over_return_time_values(self):
        assert helper_uniform_check(8, -2)
        assert helper_uniform_check(9, -1)

    def test_distribution_structure(self):
        for image, law in helper_distribution(6, -2).items():
            z = first_hit_index(image, -1)
            assert len(law) == z
            assert all(mass == Fraction(1, z) for mass in law.values())


class TestBijection:
    def test_spot_pairs(self):
        assert bijection_check(6, -2)
        assert bijection_check(7, -1)
        assert bijection_check(8, -4)


class TestQuantileAgreesWithRotation:
    def test_image_multisets_equal(self):
        """Rotation and height-reordering hit the same images equally often."""
        for n, a in ((6, -2), (8, -4), (9, -3)):
            ens = enumerate_bridges(n, a)
            v_images = Counter(rotate_at_min(w)[0] for w in ens.walks)
            q_images = Counter(quantile_discrete(LatticeWalk(w)).steps
                               for w in ens.walks)
            assert v_images == q_images, (n, a)
