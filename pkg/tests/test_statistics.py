"""
Tests for interval statistics of Kloosterman angles.
"""

import cmath
import math
import pytest
import numpy as np
from hypothesis import given, strategies as st

from engine.bounds import omega_r
from engine.core_arith import primes_in
from engine.chebyshev import power_constant
from engine.statistics import (
    angle_histogram,
    boundary_count,
    d_k_max_over_h,
    d_k_sum,
    d_k_twisted,
    empirical_cdf_discrepancy,
    exact_discrepancy,
    interval_report,
    interval_sum,
    large_value_count,
    moment_v,
    moment_v_abs,
    sato_tate_main,
    sign_count,
    sign_lower_bound_check,
    small_value_count,
    st_cdf,
    twisted_report,
    vst_full_sum,
)
from engine.table_cache import get_angles
from shared.exceptions import DomainError, UnsupportedParameterError
from shared.models import IntervalSpec


def iv(M, N):
    return IntervalSpec(M=M, N=N)


class TestIntervalSums:
    def test_examples(self, sqrt5):
        assert d_k_sum(iv(0, 4), 5, 1, 1) == pytest.approx(1 / sqrt5, abs=1e-9)
        assert d_k_sum(iv(0, 5), 5, 1, 1) == pytest.approx(0.0, abs=1e-9)
        assert d_k_sum(iv(3, 0), 5, 1, 1) == 0.0

    def test_residue_hits_counted(self):
        value, hits = interval_sum(iv(0, 12), 5, 1, 1)
        assert hits == 2

    def test_shift_invariance(self):
        p = 101
        for M in (0, 17, 90):
            assert d_k_sum(iv(M, 30), p, 3, 2) == d_k_sum(iv(M + p, 30), p, 3, 2)

    def test_full_period_collapse(self):
        p, k = 503, 3
        full = d_k_sum(iv(0, p), p, 1, k)
        zero_term = d_k_sum(iv(-1, 1), p, 1, k)
        assert full == pytest.approx(vst_full_sum(p, k).params["value"] + zero_term, abs=1e-9 * (k + 1))

    def test_twist_divisible_by_p(self):
        with pytest.raises(DomainError):
            d_k_sum(iv(0, 3), 5, 10, 1)

    def test_twisted_trivial_character(self):
        p = 101
        assert d_k_twisted(iv(4, 40), p, 2, 0, 3) == pytest.approx(d_k_sum(iv(4, 40), p, 2, 3), abs=1e-12)
        assert d_k_twisted(iv(4, 0), p, 2, 7, 3) == 0

    def test_twisted_oracle(self, table5, sqrt5):
        value = d_k_twisted(iv(0, 5), 5, 1, 2, 1)
        expected = sum(table5[a] / sqrt5 * cmath.exp(2j * math.pi * 2 * a / 5) for a in range(1, 6))
        assert abs(value - expected) < 1e-9

    def test_vst_examples(self, sqrt5):
        report = vst_full_sum(5, 1)
        assert report.observed == pytest.approx(1 / sqrt5, abs=1e-9)
        assert report.bound == pytest.approx(sqrt5)
        assert report.ratio == pytest.approx(0.2, abs=1e-9)

        report = vst_full_sum(5, 2)
        assert report.observed == pytest.approx(0.2, abs=1e-9)
        assert report.bound == pytest.approx(1.5 * sqrt5)

        assert vst_full_sum(7, 1).observed == pytest.approx(1 / math.sqrt(7), abs=1e-9)

    def test_katz_bound_small_primes(self):
        for p in primes_in(2, 503):
            for k in range(1, 21):
                assert vst_full_sum(p, k).ratio <= 1 + 1e-5

    @pytest.mark.slow
    def test_katz_bound_up_to_2003(self):
        for p in primes_in(503, 2003):
            for k in range(1, 21):
                assert vst_full_sum(p, k).observed <= 0.5 * (k + 1) * math.sqrt(p) + 1e-5 * math.sqrt(p)

    def test_interval_report(self):
        report = interval_report(iv(10, 50), 1009, 3, 2)
        assert report.bound > 0
        assert report.ratio == pytest.approx(report.observed / report.bound)
        assert 1 <= report.params["r_star"] <= 8
        assert interval_report(iv(10, 50), 1009, 3, 2, r=1).params["r_star"] == 1

    def test_twisted_report(self):
        report = twisted_report(iv(0, 60), 1009, 1, 5, 1)
        assert report.observed >= 0 and report.bound > 0

    def test_max_over_h_exhaustive(self):
        p, k = 101, 2
        interval = iv(5, 20)
        value, best_h, sampled = d_k_max_over_h(interval, p, k)
        direct = max(abs(d_k_sum(interval, p, h, k)) for h in range(1, p))
        assert not sampled
        assert value == pytest.approx(direct, abs=1e-9)
        assert abs(d_k_sum(interval, p, best_h, k)) == pytest.approx(value, abs=1e-9)

    def test_max_over_h_sampled_is_seeded(self):
        p = 10007
        first = d_k_max_over_h(iv(0, 40), p, 1, seed=7)
        second = d_k_max_over_h(iv(0, 40), p, 1, seed=7)
        assert first == second and first[2]

    def test_twisted_sum_uses_twisted_angles(self):
        p, h = 101, 7
        angles = get_angles(p, h)
        expected = sum(2 * math.cos(angles[a]) for a in range(5, 35))
        assert d_k_sum(iv(4, 30), p, h, 1) == pytest.approx(expected, abs=1e-9)

    @pytest.mark.slow
    def test_short_intervals_at_large_prime(self):
        p = 1_000_003
        N = math.ceil(p ** 0.4)
        rng = np.random.default_rng(2024)
        ratios = []
        for _ in range(100):
            M, h = int(rng.integers(0, p)), int(rng.integers(1, p))
            report = interval_report(iv(M, N), p, h, 1, r=2)
            assert report.bound == pytest.approx(omega_r(p, N, 2))
            ratios.append(report.ratio)
        assert max(ratios) <= 1


class TestMoments:
    def test_second_moment_identity(self):
        p = 1009
        report = moment_v(IntervalSpec.full_period(p), p, 1, 2)
        assert report.observed == pytest.approx(p * p - p - 1, abs=1e-6 * p)
        assert report.main_term == pytest.approx((p - 1) * p)

    def test_odd_signed_moment_has_no_main_term(self):
        report = moment_v(IntervalSpec.full_period(101), 101, 1, 3)
        assert report.main_term == 0.0 and report.ratio is None
        assert report.error_ratio >= 0

    def test_non_integer_signed(self):
        with pytest.raises(UnsupportedParameterError):
            moment_v(iv(0, 10), 101, 1, 1.5)

    def test_absolute_moment(self):
        p = 1009
        report = moment_v_abs(IntervalSpec.full_period(p), p, 1, 1.5)
        assert report.main_term == pytest.approx(power_constant(1.5) * (p - 1) * p ** 0.75)
        assert report.ratio == pytest.approx(1.0, abs=0.1)

    @pytest.mark.slow
    @pytest.mark.parametrize("alpha", [1, 2, 3, 4])
    def test_main_terms_at_large_p(self, alpha):
        p = 100003
        report = moment_v_abs(IntervalSpec.full_period(p), p, 1, alpha)
        assert report.ratio == pytest.approx(1.0, abs=0.05)


class TestCounts:
    def test_sign_example(self):
        report = sign_count(iv(0, 4), 5, 1)
        assert report.positive.observed == 3
        assert report.negative.observed == 1
        assert report.zero_bucket == 0

    def test_sign_empty(self):
        report = sign_count(iv(0, 0), 5, 1)
        assert (report.positive.observed, report.negative.observed, report.zero_bucket) == (0, 0, 0)

    def test_sign_residue_goes_to_zero_bucket(self):
        report = sign_count(iv(0, 5), 5, 1)
        assert report.zero_bucket == 1 and report.residue_hits == 1
        assert report.positive.observed + report.negative.observed + report.zero_bucket == 5

    def test_sign_partition_full_period(self):
        p = 1009
        report = sign_count(IntervalSpec.full_period(p), p, 1)
        assert report.positive.observed + report.negative.observed + report.zero_bucket == p - 1
        check = sign_lower_bound_check(report)
        assert check["positive_ok"] and check["negative_ok"]

    @pytest.mark.parametrize("delta", [0.1, 0.25, 0.5, 0.75])
    def test_complementarity(self, delta):
        p, interval = 1009, iv(3, 700)
        small = small_value_count(interval, p, 2, delta)
        large = large_value_count(interval, p, 2, delta)
        assert small.observed + large.observed - boundary_count(interval, p, 2, delta) == interval.N

    def test_delta_one(self):
        p = 1009
        interval = IntervalSpec.full_period(p)
        assert small_value_count(interval, p, 1, 1.0).observed == p - 1
        assert large_value_count(interval, p, 1, 1.0).observed == 0

    def test_delta_domain(self):
        with pytest.raises(DomainError):
            small_value_count(iv(0, 4), 5, 1, 0.0)
        with pytest.raises(DomainError):
            sato_tate_main(1.2)

    def test_main_terms(self):
        small, large = sato_tate_main(0.5)
        assert small == pytest.approx(0.608998, abs=1e-6)
        assert small + large == pytest.approx(1.0)

    @pytest.mark.slow
    def test_large_p_counts(self):
        p = 100003
        interval = IntervalSpec.full_period(p)
        report = sign_count(interval, p, 1)
        assert abs(report.positive.observed - interval.N / 2) / interval.N <= 0.01
        for delta in (0.25, 0.5, 0.75):
            small_mass, large_mass = sato_tate_main(delta)
            assert small_value_count(interval, p, 1, delta).fraction == pytest.approx(small_mass, abs=0.02)
            assert large_value_count(interval, p, 1, delta).fraction == pytest.approx(large_mass, abs=0.02)


class TestDistribution:
    def test_st_cdf_examples(self):
        assert st_cdf(0, math.pi) == pytest.approx(1.0)
        assert st_cdf(0, math.pi / 2) == pytest.approx(0.5)
        assert st_cdf(math.pi / 3, 2 * math.pi / 3) == pytest.approx(1 / 3 + math.sqrt(3) / (2 * math.pi))

    def test_st_cdf_domain(self):
        with pytest.raises(DomainError):
            st_cdf(1.0, 0.5)
        with pytest.raises(DomainError):
            st_cdf(0.0, 4.0)

    @given(st.floats(min_value=0, max_value=math.pi), st.floats(min_value=0, max_value=math.pi))
    def test_st_cdf_monotone(self, t1, t2):
        lo, hi = sorted((t1, t2))
        assert st_cdf(0, lo) <= st_cdf(0, hi) + 1e-15

    def test_discrepancy_scale(self):
        p = 1009
        value = empirical_cdf_discrepancy(IntervalSpec.full_period(p), p)
        assert 0 < value <= 10 * p ** -0.25

    def test_grid_discrepancy_below_exact(self):
        p = 1009
        interval = iv(0, 300)
        assert empirical_cdf_discrepancy(interval, p, 2) <= exact_discrepancy(interval, p, 2) + 1e-12

    def test_single_point(self):
        assert 0 < exact_discrepancy(iv(0, 1), 101) <= 1

    def test_exact_discrepancy_at_sample_points(self):
        p, h = 101, 3
        angles = get_angles(p, h)
        theta = sorted(angles[a] for a in range(1, 41))
        n = len(theta)
        expected = max(
            max((i + 1) / n - st_cdf(0, t), st_cdf(0, t) - i / n)
            for i, t in enumerate(theta)
        )
        assert exact_discrepancy(iv(0, 40), p, h) == pytest.approx(expected, abs=1e-12)

    def test_empty_interval(self):
        with pytest.raises(DomainError):
            empirical_cdf_discrepancy(iv(0, 0), 101)
        with pytest.raises(DomainError):
            exact_discrepancy(iv(0, 0), 101)

    def test_histogram(self):
        rows = angle_histogram(IntervalSpec.full_period(1009), 1009, bins=8)
        assert len(rows) == 8
        assert sum(r[2] for r in rows) == pytest.approx(1.0)
        assert sum(r[3] for r in rows) == pytest.approx(1.0)

    @pytest.mark.slow
    def test_discrepancy_decreases(self):
        values = [empirical_cdf_discrepancy(IntervalSpec.full_period(p), p) for p in (1009, 10007, 100003)]
        assert values[0] > values[1] > values[2]
        for p, value in zip((1009, 10007, 100003), values):
            assert value <= 10 * p ** -0.25
