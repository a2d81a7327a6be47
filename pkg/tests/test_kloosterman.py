"""
Tests for the Bluestein transform, Kloosterman tables and angles.
"""

import math
import time
import pytest
import numpy as np

from engine.core_arith import primes_in
from engine.dft import BluesteinDFT, bluestein_dft
from engine.kloosterman import (
    build_angles,
    build_table,
    kloosterman_complex,
    kloosterman_naive,
    table_moments,
    zero_bucket,
)
from shared.config import settings
from shared.exceptions import CostGuardError, DomainError
from shared.models import TableMethod

P5_TABLE = [-1.0, 0.381966, -3.236068, 1.236068, 2.618034]


def check_twists(p):
    """S(a,b;p) = S(ab,1;p) and S(a,b;p) = S(b,a;p) over all nonzero a, b."""
    stack = np.stack([build_table(b, p).values for b in range(1, p)])
    a = np.arange(p)
    tol = 1e-9 * math.sqrt(p)
    for b in range(1, p):
        assert np.max(np.abs(stack[b - 1] - stack[0][(a * b) % p])) <= tol
    inner = stack[:, 1:]
    assert np.max(np.abs(inner - inner.T)) <= tol


class TestBluestein:
    @pytest.mark.parametrize("n", [1, 2, 5, 7, 16, 101, 257])
    def test_matches_numpy(self, n):
        rng = np.random.default_rng(n)
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        np.testing.assert_allclose(bluestein_dft(x, sign=-1), np.fft.fft(x), atol=1e-9 * n)
        np.testing.assert_allclose(BluesteinDFT(n, sign=1)(x), n * np.fft.ifft(x), atol=1e-9 * n)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            BluesteinDFT(0)
        with pytest.raises(ValueError):
            BluesteinDFT(5, sign=2)
        with pytest.raises(ValueError):
            BluesteinDFT(5)(np.ones(4))


class TestPointwise:
    def test_examples(self):
        assert kloosterman_naive(0, 1, 7) == pytest.approx(-1.0, abs=1e-12)
        assert kloosterman_naive(1, 1, 5) == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-12)
        expected = 2 * math.cos(4 * math.pi / 7) + 4 * math.cos(2 * math.pi / 7)
        assert kloosterman_naive(1, 1, 7) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(2.0489, abs=1e-4)

    @pytest.mark.parametrize("p", [5, 7, 101])
    def test_sum_is_real(self, p):
        for a in range(p):
            z = kloosterman_complex(a, 3, p)
            assert abs(z.imag) < 1e-9 * math.sqrt(p)
            assert z.real == pytest.approx(kloosterman_naive(a, 3, p), abs=1e-9)

    def test_composite_modulus(self):
        with pytest.raises(DomainError):
            kloosterman_naive(1, 1, 9)


class TestTables:
    def test_p5_table(self, table5):
        np.testing.assert_allclose(table5.values, P5_TABLE, atol=1e-6)
        assert table5.values.sum() == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("method", [TableMethod.NAIVE, TableMethod.DFT])
    def test_both_methods_agree_small(self, method):
        table = build_table(1, 5, method)
        np.testing.assert_allclose(table.values, P5_TABLE, atol=1e-6)

    def test_naive_and_dft_agree(self):
        p = 503
        naive = build_table(1, p, TableMethod.NAIVE)
        dft = build_table(1, p, TableMethod.DFT)
        assert np.max(np.abs(naive.values - dft.values)) <= 1e-6 * math.sqrt(p)

    @pytest.mark.slow
    def test_naive_and_dft_agree_10007(self):
        p = 10007
        naive = build_table(1, p, TableMethod.NAIVE)
        dft = build_table(1, p, TableMethod.DFT)
        assert np.max(np.abs(naive.values - dft.values)) <= 1e-6 * math.sqrt(p)

    def test_table_is_read_only(self, table5):
        with pytest.raises(ValueError):
            table5.values[0] = 0.0

    def test_twist_divisible_by_p(self):
        with pytest.raises(DomainError):
            build_table(5, 5)

    def test_naive_cost_guard(self):
        with pytest.raises(CostGuardError):
            build_table(1, 100003, TableMethod.NAIVE)

    def test_cost_guard_follows_settings(self, monkeypatch):
        monkeypatch.setattr(settings, "naive_table_max_p", 100)
        with pytest.raises(CostGuardError):
            build_table(1, 101, TableMethod.NAIVE)

    def test_dft_cost_guard(self, monkeypatch):
        monkeypatch.setattr(settings, "dft_table_max_p", 100)
        with pytest.raises(CostGuardError):
            build_table(1, 101)
        assert build_table(1, 97).p == 97

    @pytest.mark.parametrize("p", primes_in(2, 61))
    def test_twist_collapse_and_symmetry(self, p):
        check_twists(p)

    @pytest.mark.slow
    def test_twist_collapse_and_symmetry_up_to_503(self):
        for p in primes_in(61, 503):
            check_twists(p)

    def test_weil_bound_exhaustive(self):
        for p in primes_in(2, settings.exhaustive_max_p):
            table = build_table(1, p)
            assert table.max_abs() <= 2 * math.sqrt(p) + 1e-6

    def test_moment_identities(self):
        for p in (5, 7, 101, 1009):
            moments = table_moments(build_table(1, p))
            assert moments["first"] == pytest.approx(1.0, abs=1e-6 * p)
            assert moments["second"] == pytest.approx(p * p - p - 1, abs=1e-6 * p)
            assert moments["total"] == pytest.approx(0.0, abs=1e-6 * p)

    @pytest.mark.slow
    def test_moment_identities_up_to_10000(self):
        for p in primes_in(2, 10_000):
            moments = table_moments(build_table(1, p))
            assert abs(moments["first"] - 1.0) <= 1e-6 * p
            assert abs(moments["second"] - (p * p - p - 1)) <= 1e-6 * p

    @pytest.mark.slow
    def test_large_dft_build(self):
        p = 1_000_003
        start = time.perf_counter()
        table = build_table(1, p)
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0
        rng = np.random.default_rng(11)
        for a in rng.integers(1, p, size=6):
            assert table[int(a)] == pytest.approx(kloosterman_naive(int(a), 1, p), abs=1e-6 * math.sqrt(p))

    def test_zero_bucket_empty_for_small_primes(self, table5):
        assert zero_bucket(table5).size == 0


class TestAngles:
    def test_p5_angles(self, table5):
        angles = build_angles(table5, 1)
        assert angles[1] == pytest.approx(math.acos(0.381966 / (2 * math.sqrt(5))), abs=1e-6)
        assert angles[0] == pytest.approx(math.acos(-1 / (2 * math.sqrt(5))), abs=1e-9)
        assert np.all((angles.theta >= 0) & (angles.theta <= math.pi))
        assert angles.clamp_events == 0

    def test_twisted_angles_gather(self, table7):
        angles = build_angles(table7, 3)
        for a in range(7):
            expected = math.acos(table7[3 * a] / (2 * math.sqrt(7)))
            assert angles[a] == pytest.approx(expected, abs=1e-12)

    def test_angles_from_twisted_table(self):
        p = 101
        from_base = build_angles(build_table(1, p), 5)
        from_twisted = build_angles(build_table(7, p), 5)
        np.testing.assert_allclose(from_base.theta, from_twisted.theta, atol=1e-7)

    def test_h_divisible_by_p(self, table5):
        with pytest.raises(DomainError):
            build_angles(table5, 10)
