"""
Tests for double sums over intervals and primes in (x, 2x].
"""

import math
import pytest

from engine.horizontal import (
    horizontal_extreme_count,
    horizontal_report,
    horizontal_scan,
    horizontal_sign_count,
    horizontal_weighted_scan,
    total_variation,
)
from engine.kloosterman import kloosterman_naive
from shared.config import settings
from shared.exceptions import CostGuardError, DomainError
from shared.models import IntervalSpec

PRIMES_10_20 = (11, 13, 17, 19)


def test_single_point_matches_pointwise():
    value = horizontal_scan(IntervalSpec(M=0, N=1), 10, 1, 1)
    expected = sum(kloosterman_naive(1, 1, p) / math.sqrt(p) for p in PRIMES_10_20)
    assert value == pytest.approx(expected, abs=1e-9)


def test_twisted_short_interval():
    interval = IntervalSpec(M=2, N=3)
    value = horizontal_scan(interval, 10, 2, 2)
    expected = 0.0
    for p in PRIMES_10_20:
        for a in range(3, 6):
            c = kloosterman_naive(2 * a, 1, p) / (2 * math.sqrt(p))
            expected += 4 * c * c - 1
    assert value == pytest.approx(expected, abs=1e-9)


def test_primes_dividing_h_are_skipped():
    value = horizontal_scan(IntervalSpec(M=0, N=1), 10, 11, 1)
    expected = sum(kloosterman_naive(11, 1, p) / math.sqrt(p) for p in (13, 17, 19))
    assert value == pytest.approx(expected, abs=1e-9)


def test_empty_interval():
    assert horizontal_scan(IntervalSpec(M=5, N=0), 10, 1, 3) == 0.0


def test_domain_and_cost_guard(monkeypatch):
    with pytest.raises(DomainError):
        horizontal_scan(IntervalSpec(M=0, N=1), 2, 1, 1)
    monkeypatch.setattr(settings, "horizontal_max_x", 50)
    with pytest.raises(CostGuardError):
        horizontal_scan(IntervalSpec(M=0, N=1), 100, 1, 1)


def test_report():
    report = horizontal_report(IntervalSpec(M=0, N=30), 10, 1, 2)
    assert report.params["pairs"] == 120
    assert report.bound == pytest.approx(4 * 120)
    assert report.observed == pytest.approx(abs(report.params["value"]))
    assert report.ratio <= 1


def test_sign_count_partitions_pairs():
    report = horizontal_sign_count(IntervalSpec(M=0, N=30), 10, 1)
    assert report.N == 120
    assert report.positive.observed + report.negative.observed + report.zero_bucket == 120
    # a = 11, 13, 17, 19 each divide one modulus
    assert report.zero_bucket >= 4
    assert report.positive.main_term == pytest.approx(60.0)


def test_extreme_count_covers_pairs():
    small, large = horizontal_extreme_count(IntervalSpec(M=0, N=30), 10, 1, 0.5)
    assert small.observed + large.observed >= 116
    small_mass, large_mass = small.main_term / 120, large.main_term / 120
    assert small_mass + large_mass == pytest.approx(1.0)


def test_total_variation():
    assert total_variation(IntervalSpec(M=0, N=5), lambda a: 1.0) == 1.0
    assert total_variation(IntervalSpec(M=0, N=5), float) == 9.0
    assert total_variation(IntervalSpec(M=0, N=0), float) == 0.0


def test_weighted_scan():
    interval = IntervalSpec(M=0, N=20)
    plain = horizontal_scan(interval, 10, 3, 1)
    unit = horizontal_weighted_scan(interval, 10, 3, 1)
    assert unit.params["value"] == pytest.approx(plain, abs=1e-9)
    assert unit.params["rho_tilde"] == 1.0

    weighted = horizontal_weighted_scan(interval, 10, 3, 1, rho=lambda a: (-1) ** a)
    assert weighted.params["rho_tilde"] == pytest.approx(1 + 2 * 19)
    assert weighted.ratio <= 1


@pytest.mark.slow
def test_sign_count_balanced_over_many_primes():
    report = horizontal_sign_count(IntervalSpec(M=0, N=1000), 10_000, 1)
    assert report.N == 1000 * 1033
    fraction = report.positive.observed / report.N
    assert abs(fraction - 0.5) <= 0.025
