"""
Statistics of Kloosterman angles over short intervals.

Interval indices run over (M, M+N] and are reduced mod p. An index a = 0 mod p
has S(0,h;p) = -1; it is kept in sums and counted in the zero bucket of sign
counts.
"""

from typing import List, Optional, Tuple
from engine.bounds import best_r, theorem1_bound, make_report, katz_bound
from engine.chebyshev import u_eval_array, power_constant
from engine.core_arith import as_prime
from engine.table_cache import get_angles, get_table
from shared.config import settings
from shared.exceptions import DomainError, UnsupportedParameterError
from shared.models import (
    BoundReport,
    CountReport,
    IntervalSpec,
    MomentReport,
    SignReport,
)
from scipy import stats
import numpy as np
import math
import logging

logger = logging.getLogger(__name__)


# ============================================
# Helpers
# ============================================

def _indices(interval: IntervalSpec, p: int) -> Tuple[np.ndarray, int]:
    """Residues of the interval and the number of a = 0 mod p hits."""
    a = np.arange(interval.start, interval.stop, dtype=np.int64) % p
    return a, int(np.count_nonzero(a == 0))


def _check_twist(p: int, h: int):
    if h % p == 0:
        raise DomainError(f"twist h={h} is divisible by p={p}")


def _check_order(k: int):
    if k < 0:
        raise DomainError(f"Chebyshev order must be nonnegative, got {k}")


def _interval_values(interval: IntervalSpec, p: int, h: int) -> Tuple[np.ndarray, int]:
    """S(h*a, 1; p) for a in the interval."""
    _check_twist(p, h)
    a, hits = _indices(interval, p)
    table = get_table(p, 1)
    return table.values[(h % p) * a % p], hits


def sato_tate_main(delta: float) -> Tuple[float, float]:
    """
    Sato-Tate masses of {|cos theta| <= delta} and {|cos theta| >= delta}.

    Returns:
        ((2/pi)(arcsin d + d sqrt(1-d^2)), (2/pi)(arccos d - d sqrt(1-d^2)))
    """
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    root = delta * math.sqrt(1.0 - delta * delta)
    return (
        2.0 / math.pi * (math.asin(delta) + root),
        2.0 / math.pi * (math.acos(delta) - root),
    )


# ============================================
# Chebyshev sums
# ============================================

def interval_sum(interval: IntervalSpec, p: int, h: int, k: int) -> Tuple[float, int]:
    """
    D_k and the count of a = 0 mod p hits included in it.

    Returns:
        (sum_{M<a<=M+N} U_k(cos theta_p(h*a)), hits)
    """
    p = as_prime(p)
    _check_twist(p, h)
    _check_order(k)
    a, hits = _indices(interval, p)
    if a.size == 0:
        return 0.0, 0
    # cos theta_p(h*a), gathered from the h = 1 angles
    cosines = get_angles(p, 1).cosines[(h % p) * a % p]
    return float(np.sum(u_eval_array(k, cosines))), hits


def d_k_sum(interval: IntervalSpec, p: int, h: int, k: int) -> float:
    """
    D_k(M, N; p, h) = sum_{M<a<=M+N} U_k(cos theta_p(h*a)).

    Args:
        interval: (M, M+N]
        p: Prime modulus
        h: Twist, not divisible by p
        k: Chebyshev order, k >= 0

    Returns:
        The interval sum (0 for N = 0)
    """
    return interval_sum(interval, p, h, k)[0]


def d_k_twisted(interval: IntervalSpec, p: int, h: int, m: int, k: int) -> complex:
    """sum_{M<a<=M+N} U_k(cos theta_p(h*a)) e(m*a/p)."""
    p = as_prime(p)
    _check_twist(p, h)
    _check_order(k)
    a, _ = _indices(interval, p)
    if a.size == 0:
        return 0j
    u = u_eval_array(k, get_angles(p, 1).cosines[(h % p) * a % p])
    phase = np.exp(2j * np.pi * ((m % p) * a % p) / p)
    return complex(np.sum(u * phase))


def vst_full_sum(p: int, k: int) -> BoundReport:
    """
    |sum_{a=1}^{p-1} U_k(cos theta_p(a))| against (k+1) sqrt(p)/2.

    The signed value is kept in ``params['value']``.
    """
    p = as_prime(p)
    value = d_k_sum(IntervalSpec.full_period(p), p, 1, k)
    return make_report("vst", abs(value), katz_bound(p, k), p=p, k=k, value=value)


def interval_report(
    interval: IntervalSpec,
    p: int,
    h: int,
    k: int,
    r: Optional[int] = None
) -> BoundReport:
    """
    |D_k| against k^2 omega_r(p, N); r defaults to the minimising r*.

    Args:
        interval: (M, M+N], N >= 1
        p: Prime modulus
        h: Twist
        k: Chebyshev order, k >= 1
        r: Fixed Burgess exponent (optional)
    """
    p = as_prime(p)
    if interval.N < 1:
        raise DomainError("interval_report needs N >= 1")
    if k < 1:
        raise DomainError(f"interval bounds need k >= 1, got {k}")
    value, hits = interval_sum(interval, p, h, k)
    if r is None:
        r, _ = best_r(p, interval.N)
    return make_report(
        "interval", abs(value), theorem1_bound(p, interval.N, k, r),
        p=p, h=h, k=k, M=interval.M, N=interval.N, r_star=r, value=value, residue_hits=hits
    )


def twisted_report(interval: IntervalSpec, p: int, h: int, m: int, k: int) -> BoundReport:
    """|twisted sum| against k^2 omega_{r*}(p, N)."""
    p = as_prime(p)
    if interval.N < 1:
        raise DomainError("twisted_report needs N >= 1")
    value = d_k_twisted(interval, p, h, m, k)
    r, _ = best_r(p, interval.N)
    return make_report(
        "twisted", abs(value), theorem1_bound(p, interval.N, max(k, 1), r),
        p=p, h=h, m=m, k=k, M=interval.M, N=interval.N, r_star=r,
        value_real=value.real, value_imag=value.imag
    )


def d_k_max_over_h(
    interval: IntervalSpec,
    p: int,
    k: int,
    seed: Optional[int] = None
) -> Tuple[float, int, bool]:
    """
    max_h |D_k(M, N; p, h)| over twists h.

    Exhaustive over h = 1..p-1 when p <= ``settings.exhaustive_max_p``;
    otherwise over ``settings.sampled_twists`` h drawn with numpy's PCG64.

    Returns:
        (max value, maximising h, sampled flag)
    """
    p = as_prime(p)
    _check_order(k)
    a, _ = _indices(interval, p)
    u = u_eval_array(k, get_angles(p, 1).cosines)

    sampled = p > settings.exhaustive_max_p
    if sampled:
        rng = np.random.default_rng(settings.seed if seed is None else seed)
        count = min(settings.sampled_twists, p - 1)
        twists = np.sort(rng.choice(np.arange(1, p, dtype=np.int64), size=count, replace=False))
        logger.info(f"Sampling {count} twists for p={p}")
    else:
        twists = np.arange(1, p, dtype=np.int64)

    if a.size == 0:
        return 0.0, int(twists[0]), sampled

    best_value, best_h = -1.0, int(twists[0])
    chunk = max(1, (1 << 20) // max(1, a.size))
    for start in range(0, twists.size, chunk):
        hs = twists[start:start + chunk]
        sums = np.abs(u[(hs[:, None] * a[None, :]) % p].sum(axis=1))
        i = int(np.argmax(sums))
        if sums[i] > best_value:
            best_value, best_h = float(sums[i]), int(hs[i])
    return best_value, best_h, sampled


# ============================================
# Moments
# ============================================

def _moment_report(
    interval: IntervalSpec,
    p: int,
    alpha: float,
    signed: bool,
    observed: float,
    main_term: float
) -> MomentReport:
    N = interval.N
    if N >= 1:
        _, omega = best_r(p, N)
        error_scale = p ** (alpha / 2.0) * omega
    else:
        error_scale = 0.0
    error = observed - main_term
    return MomentReport(
        alpha=alpha,
        signed=signed,
        observed=observed,
        main_term=main_term,
        ratio=observed / main_term if main_term != 0 else None,
        error=error,
        error_scale=error_scale,
        error_ratio=abs(error) / error_scale if error_scale > 0 else 0.0,
        N=N,
    )


def moment_v(interval: IntervalSpec, p: int, h: int, alpha: int) -> MomentReport:
    """
    V_alpha = sum_{a} S(h*a, 1; p)^alpha for integer alpha.

    Main term (1 + (-1)^alpha)/2 * C(alpha) * N * p^(alpha/2); zero for odd alpha.

    Raises:
        UnsupportedParameterError: for non-integer alpha
    """
    if isinstance(alpha, float) and not alpha.is_integer():
        raise UnsupportedParameterError(f"signed moments need integer alpha, got {alpha}")
    alpha = int(alpha)
    if alpha < 1:
        raise DomainError(f"alpha must be a positive integer, got {alpha}")
    p = as_prime(p)
    values, _ = _interval_values(interval, p, h)
    observed = float(np.sum(values ** alpha))
    main_term = power_constant(alpha) * interval.N * p ** (alpha / 2.0) if alpha % 2 == 0 else 0.0
    return _moment_report(interval, p, float(alpha), True, observed, main_term)


def moment_v_abs(interval: IntervalSpec, p: int, h: int, alpha: float) -> MomentReport:
    """V~_alpha = sum_a |S(h*a, 1; p)|^alpha with main term C(alpha) N p^(alpha/2)."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    p = as_prime(p)
    values, _ = _interval_values(interval, p, h)
    observed = float(np.sum(np.abs(values) ** alpha))
    main_term = power_constant(alpha) * interval.N * p ** (alpha / 2.0)
    return _moment_report(interval, p, float(alpha), False, observed, main_term)


# ============================================
# Counts
# ============================================

def sign_count(interval: IntervalSpec, p: int, h: int) -> SignReport:
    """
    Positive and negative values of S(h*a, 1; p) over the interval.

    |S| <= tol_zero * sqrt(p) and a = 0 mod p both land in the zero bucket,
    so positive + negative + zero_bucket = N.
    """
    p = as_prime(p)
    values, _ = _interval_values(interval, p, h)
    a, hits = _indices(interval, p)
    tol = settings.tol_zero * math.sqrt(p)
    primitive = a != 0
    positive = int(np.count_nonzero(primitive & (values > tol)))
    negative = int(np.count_nonzero(primitive & (values < -tol)))
    zero = interval.N - positive - negative
    half = interval.N / 2.0

    def report(label: str, count: int) -> CountReport:
        return CountReport(
            observed=count, main_term=half, error=count - half,
            zero_bucket=zero, N=interval.N, label=label
        )

    return SignReport(
        positive=report("positive", positive),
        negative=report("negative", negative),
        zero_bucket=zero,
        residue_hits=hits,
        N=interval.N,
    )


def _interval_cosines(interval: IntervalSpec, p: int, h: int) -> np.ndarray:
    p = as_prime(p)
    _check_twist(p, h)
    a, _ = _indices(interval, p)
    return get_angles(p, h).cosines[a]


def small_value_count(interval: IntervalSpec, p: int, h: int, delta: float) -> CountReport:
    """#{a : |S(h*a,1;p)| <= 2 delta sqrt(p)} against (2/pi)(arcsin d + d sqrt(1-d^2)) N."""
    main, _ = sato_tate_main(delta)
    count = int(np.count_nonzero(np.abs(_interval_cosines(interval, p, h)) <= delta))
    expected = main * interval.N
    return CountReport(observed=count, main_term=expected, error=count - expected, N=interval.N, label="small")


def large_value_count(interval: IntervalSpec, p: int, h: int, delta: float) -> CountReport:
    """#{a : |S(h*a,1;p)| >= 2 delta sqrt(p)} against (2/pi)(arccos d - d sqrt(1-d^2)) N."""
    _, main = sato_tate_main(delta)
    count = int(np.count_nonzero(np.abs(_interval_cosines(interval, p, h)) >= delta))
    expected = main * interval.N
    return CountReport(observed=count, main_term=expected, error=count - expected, N=interval.N, label="large")


def boundary_count(interval: IntervalSpec, p: int, h: int, delta: float) -> int:
    """Residues with |cos theta| exactly delta (counted by both small and large)."""
    return int(np.count_nonzero(np.abs(_interval_cosines(interval, p, h)) == delta))


def sign_lower_bound_check(report: SignReport) -> dict:
    """
    Compare each sign count with N * 4/(9 pi^2).

    Returns:
        Dictionary with the threshold and pass flags
    """
    threshold = 4.0 / (9.0 * math.pi ** 2) * report.N
    return {
        "threshold": threshold,
        "positive_ok": report.positive.observed >= threshold,
        "negative_ok": report.negative.observed >= threshold,
    }


# ============================================
# Distribution
# ============================================

def st_cdf(alpha: float, beta: float) -> float:
    """
    Sato-Tate mass of [alpha, beta] within [0, pi].

    (2/pi) * int sin^2 = (beta - alpha)/pi - (sin 2beta - sin 2alpha)/(2 pi).
    """
    if not (0.0 <= alpha <= beta <= math.pi):
        raise DomainError(f"need 0 <= alpha <= beta <= pi, got {alpha}, {beta}")
    return (beta - alpha) / math.pi - (math.sin(2 * beta) - math.sin(2 * alpha)) / (2 * math.pi)


def _st_cdf_array(t: np.ndarray) -> np.ndarray:
    return t / np.pi - np.sin(2 * t) / (2 * np.pi)


def _sorted_angles(interval: IntervalSpec, p: int, h: int) -> np.ndarray:
    if interval.N == 0:
        raise DomainError("discrepancy of an empty interval is undefined")
    p = as_prime(p)
    _check_twist(p, h)
    a, _ = _indices(interval, p)
    return np.sort(get_angles(p, h).theta[a])


def empirical_cdf_discrepancy(
    interval: IntervalSpec,
    p: int,
    h: int = 1,
    grid_points: Optional[int] = None
) -> float:
    """
    sup over a uniform grid on [0, pi] of |F_emp(t) - mu_ST([0, t])|.

    Args:
        interval: (M, M+N], N >= 1
        p: Prime modulus
        h: Twist
        grid_points: Grid size (default ``settings.cdf_grid_points``)
    """
    theta = _sorted_angles(interval, p, h)
    grid = np.linspace(0.0, np.pi, settings.cdf_grid_points if grid_points is None else grid_points)
    empirical = np.searchsorted(theta, grid, side="right") / theta.size
    return float(np.max(np.abs(empirical - _st_cdf_array(grid))))


def exact_discrepancy(interval: IntervalSpec, p: int, h: int = 1) -> float:
    """Kolmogorov-Smirnov distance to the Sato-Tate law, evaluated at the sample points."""
    theta = _sorted_angles(interval, p, h)
    return float(stats.kstest(theta, _st_cdf_array).statistic)


def angle_histogram(
    interval: IntervalSpec,
    p: int,
    h: int = 1,
    bins: int = 16
) -> List[Tuple[float, float, float, float]]:
    """
    Observed angle fractions per bin next to the Sato-Tate mass.

    Returns:
        Rows (lo, hi, observed_fraction, sato_tate_mass)
    """
    if bins < 1:
        raise DomainError(f"bins must be positive, got {bins}")
    theta = _sorted_angles(interval, p, h)
    counts, edges = np.histogram(theta, bins=bins, range=(0.0, np.pi))
    return [
        (float(lo), float(hi), float(c) / theta.size, st_cdf(float(lo), float(hi)))
        for lo, hi, c in zip(edges[:-1], edges[1:], counts)
    ]
