"""
Double sums over a short interval of a and the primes x < p <= 2x.

Each prime needs its own table, so tables are built directly (DFT path) and
dropped after use instead of going through the shared LRU.
"""

from typing import Callable, Iterator, Optional, Tuple
from engine.bounds import make_report
from engine.chebyshev import u_eval_array
from engine.core_arith import primes_in
from engine.kloosterman import build_angles, build_table
from engine.statistics import sato_tate_main
from shared.config import settings
from shared.exceptions import CostGuardError, DomainError
from shared.models import BoundReport, CountReport, IntervalSpec, SignReport, TableMethod
import numpy as np
import math
import logging

logger = logging.getLogger(__name__)


def _check_x(x: int):
    if x < 3:
        raise DomainError(f"horizontal scans need x >= 3, got {x}")
    if x > settings.horizontal_max_x:
        raise CostGuardError(f"horizontal scan refused for x={x} > {settings.horizontal_max_x}")


def _scan(interval: IntervalSpec, x: int, h: int) -> Iterator[Tuple[int, np.ndarray, np.ndarray]]:
    """
    Yield (p, cosines, values) for each prime in (x, 2x] not dividing h.

    ``cosines`` are cos theta_p(h*a) and ``values`` are S(h*a,1;p), both
    restricted to the interval entries with p not dividing a.
    """
    _check_x(x)
    a = np.arange(interval.start, interval.stop, dtype=np.int64)
    for p in primes_in(x, 2 * x):
        if h % p == 0:
            logger.debug(f"Skipping p={p}: divides h={h}")
            continue
        residues = a % p
        residues = residues[residues != 0]
        table = build_table(1, p, TableMethod.DFT)
        angles = build_angles(table, h)
        yield p, angles.cosines[residues], table.values[(h % p) * residues % p]


def _pair_count(interval: IntervalSpec, x: int) -> int:
    return interval.N * len(primes_in(x, 2 * x))


def horizontal_scan(interval: IntervalSpec, x: int, h: int, k: int) -> float:
    """
    sum_{M<a<=M+N} sum_{x<p<=2x, p not | a} U_k(cos theta_p(h*a)).

    Args:
        interval: (M, M+N]
        x: Prime range parameter, 3 <= x <= ``settings.horizontal_max_x``
        h: Twist; primes dividing h are skipped
        k: Chebyshev order, k >= 0

    Returns:
        The double sum (0 for N = 0)
    """
    if k < 0:
        raise DomainError(f"Chebyshev order must be nonnegative, got {k}")
    _check_x(x)
    if interval.N == 0:
        return 0.0
    total = 0.0
    for _, cosines, _ in _scan(interval, x, h):
        total += float(np.sum(u_eval_array(k, cosines)))
    return total


def horizontal_report(interval: IntervalSpec, x: int, h: int, k: int) -> BoundReport:
    """|horizontal_scan| against the trivial scale k^2 * N * #primes."""
    value = horizontal_scan(interval, x, h, k)
    pairs = _pair_count(interval, x)
    return make_report(
        "horizontal", abs(value), max(k, 1) ** 2 * pairs,
        x=x, h=h, k=k, M=interval.M, N=interval.N, pairs=pairs, value=value
    )


def horizontal_sign_count(interval: IntervalSpec, x: int, h: int) -> SignReport:
    """
    Pairs (a, p) with S(h*a,1;p) > 0 (resp. < 0).

    Both counts are reported against N(pi(2x) - pi(x))/2; pairs with p | a or
    a numerically zero sum fill the zero bucket.
    """
    _check_x(x)
    pairs = _pair_count(interval, x)
    positive = negative = 0
    for p, _, values in _scan(interval, x, h):
        tol = settings.tol_zero * math.sqrt(p)
        positive += int(np.count_nonzero(values > tol))
        negative += int(np.count_nonzero(values < -tol))
    zero = pairs - positive - negative
    half = pairs / 2.0

    def report(label: str, count: int) -> CountReport:
        return CountReport(
            observed=count, main_term=half, error=count - half,
            zero_bucket=zero, N=pairs, label=label
        )

    return SignReport(
        positive=report("positive", positive),
        negative=report("negative", negative),
        zero_bucket=zero,
        N=pairs,
    )


def horizontal_extreme_count(
    interval: IntervalSpec,
    x: int,
    h: int,
    delta: float
) -> Tuple[CountReport, CountReport]:
    """
    Pairs with |cos theta| <= delta and >= delta, against the Sato-Tate masses.

    Returns:
        (small-value report, large-value report)
    """
    small_mass, large_mass = sato_tate_main(delta)
    _check_x(x)
    pairs = _pair_count(interval, x)
    small = large = 0
    for _, cosines, _ in _scan(interval, x, h):
        c = np.abs(cosines)
        small += int(np.count_nonzero(c <= delta))
        large += int(np.count_nonzero(c >= delta))
    return (
        CountReport(observed=small, main_term=small_mass * pairs,
                    error=small - small_mass * pairs, N=pairs, label="small"),
        CountReport(observed=large, main_term=large_mass * pairs,
                    error=large - large_mass * pairs, N=pairs, label="large"),
    )


def total_variation(interval: IntervalSpec, rho: Callable[[int], float]) -> float:
    """|rho(M+N)| + sum_{M<a<M+N} |rho(a+1) - rho(a)|."""
    if interval.N == 0:
        return 0.0
    weights = np.array([rho(int(a)) for a in range(interval.start, interval.stop)], dtype=np.float64)
    return float(abs(weights[-1]) + np.sum(np.abs(np.diff(weights))))


def horizontal_weighted_scan(
    interval: IntervalSpec,
    x: int,
    h: int,
    k: int,
    rho: Optional[Callable[[int], float]] = None
) -> BoundReport:
    """
    sum_a rho(a) sum_p U_k(cos theta_p(h*a)) with the total variation of rho.

    The bound is k^2 * rho_tilde * N * #primes, the trivial scale of the
    weighted sum; ``params['rho_tilde']`` carries the total variation.
    """
    rho = rho or (lambda a: 1.0)
    if k < 0:
        raise DomainError(f"Chebyshev order must be nonnegative, got {k}")
    _check_x(x)
    weights = np.array([rho(int(a)) for a in range(interval.start, interval.stop)], dtype=np.float64)
    a = np.arange(interval.start, interval.stop, dtype=np.int64)
    value = 0.0
    if interval.N:
        for p, cosines, _ in _scan(interval, x, h):
            keep = (a % p) != 0
            value += float(np.sum(weights[keep] * u_eval_array(k, cosines)))
    rho_tilde = total_variation(interval, rho)
    pairs = _pair_count(interval, x)
    return make_report(
        "horizontal_weighted", abs(value), max(k, 1) ** 2 * rho_tilde * pairs,
        x=x, h=h, k=k, M=interval.M, N=interval.N, rho_tilde=rho_tilde, value=value
    )
