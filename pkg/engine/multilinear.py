"""
Multi-linear Chebyshev sums and Gallagher-Montgomery moment sums.

Both are brute-force evaluations on top of the b = 1 angle table; cost guards
come from ``settings.multi_sum_max_p`` and ``settings.gm_max_cost``.
"""

from typing import Dict, List, Optional, Sequence, Tuple
from collections import defaultdict
from engine.bounds import (
    gm_bounds,
    gm_inequality_factor,
    lemma5_bound,
    lemma6_bound,
    lemma9_bound,
    make_report,
)
from engine.chebyshev import u_eval_array
from engine.core_arith import as_prime
from engine.table_cache import get_angles
from shared.config import settings
from shared.exceptions import CostGuardError, DegeneratePolynomialError, DomainError
from shared.models import BoundReport, GMMomentSpec, IntervalSpec, MultiSumSpec
import numpy as np
import math
import logging

logger = logging.getLogger(__name__)


# ============================================
# Multi-linear sums
# ============================================

def _check_multi(spec: MultiSumSpec, p: int) -> int:
    p = as_prime(p)
    if p > settings.multi_sum_max_p:
        raise CostGuardError(f"multi_sum refused for p={p} > {settings.multi_sum_max_p}")
    for i, f in enumerate(spec.polys):
        if f.a % p == 0:
            raise DegeneratePolynomialError(
                f"polynomial {i} has leading coefficient {f.a} divisible by p={p}"
            )
    return p


def _multi_terms(spec: MultiSumSpec, a: np.ndarray, p: int) -> Tuple[np.ndarray, int]:
    """Per-a products and the number of excluded a (some f_i(a) = 0 mod p)."""
    cosines = get_angles(p, 1).cosines
    product = np.ones(a.shape, dtype=np.float64)
    keep = np.ones(a.shape, dtype=bool)
    for f, k in zip(spec.polys, spec.orders):
        args = f.at(a) % p
        keep &= args != 0
        product *= u_eval_array(k, cosines[args])
    product[~keep] = 0.0
    return product, int(np.count_nonzero(~keep))


def hypothesis_flags(spec: MultiSumSpec, p: int) -> Dict[str, bool]:
    """
    Which bound hypotheses the polynomial family satisfies mod p.

    ``lemma5_applies``: the polynomials are pairwise distinct and
    (k_1, .., k_s, h) is not the zero vector mod p.
    ``lemma6_applies``: p does not divide h, or some group of identical
    polynomials has odd total order.
    """
    reduced = [(f.a % p, f.b % p) for f in spec.polys]
    distinct = len(set(reduced)) == len(reduced)
    nonzero = any(k % p for k in spec.orders) or spec.h % p != 0

    groups: Dict[Tuple[int, int], int] = defaultdict(int)
    for key, k in zip(reduced, spec.orders):
        groups[key] += k
    odd_group = any(total % 2 for total in groups.values())
    return {
        "lemma5_applies": distinct and nonzero,
        "lemma6_applies": spec.h % p != 0 or odd_group,
    }


def _sum_over(spec: MultiSumSpec, a: np.ndarray, p: int) -> Tuple[complex, int]:
    if a.size == 0:
        return 0j, 0
    product, excluded = _multi_terms(spec, a, p)
    phase = np.exp(2j * np.pi * ((spec.h % p) * (a % p) % p) / p)
    return complex(np.sum(product * phase)), excluded


def multi_sum_value(spec: MultiSumSpec, p: int) -> Tuple[complex, int]:
    """
    The full-period sum over a mod p, skipping a with prod f_i(a) = 0.

    Returns:
        (value, number of excluded a)
    """
    p = _check_multi(spec, p)
    return _sum_over(spec, np.arange(p, dtype=np.int64), p)


def multi_sum(spec: MultiSumSpec, p: int, interval: Optional[IntervalSpec] = None) -> BoundReport:
    """
    Multi-linear sum against both bound shapes.

    The report's bound is prod (k_i+1)^2 sqrt(p); the product-(k_i+1) shape,
    its ratio, the complex value and the hypothesis flags ride in ``params``.
    With ``interval`` the sum runs over (M, M+N] instead of a full period.

    Raises:
        DegeneratePolynomialError: if p divides a leading coefficient
        CostGuardError: above ``settings.multi_sum_max_p``
    """
    p = as_prime(p)
    if interval is None:
        value, excluded = multi_sum_value(spec, p)
    else:
        p = _check_multi(spec, p)
        value, excluded = _sum_over(spec, np.arange(interval.start, interval.stop, dtype=np.int64), p)
    observed = abs(value)
    l5 = lemma5_bound(p, spec.orders)
    flags = hypothesis_flags(spec, p)
    logger.debug(f"multi_sum p={p}, s={spec.s}: |value|={observed:.6g}, excluded={excluded}")
    return make_report(
        "multi_sum", observed, lemma6_bound(p, spec.orders),
        p=p, s=spec.s, h=spec.h,
        value_real=value.real, value_imag=value.imag,
        excluded=excluded,
        lemma5_bound=l5,
        lemma5_ratio=observed / l5,
        **flags,
    )


def multi_sum_interval(spec: MultiSumSpec, interval: IntervalSpec, p: int) -> complex:
    """Short-interval version: a runs over (M, M+N] instead of a full period."""
    p = _check_multi(spec, p)
    value, _ = _sum_over(spec, np.arange(interval.start, interval.stop, dtype=np.int64), p)
    return value


# ============================================
# Sliding-window moments
# ============================================

def _check_gm(spec: GMMomentSpec, p: int, window: int) -> int:
    p = as_prime(p)
    if spec.m % p == 0:
        raise DomainError(f"dilation m={spec.m} is divisible by p={p}")
    if window > p:
        raise DomainError(f"window h={window} exceeds p={p}")
    if p * window > settings.gm_max_cost:
        raise CostGuardError(f"p*h = {p * window} exceeds {settings.gm_max_cost:g}")
    return p


def _prefix(spec: GMMomentSpec, p: int, m_char: int = 0) -> np.ndarray:
    """C[i] = sum_{n=1}^{i} y[n], i = 0..p+h, y[n] = U_k(cos theta_p(m n))."""
    n = np.arange(1, p + spec.h + 1, dtype=np.int64)
    y = u_eval_array(spec.k, get_angles(p, 1).cosines)[(spec.m % p) * n % p].astype(np.complex128)
    if m_char % p:
        y = y * np.exp(2j * np.pi * ((m_char % p) * n % p) / p)
    return np.concatenate(([0.0 + 0j], np.cumsum(y)))


def gm_moment(spec: GMMomentSpec, p: int) -> float:
    """
    S_k(h, r; m) = sum_{a=1}^{p} |sum_{a<n<=a+h} U_k(cos theta_p(m n))|^{2r}.

    Raises:
        DomainError: p | m or h > p
        CostGuardError: p*h above ``settings.gm_max_cost``
    """
    p = _check_gm(spec, p, spec.h)
    C = _prefix(spec, p)
    a = np.arange(1, p + 1)
    window = C[a + spec.h] - C[a]
    return float(np.sum(np.abs(window) ** (2 * spec.r)))


def gm_max_moment(spec: GMMomentSpec, p: int) -> float:
    """S*_k(h, r; m): the inner window is maximised over lengths h' < h."""
    p = _check_gm(spec, p, spec.h)
    C = _prefix(spec, p)
    a = np.arange(1, p + 1)
    best = np.zeros(p, dtype=np.float64)
    for length in range(1, spec.h):
        np.maximum(best, np.abs(C[a + length] - C[a]), out=best)
    return float(np.sum(best ** (2 * spec.r)))


def gm_character_moment(spec: GMMomentSpec, p: int, m_char: int) -> float:
    """S_k with psi(n) = e(m_char n / p) inserted in the inner sum."""
    p = _check_gm(spec, p, spec.h)
    C = _prefix(spec, p, m_char)
    a = np.arange(1, p + 1)
    window = C[a + spec.h] - C[a]
    return float(np.sum(np.abs(window) ** (2 * spec.r)))


def gm_report(spec: GMMomentSpec, p: int) -> List[BoundReport]:
    """
    S_k and S*_k against their bound shapes with baseline constant 16^r.

    Returns:
        [report for S_k, report for S*_k]; ``params['constant']`` is the
        empirical observed/shape constant
    """
    p = as_prime(p)
    baseline = 16.0 ** spec.r
    shapes = gm_bounds(p, spec.h, spec.r, spec.k)
    observed = (gm_moment(spec, p), gm_max_moment(spec, p))
    reports = []
    for label, value, shape in zip(("gm", "gm_max"), observed, shapes):
        reports.append(make_report(
            label, value, baseline * shape,
            p=p, h=spec.h, r=spec.r, m=spec.m, k=spec.k, shape=shape, constant=value / shape
        ))
    return reports


# ============================================
# W_k over disjoint intervals
# ============================================

def _check_partition(partition: Sequence[IntervalSpec], p: int, h: int):
    if not partition:
        raise DomainError("w_k_sum needs at least one interval")
    ordered = sorted(partition, key=lambda iv: iv.start)
    previous_stop = 0
    for iv in ordered:
        if iv.start < 0 or iv.stop > p:
            raise DomainError(f"interval ({iv.M}, {iv.M + iv.N}] leaves [0, p)")
        if iv.start < previous_stop:
            raise DomainError(f"interval ({iv.M}, {iv.M + iv.N}] overlaps its neighbour")
        if not h < iv.N <= 2 * h:
            raise DomainError(f"interval length {iv.N} outside ({h}, {2 * h}]")
        previous_stop = iv.stop


def w_k_sum(
    partition: Sequence[IntervalSpec],
    p: int,
    r: int,
    k: int,
    h: Optional[int] = None,
    seed: Optional[int] = None
) -> BoundReport:
    """
    W_k(r) = sum_t max_{(a,p)=1} |sum_{m in I_t} U_k(cos theta_p(a m))|^{2r}.

    The max over a is exhaustive for p <= ``settings.exhaustive_max_p`` and over
    ``settings.wk_sampled_residues`` seeded PCG64 draws above.

    Args:
        partition: Disjoint intervals inside [0, p)
        p: Prime modulus
        r: Moment order, r >= 1
        k: Chebyshev order, k >= 1
        h: Declared window scale; defaults to ceil(max length / 2)
        seed: Sampling seed (default ``settings.seed``)
    """
    p = as_prime(p)
    if r < 1 or k < 1:
        raise DomainError(f"need r >= 1 and k >= 1, got r={r}, k={k}")
    if h is None:
        h = max(1, math.ceil(max(iv.N for iv in partition) / 2)) if partition else 1
    _check_partition(partition, p, h)

    sampled = p > settings.exhaustive_max_p
    if sampled:
        rng = np.random.default_rng(settings.seed if seed is None else seed)
        count = min(settings.wk_sampled_residues, p - 1)
        residues = np.sort(rng.choice(np.arange(1, p, dtype=np.int64), size=count, replace=False))
    else:
        residues = np.arange(1, p, dtype=np.int64)

    u = u_eval_array(k, get_angles(p, 1).cosines)
    total = 0.0
    for iv in partition:
        m = np.arange(iv.start, iv.stop, dtype=np.int64)
        sums = u[(residues[:, None] * m[None, :]) % p].sum(axis=1)
        total += float(np.max(np.abs(sums) ** (2 * r)))

    shape = lemma9_bound(p, h, r, k)
    return make_report(
        "wk", total, 16.0 ** r * shape,
        p=p, r=r, k=k, h=h, intervals=len(partition), shape=shape,
        constant=total / shape, sampled=sampled
    )


def gm_inequality_check(values: Sequence[complex], h: int, r: int) -> BoundReport:
    """
    Check |sum alpha|^{2r} <= (2N)^{2r-1}/h^{2r} * sum_n (F_n + B_n).

    F_n = max_{h'<=h} |sum_{n<=m<n+h'} alpha_m|^{2r},
    B_n = max_{h'<=h} |sum_{n-h'<m<n} alpha_m|^{2r}, alpha = 0 off its support.

    Args:
        values: alpha_{M+1}, .., alpha_{M+N}
        h: Window bound, 1 <= h <= N
        r: Moment order, r >= 1
    """
    alpha = np.asarray(values, dtype=np.complex128)
    N = alpha.size
    if N == 0:
        raise DomainError("gm_inequality_check needs at least one value")
    if not 1 <= h <= N:
        raise DomainError(f"need 1 <= h <= N, got h={h}, N={N}")
    if r < 1:
        raise DomainError(f"r must be positive, got {r}")

    # padded[h + j] = alpha_j for j = 0..N-1
    padded = np.concatenate((np.zeros(h), alpha, np.zeros(h)))
    P = np.concatenate(([0j], np.cumsum(padded)))
    n = np.arange(N) + h

    forward = np.zeros(N)
    backward = np.zeros(N)
    for length in range(1, h + 1):
        np.maximum(forward, np.abs(P[n + length] - P[n]), out=forward)
        np.maximum(backward, np.abs(P[n] - P[n - length + 1]), out=backward)

    rhs = gm_inequality_factor(N, h, r) * float(np.sum(forward ** (2 * r) + backward ** (2 * r)))
    lhs = abs(complex(np.sum(alpha))) ** (2 * r)
    return make_report("gm_inequality", lhs, rhs, N=N, h=h, r=r)
