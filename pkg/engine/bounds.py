"""
Explicit bound expressions with every unspecified constant set to 1.

Empirical constants come out as observed/bound ratios in BoundReports.
"""

from typing import Dict, Sequence, Tuple
from shared.config import settings
from shared.exceptions import DomainError
from shared.models import BoundReport, ParamValue
import math


def omega_r(p: float, N: float, r: int) -> float:
    """
    omega_r(p, N) = N^(1 - 1/r) * p^((r+1)/(4 r^2)) * ln p.

    Args:
        p: Modulus, p >= 3
        N: Interval length, N >= 1
        r: Positive integer

    Returns:
        The Burgess-shaped error scale
    """
    if r < 1:
        raise DomainError(f"r must be a positive integer, got {r}")
    if N < 1 or p < 3:
        raise DomainError(f"omega_r needs N >= 1 and p >= 3, got N={N}, p={p}")
    return N ** (1.0 - 1.0 / r) * p ** ((r + 1) / (4.0 * r * r)) * math.log(p)


def best_r(p: float, N: float, r_max: int = None) -> Tuple[int, float]:
    """
    Minimise omega_r(p, N) over r = 1..r_max.

    Returns:
        (r*, omega_{r*}(p, N)); the smallest r wins ties
    """
    r_max = settings.omega_r_max if r_max is None else r_max
    values = [(omega_r(p, N, r), r) for r in range(1, r_max + 1)]
    value, r = min(values)
    return r, value


def weil_bound(p: float) -> float:
    """2 sqrt(p)."""
    return 2.0 * math.sqrt(p)


def katz_bound(p: float, k: int) -> float:
    """(k+1) sqrt(p) / 2, the full-period bound on sum_a U_k(cos theta_p(a))."""
    return 0.5 * (k + 1) * math.sqrt(p)


def theorem1_bound(p: float, N: float, k: int, r: int) -> float:
    """k^2 omega_r(p, N)."""
    return k * k * omega_r(p, N, r)


def lemma5_bound(p: float, orders: Sequence[int]) -> float:
    """prod (k_i + 1) sqrt(p)."""
    return math.prod(k + 1 for k in orders) * math.sqrt(p)


def lemma6_bound(p: float, orders: Sequence[int]) -> float:
    """prod (k_i + 1)^2 sqrt(p)."""
    return math.prod((k + 1) ** 2 for k in orders) * math.sqrt(p)


def lemma7_bound(p: float, h: int, r: int, k: int) -> float:
    """k^{2r} h^r p + k^{4r} h^{2r} sqrt(p)."""
    return k ** (2 * r) * h ** r * p + k ** (4 * r) * h ** (2 * r) * math.sqrt(p)


def lemma8_bound(p: float, h: int, r: int, k: int) -> float:
    """Maximal version: r = 1 picks up (log 2h)^2 in the first term."""
    if r == 1:
        return k * k * h * p * math.log(2 * h) ** 2 + k ** 4 * h * h * math.sqrt(p)
    return lemma7_bound(p, h, r, k)


def gm_bounds(p: float, h: int, r: int, k: int) -> Tuple[float, float]:
    """(bound for S_k(h, r; m), bound for S*_k(h, r; m))."""
    return lemma7_bound(p, h, r, k), lemma8_bound(p, h, r, k)


def lemma9_bound(p: float, h: int, r: int, k: int) -> float:
    """
    Bound shape for W_k(r) over intervals of length in (h, 2h].

    r = 1: k^2 p (log 2h)^2 + k^4 h sqrt(p);
    r >= 2: k^{2r} h^{r-1} p + k^{4r} h^{2r-1} sqrt(p).
    """
    if r == 1:
        return k * k * p * math.log(2 * h) ** 2 + k ** 4 * h * math.sqrt(p)
    return k ** (2 * r) * h ** (r - 1) * p + k ** (4 * r) * h ** (2 * r - 1) * math.sqrt(p)


def gm_inequality_factor(N: int, h: int, r: int) -> float:
    """(2N)^{2r-1} / h^{2r}."""
    return (2.0 * N) ** (2 * r - 1) / float(h) ** (2 * r)


def make_report(label: str, observed: float, bound: float, **params: ParamValue) -> BoundReport:
    """BoundReport with the +inf sentinel when bound = 0 < observed."""
    return BoundReport.build(label, float(observed), float(bound), **params)


def omega_table(p: float, N: float, r_max: int = None) -> Dict[int, float]:
    """omega_r(p, N) for r = 1..r_max."""
    r_max = settings.omega_r_max if r_max is None else r_max
    return {r: omega_r(p, N, r) for r in range(1, r_max + 1)}
