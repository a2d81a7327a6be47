"""
Chebyshev polynomials of the second kind.

U_0 = 1, U_1 = 2x, U_{k+1} = 2x U_k - U_{k-1}; U_k(cos phi) = sin((k+1)phi)/sin(phi).
The family is orthonormal for the Sato-Tate weight (2/pi) sqrt(1 - x^2) dx.

Provides evaluation, exact product linearization, the Gamma-function
coefficients of x^alpha and |x|^alpha, and closed-form coefficients of
interval indicators.
"""

from pydantic import BaseModel, Field, ConfigDict
from scipy.special import gammaln, gammasgn
from typing import List, Optional, Sequence, Tuple, Union
from shared.config import settings
from shared.exceptions import DomainError, UnsupportedParameterError
import numpy as np
import math
import logging

logger = logging.getLogger(__name__)

Number = Union[int, float]

_INTEGER_EPS = 1e-12
LINEARIZE_MAX_DEGREE = 10_000


class ChebyshevSeries(BaseModel):
    """x -> sum_{l=0}^{L} c_l U_l(x)."""

    coefficients: List[Union[int, float]] = Field(..., description="c_0..c_L", min_length=1)

    model_config = ConfigDict(frozen=True)

    @property
    def L(self) -> int:
        """Truncation degree."""
        return len(self.coefficients) - 1

    def __getitem__(self, ell: int) -> Number:
        if 0 <= ell <= self.L:
            return self.coefficients[ell]
        return 0

    def evaluate(self, x):
        """
        Evaluate by Clenshaw's recurrence.

        Args:
            x: Scalar or array in [-1, 1]

        Returns:
            Series value(s)
        """
        x = np.asarray(x, dtype=np.float64)
        if np.any(np.abs(x) > 1.0):
            raise DomainError("Chebyshev series evaluated outside [-1, 1]")
        b1 = np.zeros_like(x)
        b2 = np.zeros_like(x)
        for c in reversed(self.coefficients):
            b1, b2 = float(c) + 2.0 * x * b1 - b2, b1
        return b1 if b1.ndim else float(b1)

    def to_csv_rows(self) -> List[Tuple[int, Number]]:
        """(l, c_l) rows."""
        return list(enumerate(self.coefficients))


# ============================================
# Evaluation
# ============================================

def u_eval(k: int, x: float) -> float:
    """
    U_k(x) by the three-term recurrence.

    Args:
        k: Degree, k >= 0
        x: Point in [-1, 1]

    Returns:
        U_k(x); |U_k(x)| <= k + 1

    Raises:
        DomainError: if |x| > 1 or k < 0
    """
    if k < 0:
        raise DomainError(f"Chebyshev degree must be nonnegative, got {k}")
    if abs(x) > 1.0:
        raise DomainError(f"U_k evaluated outside [-1, 1] at x={x}")
    prev, cur = 1.0, 2.0 * x
    if k == 0:
        return prev
    for _ in range(k - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def u_eval_array(k: int, xs: np.ndarray) -> np.ndarray:
    """
    Vectorised U_k over an array of points in [-1, 1].

    Args:
        k: Degree, k >= 0
        xs: Points

    Returns:
        Array of U_k(xs)
    """
    if k < 0:
        raise DomainError(f"Chebyshev degree must be nonnegative, got {k}")
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size and np.max(np.abs(xs)) > 1.0:
        raise DomainError("U_k evaluated outside [-1, 1]")
    prev = np.ones_like(xs)
    if k == 0:
        return prev
    cur = 2.0 * xs
    two_x = 2.0 * xs
    for _ in range(k - 1):
        prev, cur = cur, two_x * cur - prev
    return cur


# ============================================
# Linearization of products
# ============================================

def linearize_product(orders: Sequence[int]) -> ChebyshevSeries:
    """
    Exact integer coefficients of prod_j U_{k_j} in the U basis.

    Applies U_m U_n = sum_{j=0}^{min(m,n)} U_{m+n-2j} left to right.

    Args:
        orders: Degrees k_1..k_J (empty -> U_0)

    Returns:
        Series with integer coefficients beta_0..beta_K, K = sum k_j
    """
    orders = [int(k) for k in orders]
    if any(k < 0 for k in orders):
        raise DomainError("Chebyshev degrees must be nonnegative")
    K = sum(orders)
    if K > LINEARIZE_MAX_DEGREE:
        raise DomainError(f"total degree {K} exceeds {LINEARIZE_MAX_DEGREE}")

    beta = np.zeros(K + 1, dtype=object)
    beta[:] = 0
    beta[0] = 1
    degree = 0
    for k in orders:
        nxt = np.zeros(K + 1, dtype=object)
        nxt[:] = 0
        for ell in range(degree + 1):
            c = beta[ell]
            if c == 0:
                continue
            # U_ell * U_k = U_{|ell-k|} + U_{|ell-k|+2} + ... + U_{ell+k}
            nxt[abs(ell - k): ell + k + 1: 2] += c
        beta = nxt
        degree += k

    return ChebyshevSeries(coefficients=[int(c) for c in beta])


def beta_abs_mean(orders: Sequence[int]) -> int:
    """sum_l |beta_l| for the product of U_{k_j}."""
    return sum(abs(c) for c in linearize_product(orders).coefficients)


def lemma4_constant(orders: Sequence[int]) -> float:
    """
    Smallest c with beta_l <= c/(K+1) * prod (k_j + 1) for every l.

    Args:
        orders: Degrees k_1..k_J

    Returns:
        max_l beta_l * (K+1) / prod(k_j + 1)
    """
    series = linearize_product(orders)
    K = sum(orders)
    scale = math.prod(k + 1 for k in orders)
    return max(series.coefficients) * (K + 1) / scale


# ============================================
# Power expansions
# ============================================

def _is_nonpositive_integer(z: float) -> bool:
    return z <= 0 and abs(z - round(z)) < _INTEGER_EPS


def _check_alpha(alpha: float):
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")


def power_constant(alpha: float) -> float:
    """C(alpha) = Gamma(alpha+1) / (Gamma(alpha/2+2) Gamma(alpha/2+1))."""
    _check_alpha(alpha)
    return math.exp(gammaln(alpha + 1) - gammaln(alpha / 2 + 2) - gammaln(alpha / 2 + 1))


def coeff_a(alpha: float, ell: int) -> float:
    """
    Coefficient of U_ell in the expansion of x^alpha (ell = 0 is the constant term).

    a = (1 + (-1)^(alpha+ell)) (ell+1) / 2^(alpha+1)
        * Gamma(alpha+1) / (Gamma((alpha+ell)/2 + 2) Gamma((alpha-ell)/2 + 1))

    Raises:
        UnsupportedParameterError: for non-integer alpha
    """
    _check_alpha(alpha)
    if abs(alpha - round(alpha)) > _INTEGER_EPS:
        raise UnsupportedParameterError(
            f"signed power x^alpha needs integer alpha, got {alpha}"
        )
    alpha = int(round(alpha))
    if ell < 0:
        raise DomainError(f"ell must be nonnegative, got {ell}")
    if (alpha + ell) % 2:
        return 0.0
    z = (alpha - ell) / 2 + 1
    if _is_nonpositive_integer(z):
        return 0.0

    log_mag = (
        math.log(2 * (ell + 1))
        - (alpha + 1) * math.log(2.0)
        + gammaln(alpha + 1)
        - gammaln((alpha + ell) / 2 + 2)
        - gammaln(z)
    )
    return float(gammasgn(z) * math.exp(log_mag))


def coeff_b(alpha: float, ell: int) -> float:
    """
    Coefficient of U_{2 ell} in the expansion of |x|^alpha (ell = 0 is the constant term).

    b = (2 ell + 1) / 2^alpha * Gamma(alpha+1) / (Gamma(alpha/2 + ell + 2) Gamma(alpha/2 - ell + 1))
    """
    _check_alpha(alpha)
    if ell < 0:
        raise DomainError(f"ell must be nonnegative, got {ell}")
    z = alpha / 2 - ell + 1
    if _is_nonpositive_integer(z):
        return 0.0

    log_mag = (
        math.log(2 * ell + 1)
        - alpha * math.log(2.0)
        + gammaln(alpha + 1)
        - gammaln(alpha / 2 + ell + 2)
        - gammaln(z)
    )
    # 1/Gamma(z) carries the sign of Gamma(z); the other Gamma arguments are positive
    return float(gammasgn(z) * math.exp(log_mag))


def expand_power(alpha: int, signed: bool = True, L: Optional[int] = None) -> ChebyshevSeries:
    """
    U-series of x^alpha (signed) or |x|^alpha (unsigned).

    The signed series and the unsigned series for even alpha are exact and stop
    at degree alpha. |x|^alpha with odd alpha is not a polynomial; its series is
    truncated at degree L (default ``settings.chebyshev_truncation``).

    Args:
        alpha: Positive integer exponent
        signed: x^alpha when True, |x|^alpha otherwise
        L: Truncation degree for the non-polynomial case

    Returns:
        ChebyshevSeries
    """
    if isinstance(alpha, float) and not alpha.is_integer():
        raise UnsupportedParameterError(f"expand_power needs integer alpha, got {alpha}")
    alpha = int(alpha)
    if alpha < 1:
        raise DomainError(f"alpha must be a positive integer, got {alpha}")

    if signed:
        return ChebyshevSeries(coefficients=[coeff_a(alpha, ell) for ell in range(alpha + 1)])

    degree = alpha if alpha % 2 == 0 else (settings.chebyshev_truncation if L is None else L)
    coefficients = [0.0] * (degree + 1)
    for ell in range(degree // 2 + 1):
        coefficients[2 * ell] = coeff_b(alpha, ell)
    return ChebyshevSeries(coefficients=coefficients)


# ============================================
# Indicator expansions
# ============================================

def _antiderivative(ell: np.ndarray, phi: float) -> np.ndarray:
    """(1/pi)[sin(l phi)/l - sin((l+2)phi)/(l+2)], with the l = 0 limit phi."""
    out = np.empty(ell.shape, dtype=np.float64)
    zero = ell == 0
    pos = ~zero
    out[zero] = phi - math.sin(2 * phi) / 2
    lp = ell[pos].astype(np.float64)
    out[pos] = np.sin(lp * phi) / lp - np.sin((lp + 2) * phi) / (lp + 2)
    return out / math.pi


def expand_indicator(c: float, d: float, L: Optional[int] = None) -> ChebyshevSeries:
    """
    Coefficients of the indicator of [c, d] in the U basis.

    f_hat(l) = (2/pi) int_c^d sqrt(1 - x^2) U_l(x) dx, in closed form via x = cos phi.

    Args:
        c: Left end, -1 <= c
        d: Right end, d <= 1, c < d
        L: Truncation degree (default ``settings.chebyshev_truncation``)

    Returns:
        ChebyshevSeries with coefficients f_hat(0..L)
    """
    L = settings.chebyshev_truncation if L is None else int(L)
    if L < 0:
        raise DomainError(f"truncation must be nonnegative, got {L}")
    if not (-1.0 <= c < d <= 1.0):
        raise DomainError(f"need -1 <= c < d <= 1, got c={c}, d={d}")

    ell = np.arange(L + 1)
    upper = _antiderivative(ell, math.acos(c))
    lower = _antiderivative(ell, math.acos(d))
    return ChebyshevSeries(coefficients=(upper - lower).tolist())


def sign_indicator_coefficients(L: Optional[int] = None) -> ChebyshevSeries:
    """Indicator of [0, 1]: counts S > 0 through cos theta."""
    return expand_indicator(0.0, 1.0, L)


def extreme_indicator_coefficients(delta: float, L: Optional[int] = None) -> ChebyshevSeries:
    """Indicator of [-delta, delta]: counts |S| <= 2 delta sqrt(p)."""
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    return expand_indicator(-delta, delta, L)
