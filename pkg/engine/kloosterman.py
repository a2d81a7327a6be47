"""
Kloosterman sums S(a,b;p) and Kloosterman angles theta_p(a).

S(a,b;p) = sum_{x=1}^{p-1} e((a*x + b*xbar)/p) is real for prime p, so every
evaluation here returns the real part. For fixed b the map a -> S(a,b;p) is
the (inverse-sign) DFT of x -> e(b*xbar/p), which gives the O(p log p) batch
path through ``engine.dft``.
"""

from pydantic import BaseModel, Field, ConfigDict, field_validator, model_validator
from cachetools import LRUCache, cached
from concurrent.futures import ThreadPoolExecutor
from typing import Union, Dict
from engine.core_arith import PrimeModulus, as_prime, batch_inverses, inverse_int
from engine.dft import BluesteinDFT
from shared.config import settings
from shared.exceptions import DomainError, CostGuardError
from shared.models import TableMethod
import numpy as np
import threading
import math
import logging

logger = logging.getLogger(__name__)

_NAIVE_BLOCK_ELEMENTS = 1 << 21
_lookup_lock = threading.RLock()


class KloostermanTable(BaseModel):
    """All values S(a,b;p), a = 0..p-1, for one twist b."""

    p: int = Field(..., description="Prime modulus")
    b: int = Field(..., description="Twist, reduced mod p, nonzero")
    method: TableMethod = Field(..., description="Evaluation method")
    values: np.ndarray = Field(..., description="values[a] = S(a,b;p)")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("values")
    @classmethod
    def validate_values(cls, v):
        """Store a read-only float64 vector."""
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("table values must be one-dimensional")
        v.setflags(write=False)
        return v

    @model_validator(mode="after")
    def validate_shape(self):
        """One value per residue."""
        if self.values.shape[0] != self.p:
            raise ValueError(f"expected {self.p} values, got {self.values.shape[0]}")
        return self

    @property
    def sqrt_p(self) -> float:
        return math.sqrt(self.p)

    def __getitem__(self, a: int) -> float:
        return float(self.values[int(a) % self.p])

    def max_abs(self) -> float:
        """max_{a >= 1} |S(a,b;p)|."""
        if self.p < 2:
            return 0.0
        return float(np.max(np.abs(self.values[1:])))


class AngleTable(BaseModel):
    """theta[a] = theta_p(h*a) in [0, pi] for all residues a."""

    p: int = Field(..., description="Prime modulus")
    h: int = Field(..., description="Multiplicative twist, reduced mod p, nonzero")
    theta: np.ndarray = Field(..., description="Angles in [0, pi]")
    cosines: np.ndarray = Field(..., description="cos(theta), clamped to [-1, 1]")
    clamp_events: int = Field(0, description="Residues whose |S|/(2 sqrt p) exceeded 1 before clamping", ge=0)

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("theta", "cosines")
    @classmethod
    def validate_arrays(cls, v):
        """Store read-only float64 vectors."""
        v = np.asarray(v, dtype=np.float64)
        v.setflags(write=False)
        return v

    def __getitem__(self, a: int) -> float:
        return float(self.theta[int(a) % self.p])


# ============================================
# Shared per-modulus lookups
# ============================================

@cached(LRUCache(maxsize=8), lock=_lookup_lock)
def inverse_table(p: int) -> np.ndarray:
    """Read-only table of all inverses mod p (inv[0] = 0)."""
    inv = batch_inverses(p)
    inv.setflags(write=False)
    return inv


@cached(LRUCache(maxsize=8), lock=_lookup_lock)
def unit_cosines(p: int) -> np.ndarray:
    """cos(2*pi*t/p) for t = 0..p-1."""
    c = np.cos(2.0 * np.pi * np.arange(p, dtype=np.float64) / p)
    c.setflags(write=False)
    return c


def _phases(a: int, b: int, p: int) -> np.ndarray:
    """(a*x + b*xbar) mod p for x = 1..p-1."""
    x = np.arange(1, p, dtype=np.int64)
    xbar = inverse_table(p)[1:]
    return (a * x + b * xbar) % p


def _pointwise_guard(p: int):
    if p > settings.naive_pointwise_max_p:
        raise CostGuardError(
            f"naive evaluation refused for p={p} > {settings.naive_pointwise_max_p}"
        )


# ============================================
# Pointwise evaluation
# ============================================

def kloosterman_naive(a: int, b: int, p: Union[int, PrimeModulus]) -> float:
    """
    Evaluate S(a,b;p) directly from its defining sum.

    Args:
        a: Any integer (reduced mod p)
        b: Any integer (reduced mod p)
        p: Prime modulus

    Returns:
        sum_{x=1}^{p-1} cos(2*pi*(a*x + b*xbar)/p)
    """
    p = as_prime(p)
    _pointwise_guard(p)
    t = _phases(int(a) % p, int(b) % p, p)
    return float(np.sum(unit_cosines(p)[t]))


def kloosterman_complex(a: int, b: int, p: Union[int, PrimeModulus]) -> complex:
    """
    The defining sum with explicit complex terms (reality oracle).

    Returns:
        sum_{x=1}^{p-1} e((a*x + b*xbar)/p) as a complex number
    """
    p = as_prime(p)
    _pointwise_guard(p)
    t = _phases(int(a) % p, int(b) % p, p)
    return complex(np.sum(np.exp(2j * np.pi * t / p)))


# ============================================
# Batch tables
# ============================================

def _naive_rows(a_block: np.ndarray, b: int, p: int) -> np.ndarray:
    x = np.arange(1, p, dtype=np.int64)
    xbar_term = (b * inverse_table(p)[1:]) % p
    t = (a_block[:, None] * x[None, :] + xbar_term[None, :]) % p
    return unit_cosines(p)[t].sum(axis=1)


def _build_naive(b: int, p: int) -> np.ndarray:
    rows = max(1, _NAIVE_BLOCK_ELEMENTS // p)
    blocks = [
        np.arange(start, min(start + rows, p), dtype=np.int64)
        for start in range(0, p, rows)
    ]
    workers = settings.workers
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda blk: _naive_rows(blk, b, p), blocks))
    else:
        parts = [_naive_rows(blk, b, p) for blk in blocks]
    return np.concatenate(parts)


def _build_dft(b: int, p: int) -> np.ndarray:
    signal = np.zeros(p, dtype=np.complex128)
    xbar = inverse_table(p)[1:]
    signal[1:] = np.exp(2j * np.pi * ((b * xbar) % p) / p)
    transformed = BluesteinDFT(p, sign=1)(signal)

    imag_residue = float(np.max(np.abs(transformed.imag)))
    if imag_residue > 1e-6 * math.sqrt(p):
        logger.warning(f"DFT table p={p}, b={b}: imaginary residue {imag_residue:.3e}")
    return transformed.real.copy()


def build_table(
    b: int,
    p: Union[int, PrimeModulus],
    method: Union[TableMethod, str] = TableMethod.DFT
) -> KloostermanTable:
    """
    Build the table of S(a,b;p) for every a mod p.

    Args:
        b: Twist, must not be divisible by p
        p: Prime modulus
        method: ``naive`` (O(p^2)) or ``dft`` (O(p log p))

    Returns:
        Immutable KloostermanTable

    Raises:
        DomainError: if p divides b
        CostGuardError: naive method above ``settings.naive_table_max_p``,
            DFT method above ``settings.dft_table_max_p``
    """
    p = as_prime(p)
    method = TableMethod(method)
    if b % p == 0:
        raise DomainError(f"twist b={b} is divisible by p={p}")
    b = b % p

    if method is TableMethod.NAIVE:
        if p > settings.naive_table_max_p:
            raise CostGuardError(
                f"naive table refused for p={p} > {settings.naive_table_max_p}; use method=dft"
            )
        values = _build_naive(b, p)
    else:
        if p > settings.dft_table_max_p:
            raise CostGuardError(
                f"DFT table refused for p={p} > {settings.dft_table_max_p}"
            )
        values = _build_dft(b, p)

    table = KloostermanTable(p=p, b=b, method=method, values=values)
    _check_weil(table)
    logger.info(f"Built Kloosterman table p={p}, b={b}, method={method.value}")
    return table


def _check_weil(table: KloostermanTable):
    limit = 2.0 * table.sqrt_p + settings.tol_weil
    worst = table.max_abs()
    if worst > limit:
        logger.warning(
            f"Weil bound exceeded numerically for p={table.p}: {worst:.9f} > {limit:.9f}"
        )


def build_angles(table: KloostermanTable, h: int) -> AngleTable:
    """
    Kloosterman angles theta_p(h*a) for every residue a.

    Uses S(x,1;p) = S(x*bbar, b; p), so tables of any twist work; with b = 1
    this is a plain gather at h*a mod p.

    Args:
        table: Kloosterman table for p
        h: Multiplicative twist, not divisible by p

    Returns:
        AngleTable with theta[a] = arccos(clamp(S(h*a,1;p) / (2 sqrt p)))
    """
    p = table.p
    if h % p == 0:
        raise DomainError(f"twist h={h} is divisible by p={p}")
    h = h % p

    shift = h if table.b == 1 else h * inverse_int(table.b, p) % p
    idx = (shift * np.arange(p, dtype=np.int64)) % p
    ratio = table.values[idx] / (2.0 * table.sqrt_p)

    clamp_events = int(np.count_nonzero(np.abs(ratio) > 1.0))
    if clamp_events:
        logger.debug(f"Clamped {clamp_events} cosines to [-1, 1] for p={p}, h={h}")
    cosines = np.clip(ratio, -1.0, 1.0)

    return AngleTable(
        p=p,
        h=h,
        theta=np.arccos(cosines),
        cosines=cosines,
        clamp_events=clamp_events
    )


# ============================================
# Table diagnostics
# ============================================

def table_moments(table: KloostermanTable) -> Dict[str, float]:
    """
    First and second moments over the primitive residues.

    Returns:
        Dictionary with ``first`` = sum_{a>=1} S and ``second`` = sum_{a>=1} S^2
    """
    v = table.values[1:]
    return {
        "first": float(np.sum(v)),
        "second": float(np.sum(v * v)),
        "total": float(np.sum(table.values)),
    }


def zero_bucket(table: KloostermanTable, tol: float = None) -> np.ndarray:
    """
    Residues a >= 1 whose sum is numerically zero.

    Args:
        table: Kloosterman table
        tol: Relative tolerance in units of sqrt(p) (default ``settings.tol_zero``)

    Returns:
        Sorted int array of such a
    """
    tol = settings.tol_zero if tol is None else tol
    hits = np.flatnonzero(np.abs(table.values[1:]) <= tol * table.sqrt_p)
    return hits + 1
