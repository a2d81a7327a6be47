"""
Exact integer and modular arithmetic: primality, inverses, prime enumeration.

Everything here is a pure function on Python ints or numpy int64 arrays.
"""

from pydantic import BaseModel, Field, ConfigDict, field_validator, model_validator
from typing import List, Union
from shared.exceptions import DomainError
import numpy as np
import math
import logging

logger = logging.getLogger(__name__)

# Deterministic for n < 341_550_071_728_321
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17)
MR_DETERMINISTIC_LIMIT = 341_550_071_728_321

PRIMES_IN_MAX = 10**9
_SIEVE_SEGMENT = 1 << 22


def is_prime(n: int) -> bool:
    """
    Deterministic Miller-Rabin primality test.

    Args:
        n: Integer to test, must be below 3.4e14

    Returns:
        True when n is prime
    """
    n = int(n)
    if n < 2:
        return False
    if n < 64:
        return n in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61)
    if n >= MR_DETERMINISTIC_LIMIT:
        raise DomainError(f"primality test is only deterministic below {MR_DETERMINISTIC_LIMIT}")
    for q in _MR_WITNESSES:
        if n % q == 0:
            return False

    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1

    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class PrimeModulus(BaseModel):
    """A certified prime modulus p."""

    p: int = Field(..., description="Prime modulus", ge=2)

    model_config = ConfigDict(frozen=True)

    @field_validator("p")
    @classmethod
    def validate_prime(cls, v):
        """Reject composites."""
        if not is_prime(v):
            raise ValueError(f"{v} is not prime")
        return v

    def __int__(self) -> int:
        return self.p


class Residue(BaseModel):
    """An integer in [0, p-1] together with its modulus."""

    value: int = Field(..., description="Representative in [0, p-1]", ge=0)
    modulus: PrimeModulus

    model_config = ConfigDict(frozen=True)

    @field_validator("value")
    @classmethod
    def validate_nonnegative(cls, v):
        """Representatives are nonnegative."""
        if v < 0:
            raise ValueError("residue representative must be nonnegative")
        return v

    @model_validator(mode="after")
    def validate_reduced(self):
        """Representatives lie below the modulus."""
        if self.value >= self.modulus.p:
            raise ValueError(f"residue {self.value} not reduced mod {self.modulus.p}")
        return self

    @classmethod
    def of(cls, x: int, p: Union[int, PrimeModulus]) -> "Residue":
        """Reduce an arbitrary integer modulo p."""
        modulus = p if isinstance(p, PrimeModulus) else PrimeModulus(p=p)
        return cls(value=int(x) % modulus.p, modulus=modulus)

    @property
    def p(self) -> int:
        return self.modulus.p


def as_prime(p: Union[int, PrimeModulus]) -> int:
    """
    Validate a modulus and return it as an int.

    Raises:
        DomainError: if p is not prime
    """
    if isinstance(p, PrimeModulus):
        return p.p
    p = int(p)
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    return p


def _egcd(a: int, b: int):
    """Iterative extended Euclid: returns (g, x, y) with a*x + b*y = g."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def mod_inverse(x: Residue) -> Residue:
    """
    Modular inverse by the extended Euclidean algorithm.

    Args:
        x: Nonzero residue mod p

    Returns:
        y with x*y = 1 (mod p)

    Raises:
        DomainError: if x = 0
    """
    if x.value == 0:
        raise DomainError("zero has no inverse")
    g, s, _ = _egcd(x.value, x.p)
    # g == 1 because p is prime and x.value != 0
    return Residue(value=s % x.p, modulus=x.modulus)


def inverse_int(x: int, p: int) -> int:
    """Inverse of x mod p on plain ints (p assumed prime)."""
    x %= p
    if x == 0:
        raise DomainError("zero has no inverse")
    return _egcd(x, p)[1] % p


def batch_inverses(p: int) -> np.ndarray:
    """
    All inverses mod p by the prefix-product trick.

    One extended-Euclid call plus 3(p-1) multiplications.

    Args:
        p: Prime modulus

    Returns:
        int64 array ``inv`` of length p with inv[x] * x = 1 (mod p) for x >= 1, inv[0] = 0
    """
    p = int(p)
    inv = np.zeros(p, dtype=np.int64)
    if p == 2:
        inv[1] = 1
        return inv

    prefix = [1] * p
    acc = 1
    for x in range(1, p):
        acc = acc * x % p
        prefix[x] = acc

    # prefix[p-1] = (p-1)! = -1 by Wilson, but go through Euclid anyway
    running = inverse_int(prefix[p - 1], p)
    out = [0] * p
    for x in range(p - 1, 0, -1):
        out[x] = running * prefix[x - 1] % p
        running = running * x % p

    inv[:] = out
    return inv


def _base_primes(limit: int) -> np.ndarray:
    """Simple sieve of Eratosthenes up to ``limit`` inclusive."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for q in range(2, math.isqrt(limit) + 1):
        if is_p[q]:
            is_p[q * q::q] = False
    return np.flatnonzero(is_p).astype(np.int64)


def primes_in(lo: int, hi: int) -> List[int]:
    """
    All primes q with lo < q <= hi, ascending (segmented sieve).

    Args:
        lo: Exclusive lower end
        hi: Inclusive upper end, at most 1e9

    Returns:
        Sorted list of primes; empty when hi <= lo
    """
    lo, hi = int(lo), int(hi)
    if hi > PRIMES_IN_MAX:
        raise DomainError(f"primes_in supports hi <= {PRIMES_IN_MAX}, got {hi}")
    if hi <= lo or hi < 2:
        return []

    start = max(lo + 1, 2)
    base = _base_primes(math.isqrt(hi))
    found: List[int] = []

    low = start
    while low <= hi:
        high = min(low + _SIEVE_SEGMENT, hi + 1)  # exclusive
        mask = np.ones(high - low, dtype=bool)
        for q in base:
            q = int(q)
            q2 = q * q
            if q2 >= high:
                break
            first = max(q2, ((low + q - 1) // q) * q)
            mask[first - low::q] = False
        found.extend((low + np.flatnonzero(mask)).tolist())
        low = high

    return found


def prime_count(lo: int, hi: int) -> int:
    """Number of primes in (lo, hi]."""
    return len(primes_in(lo, hi))


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    q = max(int(n) + 1, 2)
    while not is_prime(q):
        q += 1
    return q
