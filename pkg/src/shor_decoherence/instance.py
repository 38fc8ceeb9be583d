"""Problem instances (N, x, q) and the restricted index sets A_k.

The quantum registers are never built. Everything downstream works from the
fact that the a-values sharing a second-register value x^k form the arithmetic
progression k, k + r, k + 2r, ... below q.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidInstance, InvalidModulus, NotCoprime, ResourceLimit
from .numtheory import is_prime, multiplicative_order

MAX_N = 2**20
MAX_Q = 2**22
HARD_MAX_N = 2**31


class LogBase(enum.Enum):
    NATURAL = "e"
    BINARY = "2"
    DECIMAL = "10"

    def log(self, value: float) -> float:
        if self is LogBase.NATURAL:
            return math.log(value)
        if self is LogBase.BINARY:
            return math.log2(value)
        return math.log10(value)


class ModulusOutOfBoundWarning(UserWarning):
    """An overridden q lies outside [N^2, 2N^2)."""


@dataclass(frozen=True)
class Standard:
    """Pick the power of two in [N^2, 2N^2)."""


@dataclass(frozen=True)
class Override:
    q: int


QPolicy = Standard | Override


def is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


def choose_q(n: int, policy: QPolicy = Standard(), r: int | None = None) -> int:
    """Fourier modulus for N.

    An override may fall outside [N^2, 2N^2) (the Fig. 1 setting q=128 for
    N=21 does); that only warns. It must still be a power of two and, when the
    order is known, at least 2r.
    """
    if n < 3:
        raise DomainError(f"N must be >= 3, got {n}")
    if isinstance(policy, Standard):
        return 1 << (n * n - 1).bit_length()
    q = policy.q
    if not is_power_of_two(q) or q < 2:
        raise InvalidModulus(f"q={q} is not a power of two >= 2")
    if r is not None and q < 2 * r:
        raise InvalidModulus(f"q={q} is smaller than 2r={2 * r}")
    if not n * n <= q < 2 * n * n:
        warnings.warn(
            f"q={q} lies outside [N^2, 2N^2) = [{n * n}, {2 * n * n})",
            ModulusOutOfBoundWarning,
            stacklevel=2,
        )
    return q


@dataclass(frozen=True)
class IndexSet:
    """{k, k + r, k + 2r, ...} intersected with [0, q), kept as (offset, step, count)."""

    k: int
    step: int
    count: int

    @property
    def offset(self) -> int:
        return self.k

    def members(self) -> np.ndarray:
        return self.offset + self.step * np.arange(self.count, dtype=np.int64)

    def __len__(self) -> int:
        return self.count

    def __contains__(self, a: int) -> bool:
        return a >= self.offset and (a - self.offset) % self.step == 0 and (a - self.offset) // self.step < self.count


@dataclass(frozen=True)
class ProblemInstance:
    N: int
    x: int
    q: int
    r: int
    L: float
    log_base: LogBase = LogBase.NATURAL
    q_in_bound: bool = field(default=True, compare=False)

    @property
    def bits(self) -> int:
        return self.q.bit_length() - 1

    def index_set(self, k: int) -> IndexSet:
        return index_set(self, k)

    def counts(self) -> np.ndarray:
        """M_k for k = 0..r-1."""
        return np.array([index_set(self, k).count for k in range(self.r)], dtype=np.int64)


def build_instance(
    n: int,
    x: int,
    q_policy: QPolicy = Standard(),
    *,
    log_base: LogBase = LogBase.NATURAL,
    force: bool = False,
) -> ProblemInstance:
    """Validate (N, x), find the order by brute force and pick q.

    ``force`` lifts the desk-scale guards (N <= 2^20, q <= 2^22) but never the
    hard limit N <= 2^31.
    """
    if n < 3:
        raise InvalidInstance(f"N must be >= 3, got {n}")
    if n > HARD_MAX_N:
        raise ResourceLimit(f"N={n} exceeds 2^31")
    if n > MAX_N and not force:
        raise ResourceLimit(f"N={n} exceeds the desk-scale guard 2^20 (pass force=True)")
    if not 2 <= x < n:
        raise InvalidInstance(f"x must lie in [2, N), got {x}")
    g = math.gcd(x, n)
    if g != 1:
        raise NotCoprime(x, n, g)
    if is_prime(n):
        raise InvalidInstance(f"N={n} is prime; there is nothing to factor")
    r = multiplicative_order(x, n)
    q = choose_q(n, q_policy, r=r)
    if q < 2 * r:
        raise InvalidModulus(f"q={q} is smaller than 2r={2 * r}")
    if q > MAX_Q and not force:
        raise ResourceLimit(f"q={q} exceeds the desk-scale guard 2^22 (pass force=True)")
    return ProblemInstance(
        N=n,
        x=x,
        q=q,
        r=r,
        L=log_base.log(n),
        log_base=log_base,
        q_in_bound=n * n <= q < 2 * n * n,
    )


def index_set(instance: ProblemInstance, k: int) -> IndexSet:
    if not 0 <= k < instance.r:
        raise DomainError(f"k must lie in [0, r={instance.r}), got {k}")
    count = (instance.q - 1 - k) // instance.r + 1
    return IndexSet(k=k, step=instance.r, count=count)
