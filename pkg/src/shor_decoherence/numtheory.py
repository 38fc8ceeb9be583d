"""Integer arithmetic for order finding, period recovery and factor extraction."""
from __future__ import annotations

import math
from fractions import Fraction

from .errors import DomainError, InvalidOrder, NotCoprime

__all__ = [
    "mod_pow",
    "gcd",
    "multiplicative_order",
    "continued_fraction",
    "convergents",
    "factors_from_order",
    "is_prime",
]


def mod_pow(base: int, exponent: int, modulus: int) -> int:
    """base**exponent mod modulus. Python ints are unbounded, so nothing overflows."""
    if modulus < 2:
        raise DomainError(f"modulus must be >= 2, got {modulus}")
    if base < 0 or exponent < 0:
        raise DomainError("base and exponent must be non-negative")
    return pow(base, exponent, modulus)


def gcd(a: int, b: int) -> int:
    if a < 0 or b < 0:
        raise DomainError("gcd arguments must be non-negative")
    if a == 0 and b == 0:
        raise DomainError("gcd(0, 0) is undefined")
    return math.gcd(a, b)


def multiplicative_order(x: int, n: int) -> int:
    """Smallest r >= 1 with x^r = 1 mod n, by direct iteration.

    Deliberately brute force: it is the classical oracle the simulated
    measurement statistics are checked against.
    """
    if n < 3:
        raise DomainError(f"N must be >= 3, got {n}")
    if not 1 <= x < n:
        raise DomainError(f"x must lie in [1, N), got {x}")
    g = math.gcd(x, n)
    if g != 1:
        raise NotCoprime(x, n, g)
    value, r = x % n, 1
    while value != 1:
        value = (value * x) % n
        r += 1
    return r


def continued_fraction(num: int, den: int) -> list[int]:
    """Partial quotients [a0; a1, a2, ...] of num/den."""
    if den <= 0:
        raise DomainError(f"denominator must be positive, got {den}")
    if num < 0:
        raise DomainError(f"numerator must be non-negative, got {num}")
    terms = []
    while den:
        a, rem = divmod(num, den)
        terms.append(a)
        num, den = den, rem
    return terms


def convergents(num: int, den: int) -> list[Fraction]:
    """All continued-fraction convergents of num/den, in order.

    The last entry equals num/den exactly.
    """
    out = []
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    for a in continued_fraction(num, den):
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        out.append(Fraction(p, q))
    return out


def factors_from_order(x: int, n: int, r: int) -> tuple[int, int] | None:
    """Nontrivial factor pair from an order (or multiple of it) via gcd(x^(r/2) -+ 1, N).

    Returns None for odd r, for x^(r/2) = -1 mod N, and whenever a gcd would be
    trivial; these are normal outcomes that call for another base.
    """
    if r < 1 or pow(x, r, n) != 1:
        raise InvalidOrder(f"{x}^{r} is not 1 mod {n}")
    if r % 2:
        return None
    half = pow(x, r // 2, n)
    if half == n - 1:
        return None
    f1 = math.gcd(half - 1, n)
    f2 = math.gcd(half + 1, n)
    if not (1 < f1 < n and 1 < f2 < n):
        return None
    return f1, f2


def is_prime(n: int) -> bool:
    """Trial division; fine for the desk-scale N this package accepts."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))
