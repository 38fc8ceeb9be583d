"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NotCoprime(DomainError):
    """The base shares a factor with N; the gcd is already a free factor."""

    def __init__(self, x: int, n: int, gcd: int):
        super().__init__(f"gcd({x}, {n}) = {gcd}; {gcd} is already a factor of {n}")
        self.x = x
        self.n = n
        self.gcd = gcd


class InvalidOrder(DomainError):
    """A claimed order does not satisfy x^r = 1 mod N."""


class InvalidModulus(DomainError):
    """The Fourier modulus q is not an admissible power of two."""


class InvalidInstance(DomainError):
    """N or x cannot form a factoring instance (e.g. N is prime)."""


class ResourceLimit(RuntimeError):
    """A desk-scale guard (register size, matrix size) would be exceeded."""


class Divergent(ArithmeticError):
    """Accumulated decoherence destroys the interference pattern (L^2 alpha >= 1)."""
