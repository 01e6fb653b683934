"""Exact integer primitives: Kronecker symbol, Moebius function, discriminants,
and the invariants of half-integral 2x2 matrices."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd, isqrt


class ConstraintError(ValueError):
    """An input violates a documented precondition."""


class MissingDataError(LookupError):
    """Required coefficient or weight data is not available."""


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization of |n| (n != 0)."""
    n = abs(n)
    if n == 0:
        raise ConstraintError("cannot factor 0")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@lru_cache(maxsize=None)
def prime_factors(n: int) -> tuple[int, ...]:
    return tuple(sorted(factorize(n)))


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
    return [i for i, flag in enumerate(sieve) if flag]


def divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    for d in range(1, isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
    return small + large[::-1]


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n), defined for all integers a and n."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n) for odd n > 0
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def moebius(n: int) -> int:
    if n < 1:
        raise ConstraintError(f"moebius needs n >= 1, got {n}")
    if n == 1:
        return 1
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factorize(n).values())


def is_fundamental_discriminant(d: int) -> bool:
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


@dataclass(frozen=True)
class DiscriminantDecomposition:
    """D = d * f**2 with d fundamental and f > 0."""

    d: int
    f: int


@lru_cache(maxsize=65536)
def fundamental_decompose(D: int) -> DiscriminantDecomposition:
    """Write a negative discriminant D as d * f**2 with d fundamental."""
    if D >= 0 or D % 4 not in (0, 1):
        raise ConstraintError(f"expected D < 0 with D = 0,1 mod 4, got {D}")
    delta = 1
    for q, e in factorize(D).items():
        delta *= q ** (e // 2)
    d, f = D // delta**2, delta
    if d % 4 in (2, 3):
        # only possible when D = 0 mod 4: put one factor 2 back
        d, f = 4 * d, f // 2
    return DiscriminantDecomposition(d, f)


@dataclass(frozen=True)
class HalfIntegralMatrix:
    """T = [[u, v/2], [v/2, w]], stored by the integers (u, v, w)."""

    u: int
    v: int
    w: int

    def __post_init__(self):
        if self.u <= 0 or 4 * self.u * self.w - self.v**2 <= 0:
            raise ConstraintError(f"T = ({self.u}, {self.v}, {self.w}) is not positive definite")

    @property
    def disc(self) -> int:
        """D_T = det(2T) = 4uw - v^2."""
        return 4 * self.u * self.w - self.v**2

    @property
    def content(self) -> int:
        """c(T) = gcd(u, v, w)."""
        return gcd(gcd(self.u, self.v), self.w)

    def divide(self, d: int) -> "HalfIntegralMatrix":
        if self.content % d:
            raise ConstraintError(f"{d} does not divide c(T) = {self.content}")
        return HalfIntegralMatrix(self.u // d, self.v // d, self.w // d)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.u, self.v, self.w)


def matrix_invariants(T: HalfIntegralMatrix) -> tuple[int, int, DiscriminantDecomposition]:
    return T.disc, T.content, fundamental_decompose(-T.disc)


def divisor_set_S_T(T: HalfIntegralMatrix, N: int, p: int) -> list[int]:
    """Divisors d of c(T) prime to Np with -D_T/d^2 = 0,1 mod 4."""
    if gcd(N, p) != 1:
        raise ConstraintError(f"gcd(N, p) must be 1, got N={N}, p={p}")
    D = T.disc
    return [
        d
        for d in divisors(T.content)
        if gcd(d, N * p) == 1 and (-D // (d * d)) % 4 in (0, 1)
    ]


def divisor_consistency(T: HalfIntegralMatrix, d: int, N: int, p: int) -> DiscriminantDecomposition:
    """Decomposition of -D_T/d^2 for d in S_T; checks it shares the fundamental part of -D_T."""
    if d not in divisor_set_S_T(T, N, p):
        raise ConstraintError(f"d = {d} is not in S_T for T = {T.as_tuple()}, N={N}, p={p}")
    whole = fundamental_decompose(-T.disc)
    part = fundamental_decompose(-T.disc // (d * d))
    if part.d != whole.d or whole.f != d * part.f:
        raise AssertionError(f"decomposition mismatch: {whole} vs {part} at d = {d}")
    return part


def squarefree_odd_level(M: int) -> bool:
    return M % 2 == 1 and is_squarefree(M)
