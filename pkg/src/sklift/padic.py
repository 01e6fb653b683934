"""Fixed-precision p-adic numbers, logarithms and weight interpolation.

Values are u * p^v with u a unit known modulo p^r (r = relative precision).
Precision is tracked pessimistically through every operation. A value whose
digits are all unknown-or-zero is a zero known to absolute precision v.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .arith import ConstraintError, is_prime, kronecker

DEFAULT_PRECISION = 20


class PrecisionLossError(ArithmeticError):
    """The requested quantity has no correct digits left."""


def _val(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _check_prime(p: int) -> None:
    if p == 2 or not is_prime(p):
        raise ConstraintError(f"p must be an odd prime, got {p}")


class PadicElement:
    __slots__ = ("p", "valuation", "unit", "precision")

    def __init__(self, p: int, valuation: int, unit: int, precision: int):
        # canonical form: unit prime to p, or unit == 0 for a zero known to p^valuation
        self.p = p
        absprec = valuation + max(precision, 0)
        u = unit % p**precision if precision > 0 else 0
        if u == 0:
            self.valuation, self.unit, self.precision = absprec, 0, 0
            return
        w = _val(u, p)
        self.valuation = valuation + w
        self.precision = precision - w
        self.unit = (u // p**w) % p**self.precision

    # -- constructors -------------------------------------------------------------

    @classmethod
    def from_rational(cls, x, p: int, precision: int = DEFAULT_PRECISION) -> "PadicElement":
        _check_prime(p)
        x = Fraction(x)
        if x == 0:
            return cls(p, precision, 0, 0)
        v = _val(x.numerator, p) - _val(x.denominator, p)
        num = x.numerator // p ** max(v, 0)
        den = x.denominator // p ** max(-v, 0)
        mod = p**precision
        return cls(p, v, num * pow(den, -1, mod) % mod, precision)

    @classmethod
    def zero(cls, p: int, absprec: int = DEFAULT_PRECISION) -> "PadicElement":
        return cls(p, absprec, 0, 0)

    def _coerce(self, other) -> "PadicElement":
        if isinstance(other, PadicElement):
            if other.p != self.p:
                raise ConstraintError(f"mixing primes {self.p} and {other.p}")
            return other
        # exact rationals get enough digits not to limit the result
        return PadicElement.from_rational(other, self.p, self.absprec - min(self.valuation, 0) + 2 + _denominator_room(other, self.p))

    # -- structure ------------------------------------------------------------------

    @property
    def absprec(self) -> int:
        return self.valuation + self.precision

    def is_zero(self) -> bool:
        return self.unit == 0

    def is_unit(self) -> bool:
        return self.unit != 0 and self.valuation == 0

    def unit_part(self) -> "PadicElement":
        if self.is_zero():
            raise ConstraintError("zero has no unit part")
        return PadicElement(self.p, 0, self.unit, self.precision)

    def lift(self) -> Fraction:
        """The rational representative u * p^v with 0 <= u < p^r."""
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.valuation

    # -- arithmetic -------------------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        p = self.p
        absprec = min(self.absprec, other.absprec)
        if self.is_zero() and other.is_zero():
            return PadicElement.zero(p, absprec)
        v = min([x.valuation for x in (self, other) if not x.is_zero()] + [absprec])
        total = 0
        for x in (self, other):
            if not x.is_zero():
                total += x.unit * p ** (x.valuation - v)
        return PadicElement(p, v, total, absprec - v)

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero():
            return self
        return PadicElement(self.p, self.valuation, -self.unit, self.precision)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        p = self.p
        if self.is_zero() or other.is_zero():
            if self.is_zero() and other.is_zero():
                return PadicElement.zero(p, self.valuation + other.valuation)
            nz = other if self.is_zero() else self
            z = self if self.is_zero() else other
            return PadicElement.zero(p, z.valuation + nz.valuation)
        prec = min(self.precision, other.precision)
        return PadicElement(p, self.valuation + other.valuation, self.unit * other.unit, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of a p-adic zero")
        mod = self.p**self.precision
        return PadicElement(self.p, -self.valuation, pow(self.unit, -1, mod), self.precision)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = PadicElement.from_rational(1, self.p, self.precision if not self.is_zero() else DEFAULT_PRECISION)
        if n == 0:
            return out
        if self.is_zero():
            return PadicElement.zero(self.p, self.valuation * n)
        return PadicElement(self.p, self.valuation * n, pow(self.unit, n, self.p**self.precision), self.precision)

    # -- comparison -------------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, PadicElement):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError, ConstraintError):
                return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.p, self.valuation, self.unit, self.precision))

    def identical(self, other: "PadicElement") -> bool:
        return (self.p, self.valuation, self.unit, self.precision) == (
            other.p,
            other.valuation,
            other.unit,
            other.precision,
        )

    def __repr__(self):
        if self.is_zero():
            return f"O({self.p}^{self.valuation})"
        return f"{self.unit}*{self.p}^{self.valuation} + O({self.p}^{self.absprec})"

    # -- serialization ------------------------------------------------------------------

    def serialize(self) -> str:
        """p-adic:<digits>:<precision>; digits is the integer unit, with an
        optional e<v> suffix for the valuation, precision is absolute."""
        if self.is_zero():
            return f"p-adic:0:{self.absprec}"
        digits = str(self.unit) if self.valuation == 0 else f"{self.unit}e{self.valuation}"
        return f"p-adic:{digits}:{self.absprec}"

    @classmethod
    def parse(cls, text: str, p: int) -> "PadicElement":
        tag, digits, absprec = text.split(":")
        if tag != "p-adic":
            raise ConstraintError(f"not a p-adic literal: {text}")
        absprec = int(absprec)
        if "e" in digits:
            u, v = digits.split("e")
            u, v = int(u), int(v)
        else:
            u, v = int(digits), 0
        if u == 0:
            return cls.zero(p, absprec)
        w = _val(u, p)
        return cls(p, v + w, u // p**w, absprec - v - w)


def _denominator_room(x, p: int) -> int:
    x = Fraction(x)
    if x == 0:
        return 0
    return abs(_val(x.numerator, p) - _val(x.denominator, p))


Value = Union[Fraction, PadicElement]


# -- logarithms --------------------------------------------------------------------------


def teichmuller(a: int, p: int, precision: int = DEFAULT_PRECISION) -> PadicElement:
    """The (p-1)-st root of unity congruent to a mod p."""
    _check_prime(p)
    if a % p == 0:
        raise ConstraintError("Teichmueller lift needs a unit residue")
    mod = p**precision
    w = a % mod
    for _ in range(precision + 1):
        w = pow(w, p, mod)
    return PadicElement(p, 0, w, precision)


def _log_one_plus(y: int, vy: int, p: int, absprec: int) -> int:
    """sum_{n>=1} (-1)^(n+1) y^n / n modulo p^absprec, for v(y) = vy >= 1 (y integral)."""
    guard = 1
    while p**guard <= absprec * 4 + 4:
        guard += 1
    work = absprec + guard
    mod = p**work
    total = 0
    n = 1
    yn = y % mod
    while n * vy - (_val(n, p)) < absprec + guard:
        e = _val(n, p)
        m = n // p**e
        term = (yn // p**e) * pow(m, -1, mod) % mod
        total += term if n % 2 else -term
        n += 1
        yn = yn * y % (mod * p**guard)
    return total % p**absprec


def iwasawa_log(x: PadicElement, branch: Value | None = None) -> PadicElement:
    """Iwasawa logarithm on units (log p = 0 convention is NOT assumed): for a
    non-unit, ``branch`` gives the value of log(p)."""
    p = x.p
    if x.is_zero():
        raise ConstraintError("log of zero")
    if x.valuation != 0:
        if branch is None:
            raise ConstraintError("log of a non-unit needs a declared branch value for log(p)")
        return iwasawa_log(x.unit_part()) + x.valuation * (branch if isinstance(branch, PadicElement) else PadicElement.from_rational(branch, p, x.precision))
    r = x.precision
    mod = p ** (r + 1)
    y = (pow(x.unit, p - 1, mod) - 1) % mod
    if y % p:
        raise AssertionError("x^(p-1) should be 1 mod p")
    # log(x) = log(x^(p-1)) / (p-1)
    if y == 0:
        return PadicElement.zero(p, r)
    vy = _val(y, p)
    val = _log_one_plus(y, vy, p, r)
    val = val * pow(p - 1, -1, p**r) % p**r
    return PadicElement(p, 0, val, r) if val % p else _from_abs(val, p, r)


def _from_abs(n: int, p: int, absprec: int) -> PadicElement:
    if n % p**absprec == 0:
        return PadicElement.zero(p, absprec)
    v = _val(n, p)
    return PadicElement(p, v, n // p**v, absprec - v)


def padic_exp(x: PadicElement) -> PadicElement:
    """exp(x) for v(x) >= 1 (p odd); used to test the logarithm."""
    p = x.p
    if x.is_zero():
        return PadicElement.from_rational(1, p, x.absprec)
    if x.valuation < 1:
        raise ConstraintError("exp converges only on p Z_p")
    absprec = x.absprec
    guard = absprec // (p - 1) + 2
    mod = p ** (absprec + guard)
    xi = x.unit * p**x.valuation % mod
    total = 1
    term_num = 1
    fact = 1
    n = 1
    while True:
        term_num = term_num * xi % (mod * p**guard)
        fact *= n
        e = _val(fact, p)
        if n * x.valuation - e >= absprec + 1 and n > 1:
            break
        total += (term_num // p**e) * pow(fact // p**e, -1, mod)
        n += 1
    return _from_abs(total % p**absprec, p, absprec) if total % p == 0 else PadicElement(p, 0, total, absprec)


def branch_log_q(x: PadicElement, q: PadicElement) -> PadicElement:
    """The branch log_q of the logarithm with log_q(q) = 0."""
    if q.is_zero() or q.valuation <= 0:
        raise ConstraintError("branch_log_q needs q with positive valuation")
    if x.is_zero():
        raise ConstraintError("log of zero")
    lu = iwasawa_log(x.unit_part())
    if x.valuation == 0:
        return lu
    return lu - Fraction(x.valuation, q.valuation) * iwasawa_log(q.unit_part())


def euler_factor(d: int, a_p_inv: Value, k: int, p: int) -> Value:
    """1 - (d/p) a_p^{-1} p^{k/2-1}."""
    if k < 2 or k % 2:
        raise ConstraintError(f"weight must be even and >= 2, got {k}")
    chi = kronecker(d, p)
    return 1 - chi * a_p_inv * p ** (k // 2 - 1)


# -- weight interpolation -----------------------------------------------------------


def ladder(p: int, m_max: int) -> list[int]:
    """Nodes k_m = 2 + (p-1) p^m, m = 0..m_max."""
    return [2 + (p - 1) * p**m for m in range(m_max + 1)]


@dataclass
class WeightSeries:
    """Samples (k_i, x(k_i)) of a function of the weight, k_i = 2 mod (p-1)."""

    p: int
    samples: list

    def __post_init__(self):
        _check_prime(self.p)
        ks = [k for k, _ in self.samples]
        if len(set(ks)) != len(ks):
            raise ConstraintError(f"duplicate sample weights: {ks}")
        for k in ks:
            if (k - 2) % (self.p - 1):
                raise ConstraintError(f"weight {k} is not 2 mod {self.p - 1}")

    @property
    def nodes(self) -> list[int]:
        return [k for k, _ in self.samples]

    def divided_differences(self) -> list:
        ks = self.nodes
        table = [v for _, v in self.samples]
        coeffs = [table[0]]
        for j in range(1, len(ks)):
            table = [(table[i + 1] - table[i]) / (ks[i + j] - ks[i]) for i in range(len(table) - 1)]
            coeffs.append(table[0])
        return coeffs

    def evaluate(self, k):
        ks = self.nodes
        coeffs = self.divided_differences()
        out = coeffs[-1]
        for j in range(len(coeffs) - 2, -1, -1):
            out = out * (k - ks[j]) + coeffs[j]
        return out

    def map(self, fn) -> "WeightSeries":
        return WeightSeries(self.p, [(k, fn(k, v)) for k, v in self.samples])


def weight_derivative(series: WeightSeries, at: int = 2):
    """Derivative at k = at of the Newton interpolant through the samples."""
    if len(series.samples) < 2:
        raise ConstraintError("a derivative needs at least two samples")
    ks = series.nodes
    coeffs = series.divided_differences()
    # d/dk prod_{i<j} (k - k_i) evaluated at `at`, by the product rule
    total = None
    prod, dprod = 1, 0
    for j, c in enumerate(coeffs):
        if j > 0:
            dprod = dprod * (at - ks[j - 1]) + prod
            prod = prod * (at - ks[j - 1])
            term = c * dprod
            total = term if total is None else total + term
    if isinstance(total, PadicElement) and total.is_zero() and total.absprec <= 0:
        raise PrecisionLossError("divided differences exhausted the available precision")
    return total


def product_rule_check(f: WeightSeries, g: WeightSeries, fg: WeightSeries | None = None, at: int = 2) -> dict:
    """Compare (fg)'(2) with f'(2) g(2) + f(2) g'(2)."""
    if f.nodes != g.nodes or (fg is not None and fg.nodes != f.nodes):
        raise ConstraintError("series must share the same nodes")
    if fg is None:
        fg = WeightSeries(f.p, [(k, a * b) for (k, a), (_, b) in zip(f.samples, g.samples)])
    lhs = weight_derivative(fg, at)
    rhs = weight_derivative(f, at) * g.evaluate(at) + f.evaluate(at) * weight_derivative(g, at)
    return {"lhs": lhs, "rhs": rhs, "equal": lhs == rhs}
