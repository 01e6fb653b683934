"""Weight 3/2 Shintani coefficients c_D(2) of a rational newform of level M.

c_D is computed as a twisted sum of cycle periods: for an auxiliary type-I
fundamental discriminant D0 < 0 with nonvanishing twisted L-value,

    c_D = sum over Gamma_0(M)-classes of forms Q = [A, B, C], M | A,
          of discriminant D |D0|, of chi_D0(Q) * <v, C_Q>

where v is the minus eigen-functional of the newform and C_Q is the closed
cycle {r, g_Q r} (g_Q the positive generator of the stabilizer of Q in
Gamma_0(M)), or for square discriminants the geodesic between the two rational
roots of Q. The result is one fixed multiple of the coefficient table of the
weight 3/2 eigenform, so every ratio c_D / c_D' is canonical.
"""

from __future__ import annotations

import enum
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

from . import quadform as qf
from .arith import ConstraintError, MissingDataError, factorize, is_fundamental_discriminant, is_square, kronecker
from .modsym import NewformSlot, period_integral, twisted_L_value

log = logging.getLogger(__name__)


class DiscriminantType(enum.Enum):
    TYPE_I = "I"
    TYPE_II = "II"
    NEITHER = "neither"


def classify_discriminant(d: int, slot: NewformSlot, p: int) -> DiscriminantType:
    """Compare (d/l) with the Atkin-Lehner signs w_l for l | Np (p the distinguished prime)."""
    M = slot.level
    if M % p:
        raise ConstraintError(f"p = {p} does not divide the level {M}")
    if not is_fundamental_discriminant(d) or d >= 0:
        raise ConstraintError(f"{d} is not a negative fundamental discriminant")
    if gcd(d, M) != 1:
        raise ConstraintError(f"discriminant {d} is not coprime to Np = {M}")
    _require_signs(slot)
    at_N = all(kronecker(d, l) == slot.atkin_lehner[l] for l in factorize(M) if l != p)
    if not at_N:
        return DiscriminantType.NEITHER
    if kronecker(d, p) == slot.atkin_lehner[p]:
        return DiscriminantType.TYPE_I
    return DiscriminantType.TYPE_II


def _require_signs(slot: NewformSlot) -> None:
    missing = [l for l in factorize(slot.level) if l not in slot.atkin_lehner]
    if missing:
        raise ConstraintError(f"level {slot.level} is not squarefree: no sign w_l for l in {missing}")


def sign_conditions_hold(D: int, slot: NewformSlot) -> bool:
    """(-D/l) = w_l for every prime l dividing the level."""
    _require_signs(slot)
    return all(kronecker(-D, l) == slot.atkin_lehner[l] for l in factorize(slot.level))


def choose_auxiliary_discriminant(slot: NewformSlot, bound: int = 1000) -> int:
    """First fundamental D0 < 0, prime to M, with (D0/l) = w_l for all l | M and
    a nonvanishing twisted central value."""
    _require_signs(slot)
    M = slot.level
    for n in range(3, bound + 1):
        d = -n
        if not is_fundamental_discriminant(d) or gcd(d, M) != 1:
            continue
        if all(kronecker(d, l) == slot.atkin_lehner[l] for l in factorize(M)):
            if twisted_L_value(slot, d) != 0:
                return d
    raise MissingDataError(f"no auxiliary discriminant with |D0| <= {bound} at level {M}")


def cycle_value(slot: NewformSlot, lc: qf.LevelClass) -> Fraction:
    """<v, C_Q> for a level class of nonsquare discriminant."""
    sp = slot.space
    vals = slot.manin_values
    M = slot.level
    total = Fraction(0)
    for c, d in qf.cycle_manin_rows(lc, M):
        total += vals[sp.normalize(c, d)]
    # each step contributes -h{0, oo}; orientation flips when the cycle runs backwards
    return -lc.sl2.orientation * total


def kohnen_sum(slot: NewformSlot, D: int, D0: int) -> Fraction:
    M = slot.level
    Delta = D * -D0
    total = Fraction(0)
    if is_square(Delta):
        for F, start, end in qf.square_level_classes(isqrt(Delta), M):
            chi = qf.genus_value(D0, F)
            if chi:
                total += chi * period_integral(slot, start, end)
        return total
    for g in range(1, isqrt(Delta) + 1):
        if Delta % (g * g) or (Delta // (g * g)) % 4 not in (0, 1):
            continue
        if gcd(g, D0) != 1:
            # every form of content g has chi_D0 = 0
            continue
        for lc in qf.level_classes(Delta // (g * g), M, g):
            chi = qf.genus_value(D0, lc.form)
            if chi:
                total += chi * cycle_value(slot, lc)
    return total


@dataclass
class ShintaniTable:
    """Memoized c_D(2) for a newform slot (level Np)."""

    slot: NewformSlot
    p: int | None = None
    aux: int | None = None
    coefficients: dict[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.aux is None:
            self.aux = choose_auxiliary_discriminant(self.slot)
        if self.p is not None and self.slot.level % self.p:
            raise ConstraintError(f"p = {self.p} does not divide the level {self.slot.level}")

    @property
    def level(self) -> int:
        return self.slot.level

    @property
    def sign_data(self) -> dict[int, int]:
        return dict(self.slot.atkin_lehner)

    def gauge(self) -> str:
        return f"{self.slot.gauge_hash()}:{self.aux}"

    def coefficient(self, D: int) -> Fraction:
        if D <= 0:
            raise ConstraintError(f"c_D needs D > 0, got {D}")
        if (-D) % 4 not in (0, 1):
            return Fraction(0)
        if D not in self.coefficients:
            self.coefficients[D] = kohnen_sum(self.slot, D, self.aux)
        return self.coefficients[D]

    __call__ = coefficient

    def extend(self, Dmax: int) -> dict[int, Fraction]:
        for D in range(1, Dmax + 1):
            self.coefficient(D)
        return {D: v for D, v in sorted(self.coefficients.items()) if D <= Dmax}

    def rescaled(self, lam) -> "ShintaniTable":
        return ShintaniTable(self.slot.rescaled(lam), self.p, self.aux)

    # -- persistence -----------------------------------------------------------

    def cache_path(self, directory: str) -> str:
        return os.path.join(directory, f"shintani_{self.level}.tsv")

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(f"# gauge {self.gauge()}\n")
            for D, v in sorted(self.coefficients.items()):
                fh.write(f"{D}\t{v.numerator}\t{v.denominator}\n")

    def load(self, path: str) -> int:
        """Merge a cache file written under the same gauge; returns entries read."""
        if not os.path.exists(path):
            return 0
        with open(path) as fh:
            header = fh.readline().strip()
            if header != f"# gauge {self.gauge()}":
                log.warning("ignoring cache %s: gauge mismatch (%s)", path, header)
                return 0
            n = 0
            for line in fh:
                if not line.strip() or line.startswith("#"):
                    continue
                D, num, den = line.split("\t")
                self.coefficients[int(D)] = Fraction(int(num), int(den))
                n += 1
        return n


# -- J sums ---------------------------------------------------------------------------


@dataclass
class JSumResult:
    d: int
    dprime: int
    Delta: int
    k2_value: Fraction
    derivative: object = None
    terms: list = field(default_factory=list)
    note: str = ""

    def as_dict(self) -> dict:
        out = {
            "d": self.d,
            "dprime": self.dprime,
            "Delta": self.Delta,
            "value_at_2": str(self.k2_value),
            "terms": [{"form": list(Q), "chi": chi} for Q, chi in self.terms],
            "note": self.note,
        }
        if self.derivative is not None:
            out["derivative_at_2"] = str(self.derivative)
        return out


def J_sum(slot: NewformSlot, p: int, d: int, dprime: int, weight_data=None) -> JSumResult:
    """Genus-character sum of the J(f, Q) over Heegner forms of level N = M/p.

    At k = 2 every J(2, Q) carries the factor 1 - a_p^-2 = 0, so the value is 0.
    With ``weight_data`` (a mapping from form triples to WeightSeries of J(k, Q))
    the derivative at k = 2 is returned as well."""
    from .padic import weight_derivative

    M = slot.level
    if M % p:
        raise ConstraintError(f"p = {p} does not divide the level {M}")
    N = M // p
    if classify_discriminant(d, slot, p) is not DiscriminantType.TYPE_II:
        raise ConstraintError(f"{d} is not of type II")
    if classify_discriminant(dprime, slot, p) is not DiscriminantType.TYPE_I:
        raise ConstraintError(f"{dprime} is not of type I")
    if gcd(d, dprime) != 1:
        raise ConstraintError(f"{d} and {dprime} are not coprime")
    Delta = d * dprime
    H = qf.heegner_structure(N, Delta, p)
    ap = slot.a_prime(p)
    euler = 1 - Fraction(1, ap * ap)
    terms = []
    for Q in qf.heegner_forms(H):
        terms.append((Q.as_tuple(), qf.genus_character(H, d, Q)))
    # J(2, Q) = euler * I(2, Q) and euler == 0
    value = Fraction(0)
    note = "Euler factor vanishes at k=2" if euler == 0 else ""
    res = JSumResult(d, dprime, Delta, value, None, terms, note)
    if weight_data is not None:
        total = None
        for Q, chi in terms:
            if chi == 0:
                continue
            if Q not in weight_data:
                raise MissingDataError(f"no weight data for the form {Q}")
            der = weight_derivative(weight_data[Q])
            term = der * chi
            total = term if total is None else total + term
        res.derivative = total if total is not None else Fraction(0)
    return res
