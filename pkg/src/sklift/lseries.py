"""Vanishing bookkeeping for L(SK(f), chi_d, s) = zeta(s) zeta(s-1) L(f, chi_d, s).

The Dirichlet factors at the center never vanish, so the order of vanishing of
the lifted L-function at s = 1 is that of L(f, chi_d, s). The central value is
decided exactly from modular symbols; the first derivative only numerically.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from math import gcd

import mpmath

from .arith import ConstraintError, is_fundamental_discriminant, kronecker
from .modsym import NewformSlot, twist_root_number, twisted_L_value
from .shintani import DiscriminantType, classify_discriminant

# |L'(1)| below this is reported as "numerically zero"
DERIVATIVE_TOLERANCE = 1e-8


@dataclass
class LVanishingReport:
    d: int
    type: str
    root_number: int
    central_value: str
    central_value_vanishes: bool
    dirichlet_factors_nonzero: bool
    derivative_estimate: float | None
    sk_derivative_nonzero_predicate: bool
    confidence: str

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def derivative_at_center(slot: NewformSlot, d: int, dps: int = 20) -> float:
    """L'(f x chi_d, 1) for an odd twist, from the series 2 sum chi(n) a_n E_1(2 pi n / sqrt(M d^2)) / n."""
    mpmath.mp.dps = dps
    root = mpmath.sqrt(slot.level) * abs(d)
    x = 2 * mpmath.pi / root
    # terms decay like exp(-n x); stop once that is far below the working precision
    nmax = int((dps + 10) * mpmath.log(10) / x) + 1
    total = mpmath.mpf(0)
    for n in range(1, nmax + 1):
        chi = kronecker(d, n)
        if chi == 0:
            continue
        an = slot.a_n(n)
        if an:
            total += chi * an * mpmath.e1(n * x) / n
    return float(2 * total)


def sk_vanishing_equivalence(slot: NewformSlot, d: int, p: int, numeric: bool = True) -> LVanishingReport:
    if not is_fundamental_discriminant(d) or d >= 0:
        raise ConstraintError(f"{d} is not a negative fundamental discriminant")
    kind = classify_discriminant(d, slot, p)
    if kind is not DiscriminantType.TYPE_II:
        raise ConstraintError(f"{d} is of type {kind.value}, not type II")
    L = twisted_L_value(slot, d)
    eps = twist_root_number(slot, d)
    deriv = derivative_at_center(slot, d) if numeric else None
    nonzero = deriv is not None and abs(deriv) > DERIVATIVE_TOLERANCE
    if not numeric:
        conf = "not computed"
    elif nonzero:
        conf = "numeric: derivative clearly nonzero"
    else:
        conf = "numeric: derivative indistinguishable from 0"
    return LVanishingReport(
        d=d,
        type=kind.value,
        root_number=eps,
        central_value=str(L),
        central_value_vanishes=(L == 0),
        # L(chi_d, 0) L(chi_d, 1) != 0 for every nontrivial quadratic character
        dirichlet_factors_nonzero=True,
        derivative_estimate=deriv,
        sk_derivative_nonzero_predicate=nonzero,
        confidence=conf,
    )


def type_ii_discriminants(slot: NewformSlot, p: int, bound: int) -> list[int]:
    out = []
    for n in range(3, bound + 1):
        d = -n
        if not is_fundamental_discriminant(d) or gcd(d, slot.level) != 1:
            continue
        if classify_discriminant(d, slot, p) is DiscriminantType.TYPE_II:
            out.append(d)
    return out


def reports(slot: NewformSlot, p: int, bound: int, numeric: bool = True) -> list[LVanishingReport]:
    return [sk_vanishing_equivalence(slot, d, p, numeric) for d in type_ii_discriminants(slot, p, bound)]


def to_json_lines(reps) -> str:
    return "".join(r.to_json() + "\n" for r in reps)
