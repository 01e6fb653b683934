"""Invariant checks on the built-in fixtures, run by `sklift selftest`."""

from __future__ import annotations

import random
import time
from fractions import Fraction
from math import gcd

from . import maass
from . import quadform as qf
from .arith import (
    ConstraintError,
    HalfIntegralMatrix,
    fundamental_decompose,
    is_fundamental_discriminant,
    is_square,
    kronecker,
    primes_up_to,
)
from .curves import ap_from_curve
from .modsym import ModularSymbolSpace, genus_x0, newform_slot, twisted_L_value
from .padic import PadicElement, branch_log_q, iwasawa_log
from .shintani import DiscriminantType, J_sum, ShintaniTable, classify_discriminant

# (level, N, p, Weierstrass coefficients of the matching curve)
FIXTURES = [
    (15, 3, 5, (1, 1, 1, -10, -10)),
    (21, 3, 7, (1, 0, 0, -4, -1)),
]


def _arith():
    rng = random.Random(0)
    for _ in range(300):
        a, b, n = rng.randint(-200, 200), rng.randint(-200, 200), rng.randint(-200, 200)
        if kronecker(a * b, n) != kronecker(a, n) * kronecker(b, n):
            return False, f"kronecker not multiplicative at {(a, b, n)}"
    for D in range(-400, 0):
        if D % 4 in (0, 1):
            dec = fundamental_decompose(D)
            if dec.d * dec.f**2 != D or not is_fundamental_discriminant(dec.d):
                return False, f"bad decomposition of {D}"
    return True, "kronecker multiplicativity, decompositions of D >= -400"


def _dimensions():
    for M in range(1, 41):
        sp = ModularSymbolSpace(M)
        if sp.cuspidal_dimension != 2 * genus_x0(M):
            return False, f"level {M}"
    return True, "cuspidal dimension = 2 genus for M <= 40"


def _eigenvalues():
    for M, _, _, coeffs in FIXTURES:
        slot = newform_slot(ModularSymbolSpace(M))
        for ell in primes_up_to(50):
            if M % ell and slot.a_prime(ell) != ap_from_curve(coeffs, ell):
                return False, f"level {M}, a_{ell}"
    return True, "a_ell matches point counts, ell <= 50"


def _heegner():
    n = 0
    for N in (1, 3, 5):
        for Delta in range(5, 120):
            if is_square(Delta) or Delta % 4 not in (0, 1) or gcd(Delta, N) != 1:
                continue
            try:
                H = qf.heegner_structure(N, Delta)
            except ConstraintError:
                continue
            for Q in qf.heegner_forms(H):
                g = qf.automorph(H, Q)
                if qf.det(g) != 1 or g[1][0] % N or qf.form_action(Q, g) != Q:
                    return False, f"automorph of {Q.as_tuple()} at N={N}"
                n += 1
    return True, f"{n} automorphs checked"


def _vanishing(Dmax):
    for M, _, p, _ in FIXTURES:
        slot = newform_slot(ModularSymbolSpace(M))
        table = ShintaniTable(slot, p)
        for D in range(3, Dmax + 1):
            if (-D) % 4 not in (0, 1):
                continue
            strict = any(kronecker(-D, l) == -w for l, w in slot.atkin_lehner.items())
            if strict and table.coefficient(D) != 0:
                return False, f"level {M}: c_{D} != 0 with (-D/l) = -w_l"
    return True, f"strict sign vanishing for D <= {Dmax}"


def _waldspurger(bound):
    for M, _, p, _ in FIXTURES:
        slot = newform_slot(ModularSymbolSpace(M))
        table = ShintaniTable(slot, p)
        for n in range(3, bound + 1):
            d = -n
            if not is_fundamental_discriminant(d) or gcd(d, M) != 1:
                continue
            if classify_discriminant(d, slot, p) is DiscriminantType.TYPE_I:
                if (table.coefficient(n) != 0) != (twisted_L_value(slot, d) != 0):
                    return False, f"level {M}, d = {d}"
    return True, f"type I, |d| <= {bound}"


def _maass(count):
    rng = random.Random(1)
    for M, N, p, _ in FIXTURES:
        slot = newform_slot(ModularSymbolSpace(M))
        prov = maass.ComputedProvider(ShintaniTable(slot, p), N, p)
        T0 = maass.select_T0(prov)
        for _ in range(count):
            while True:
                u, v, w = rng.randint(1, 10), rng.randint(-10, 10), rng.randint(1, 10)
                if 4 * u * w - v * v > 0:
                    break
            T = HalfIntegralMatrix(u, v, w)
            if maass.maass_assemble(prov, T, 2, "depleted") != maass.assemble_factored(prov, T, 2):
                return False, f"level {M}, T = {T.as_tuple()}"
            maass.A_tilde_paths(prov, T, T0, 2)
            if maass.n_T(prov, T, 2) != maass.n_T_explicit(prov, T):
                return False, f"n_T double sum at {T.as_tuple()}"
    return True, f"{count} random T per fixture"


def _jsum():
    M, N, p, _ = FIXTURES[0]
    slot = newform_slot(ModularSymbolSpace(M))
    kinds = {}
    for n in range(3, 60):
        d = -n
        if is_fundamental_discriminant(d) and gcd(d, M) == 1:
            kinds[d] = classify_discriminant(d, slot, p)
    checked = 0
    for d, kd in kinds.items():
        for dp, kdp in kinds.items():
            if kd is DiscriminantType.TYPE_II and kdp is DiscriminantType.TYPE_I and gcd(d, dp) == 1 and d * dp <= 300:
                if J_sum(slot, p, d, dp).k2_value != 0:
                    return False, f"J({d}, {dp}) != 0"
                checked += 1
    return True, f"{checked} pairs vanish at k = 2"


def _padic():
    p = 5
    q = PadicElement.from_rational(Fraction(5 * 7, 3), p)
    if not branch_log_q(q, q).is_zero():
        return False, "log_q(q) != 0"
    x, y = PadicElement.from_rational(11, p), PadicElement.from_rational(Fraction(2, 13), p)
    if iwasawa_log(x * y) != iwasawa_log(x) + iwasawa_log(y):
        return False, "log not a homomorphism"
    return True, "branch log and homomorphism"


def run(quick: bool = True):
    checks = [
        ("arith", _arith),
        ("modsym dimensions", _dimensions),
        ("modsym eigenvalues", _eigenvalues),
        ("quadform automorphs", _heegner),
        ("shintani vanishing", lambda: _vanishing(300 if quick else 2000)),
        ("waldspurger", lambda: _waldspurger(100 if quick else 300)),
        ("maass paths", lambda: _maass(20 if quick else 200)),
        ("jsum at k=2", _jsum),
        ("padic", _padic),
    ]
    out = []
    for name, fn in checks:
        t = time.time()
        try:
            ok, detail = fn()
        except Exception as exc:  # report, keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, ok, f"{detail} ({time.time() - t:.1f}s)"))
    return out
