"""Saito-Kurokawa coefficients from half-integral weight data.

Assembles A_T from the c_D through the Maass relations, factors the
p-depleted coefficients through rho and n_T, and forms the normalized
ratios c~_D and A~_T. Values may be Fractions (weight 2, computed) or
PadicElements (ingested weights k > 2).
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .arith import (
    ConstraintError,
    HalfIntegralMatrix,
    MissingDataError,
    divisor_set_S_T,
    divisors,
    factorize,
    fundamental_decompose,
    kronecker,
    moebius,
)
from .padic import PadicElement

log = logging.getLogger(__name__)


class InconsistencyError(ArithmeticError):
    """Two computation paths that must agree do not."""


def parse_value(text: str, p: int | None):
    if text.startswith("p-adic:"):
        if p is None:
            raise ConstraintError("p-adic value without a prime")
        return PadicElement.parse(text, p)
    return Fraction(text)


def format_value(x) -> str:
    if isinstance(x, PadicElement):
        return x.serialize()
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, PadicElement) else x == 0


class CoefficientProvider:
    """Source of a_n(k), c_D(k) and a_p(k)^-1.

    ``kohnen_level`` is the modulus whose divisors are excluded in the
    multiplicativity c_{|d| n^2} = c_{|d|} rho_{d, n}: the level of the
    half-integral weight form the c_D come from.
    """

    def __init__(self, N: int, p: int, source: str, kohnen_level: int):
        if gcd(N, p) != 1:
            raise ConstraintError(f"gcd(N, p) must be 1, got N={N}, p={p}")
        self.N = N
        self.p = p
        self.source = source
        self.kohnen_level = kohnen_level
        self.a: dict[tuple[int, int], object] = {}
        self.c: dict[tuple[int, int], object] = {}
        self.forms: dict[tuple[int, int, int], dict[int, object]] = {}

    @property
    def weights(self) -> list[int]:
        return sorted({k for _, k in self.a} | {k for _, k in self.c})

    def a_n(self, n: int, k: int):
        try:
            return self.a[(n, k)]
        except KeyError:
            raise MissingDataError(f"a_{n}({k}) not supplied") from None

    def c_D(self, D: int, k: int):
        if k % 4 == 0:
            # the half-integral weight form vanishes when k/2 is even
            return Fraction(0)
        try:
            return self.c[(D, k)]
        except KeyError:
            raise MissingDataError(f"c_{D}({k}) not supplied") from None

    def a_p_inverse(self, k: int):
        ap = self.a_n(self.p, k)
        return 1 / ap

    def validate(self) -> None:
        p = self.p
        for k in self.weights:
            if (k - 2) % (p - 1):
                raise ConstraintError(f"weight {k} is not 2 mod {p - 1}")
            one = self.a.get((1, k))
            if one is not None and not (one == 1):
                raise ConstraintError(f"a_1({k}) = {one} is not 1")


class ComputedProvider(CoefficientProvider):
    """Weight-2 data from a newform slot of level Np and its Shintani table."""

    def __init__(self, table, N: int, p: int):
        if table.level != N * p:
            raise ConstraintError(f"table level {table.level} is not N*p = {N * p}")
        super().__init__(N, p, "computed", N * p)
        self.table = table

    @property
    def weights(self) -> list[int]:
        return [2]

    def a_n(self, n: int, k: int):
        if k != 2:
            raise MissingDataError(f"computed data exists only at k = 2, asked for k = {k}")
        return Fraction(self.table.slot.a_n(n))

    def c_D(self, D: int, k: int):
        if k != 2:
            raise MissingDataError(f"computed data exists only at k = 2, asked for k = {k}")
        return self.table.coefficient(D)


# -- ingestion ------------------------------------------------------------------------


def ingest_weights(path_or_text: str, from_text: bool = False) -> CoefficientProvider:
    """Read blocks headed '# level N prime p weight k' with lines 'a n value',
    'c D value' and optionally 'j A B C value' (J(k, Q) for a Heegner form)."""
    text = path_or_text if from_text else open(path_or_text).read()
    prov = None
    k = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "level":
                try:
                    kv = dict(zip(parts[0::2], parts[1::2]))
                    N, p, k = int(kv["level"]), int(kv["prime"]), int(kv["weight"])
                except (KeyError, ValueError):
                    raise ConstraintError(f"line {lineno}: malformed header {line!r}") from None
                if prov is None:
                    prov = CoefficientProvider(N, p, "ingested", N)
                elif (prov.N, prov.p) != (N, p):
                    raise ConstraintError(f"line {lineno}: header disagrees with level {prov.N}, prime {prov.p}")
            continue
        if prov is None or k is None:
            raise ConstraintError(f"line {lineno}: data before any header")
        parts = line.split()
        try:
            if parts[0] == "a" and len(parts) == 3:
                prov.a[(int(parts[1]), k)] = parse_value(parts[2], prov.p)
            elif parts[0] == "c" and len(parts) == 3:
                prov.c[(int(parts[1]), k)] = parse_value(parts[2], prov.p)
            elif parts[0] == "j" and len(parts) == 5:
                Q = (int(parts[1]), int(parts[2]), int(parts[3]))
                prov.forms.setdefault(Q, {})[k] = parse_value(parts[4], prov.p)
            else:
                raise ValueError
        except (ValueError, ZeroDivisionError):
            raise ConstraintError(f"line {lineno}: cannot parse {line!r}") from None
    if prov is None:
        raise ConstraintError("no '# level N prime p weight k' header found")
    prov.validate()
    return prov


def emit_weights(prov: CoefficientProvider) -> str:
    out = []
    for k in sorted(set(prov.weights) | {k for d in prov.forms.values() for k in d}):
        out.append(f"# level {prov.N} prime {prov.p} weight {k}")
        for (n, kk), v in sorted(prov.a.items()):
            if kk == k:
                out.append(f"a {n} {format_value(v)}")
        for (D, kk), v in sorted(prov.c.items()):
            if kk == k:
                out.append(f"c {D} {format_value(v)}")
        for Q, vals in sorted(prov.forms.items()):
            if k in vals:
                out.append(f"j {Q[0]} {Q[1]} {Q[2]} {format_value(vals[k])}")
    return "\n".join(out) + "\n"


def same_provider(x: CoefficientProvider, y: CoefficientProvider) -> bool:
    def norm(d):
        return {key: format_value(v) for key, v in d.items()}

    return (
        (x.N, x.p) == (y.N, y.p)
        and norm(x.a) == norm(y.a)
        and norm(x.c) == norm(y.c)
        and {Q: norm(v) for Q, v in x.forms.items()} == {Q: norm(v) for Q, v in y.forms.items()}
    )


# -- Maass relations ------------------------------------------------------------------


def _contributes(D: int, k: int) -> bool:
    return ((-1) ** (k // 2) * D) % 4 in (0, 1)


VARIANTS = ("alpha", "full", "depleted")


def maass_assemble(provider: CoefficientProvider, T: HalfIntegralMatrix, k: int, variant: str = "depleted"):
    """Divisor sum of c_{D_T/d^2}(k) d^{k/2} over d | c(T) with the variant's coprimality:
    "full" (A_T) uses (d, N) = 1; "depleted" (A_T^(p)) and "alpha" use (d, Np) = 1."""
    N, p = provider.N, provider.p
    if variant in ("alpha", "depleted"):
        mod = N * p
    elif variant == "full":
        mod = N
    else:
        raise ConstraintError(f"unknown variant {variant}")
    if k % 4 == 0:
        log.info("k/2 even: every c_D(%s) vanishes, assembly is 0", k)
        return Fraction(0)
    D = T.disc
    total = Fraction(0)
    for d in divisors(T.content):
        if gcd(d, mod) != 1 or not _contributes(D // (d * d), k):
            continue
        total = total + provider.c_D(D // (d * d), k) * d ** (k // 2)
    return total


def rho(provider: CoefficientProvider, dd: int, n: int, k: int, level: int | None = None):
    """sum over d | n, (d, level) = 1 of mu(d) (dd/d) d^{k/2-1} a_{n/d}(k); level defaults to N."""
    if n < 1:
        raise ConstraintError(f"rho needs n >= 1, got {n}")
    level = provider.N if level is None else level
    total = Fraction(0)
    for d in divisors(n):
        if gcd(d, level) != 1:
            continue
        mu = moebius(d)
        chi = kronecker(dd, d)
        if mu == 0 or chi == 0:
            continue
        total = total + provider.a_n(n // d, k) * (mu * chi * d ** (k // 2 - 1))
    return total


def _decomp(T: HalfIntegralMatrix):
    dec = fundamental_decompose(-T.disc)
    return dec.d, dec.f


def n_T(provider: CoefficientProvider, T: HalfIntegralMatrix, k: int, level: int | None = None):
    """sum over d in S_T of d^{k/2} rho_{d_T, f_T/d}(k)."""
    dT, fT = _decomp(T)
    total = Fraction(0)
    for d in divisor_set_S_T(T, provider.N, provider.p):
        total = total + rho(provider, dT, fT // d, k, level) * d ** (k // 2)
    return total


def n_T_explicit(provider: CoefficientProvider, T: HalfIntegralMatrix) -> Fraction:
    """Weight-2 double sum: d in S_T, e | f_T/d with (e, N) = 1 of d mu(e) (d_T/e) a_{f_T/(de)}(2)."""
    dT, fT = _decomp(T)
    total = Fraction(0)
    for d in divisor_set_S_T(T, provider.N, provider.p):
        m = fT // d
        for e in divisors(m):
            if gcd(e, provider.N) == 1:
                total += d * moebius(e) * kronecker(dT, e) * provider.a_n(m // e, 2)
    return total


def assemble_factored(provider: CoefficientProvider, T: HalfIntegralMatrix, k: int):
    """c_{|d_T|}(k) * sum_{d in S_T} d^{k/2} rho_{d_T, f_T/d}(k), with rho at the provider's
    Kohnen level so that this matches the divisor-sum assembly."""
    dT, _ = _decomp(T)
    return provider.c_D(-dT, k) * n_T(provider, T, k, provider.kohnen_level)


def euler(provider: CoefficientProvider, sym: int, k: int):
    return 1 - sym * provider.a_p_inverse(k) * provider.p ** (k // 2 - 1)


def c_tilde(provider: CoefficientProvider, D: int, D0: int, k: int):
    """(1 - (-D/p) a_p^-1 p^{k/2-1}) c_D / (1 - (-D0/p) a_p^-1 p^{k/2-1}) c_D0; at k = 2
    this is c_D / c_D0."""
    p = provider.p
    if D % p == 0:
        raise ConstraintError(f"p = {p} divides D = {D}")
    den_c = provider.c_D(D0, k)
    if _is_zero(den_c):
        raise ZeroDivisionError(f"c_{D0}({k}) vanishes")
    if k == 2:
        return provider.c_D(D, 2) / den_c
    num = euler(provider, kronecker(-D, p), k) * provider.c_D(D, k)
    den = euler(provider, kronecker(-D0, p), k) * den_c
    if _is_zero(den):
        raise ZeroDivisionError(f"Euler factor at D0 = {D0} vanishes")
    return num / den


@dataclass
class ATildePaths:
    value: object  # the returned A~_T(k)
    via_divisor_sum: object  # Euler-factor ratio of divisor-sum assemblies
    via_factorization: object  # c~_{|d_T|}(k) n_T(k) with rho at the Kohnen level
    via_stabilized_sum: object = None  # sum_{d in S_T} c~_{D_T/d^2}(k) d^{k/2}, when p does not divide D_T
    n_T: object = None


def A_tilde_paths(provider: CoefficientProvider, T: HalfIntegralMatrix, T0: HalfIntegralMatrix, k: int) -> ATildePaths:
    """All computation paths of A~_T(k). At k = 2 ``value`` is n_T c_{|d_T|}(2) / c_{D_T0}(2)
    with n_T summed over (d, N) = 1. All paths agree when p does not divide D_T. When
    p | D_T the Euler-factor ratio differs: for p | d_T only the factor of T0 survives,
    and for p | f_T the divisor sum sees rho at the Kohnen level Np."""
    p = provider.p
    if T0.content != 1:
        raise ConstraintError("T0 must have c(T0) = 1")
    D0 = T0.disc
    if D0 % p == 0:
        raise ConstraintError(f"p divides D_T0 = {D0}")
    dT, fT = _decomp(T)
    Ap = maass_assemble(provider, T, k, "depleted")
    Ap_0 = maass_assemble(provider, T0, k, "depleted")
    den = euler(provider, kronecker(-D0, p), k) * Ap_0
    if _is_zero(den):
        raise ZeroDivisionError(f"denominator vanishes for T0 = {T0.as_tuple()}")
    ratio = euler(provider, kronecker(dT, p), k) * Ap / den
    c_dT = c_tilde_general(provider, -dT, D0, k)
    factored = c_dT * n_T(provider, T, k, provider.kohnen_level)
    if not _equal(ratio, factored):
        raise InconsistencyError(f"A~_T paths disagree at T = {T.as_tuple()}: {ratio} vs {factored}")
    stabilized = None
    if T.disc % p:
        stabilized = Fraction(0)
        for d in divisor_set_S_T(T, provider.N, p):
            stabilized = stabilized + c_tilde(provider, T.disc // (d * d), D0, k) * d ** (k // 2)
        if not _equal(ratio, stabilized):
            raise InconsistencyError(f"stabilized divisor sum disagrees at T = {T.as_tuple()}")
    nT = n_T(provider, T, k)
    if k == 2:
        value = nT * provider.c_D(-dT, 2) / provider.c_D(D0, 2)
    else:
        value = ratio
    return ATildePaths(value, ratio, factored, stabilized, nT)


def c_tilde_general(provider: CoefficientProvider, D: int, D0: int, k: int):
    """c~_D allowing p | D (the Euler factor is then 1)."""
    p = provider.p
    den_c = provider.c_D(D0, k)
    if _is_zero(den_c):
        raise ZeroDivisionError(f"c_{D0}({k}) vanishes")
    if k == 2 and D % p:
        return provider.c_D(D, 2) / den_c
    num = euler(provider, kronecker(-D, p), k) * provider.c_D(D, k)
    return num / (euler(provider, kronecker(-D0, p), k) * den_c)


def A_tilde(provider: CoefficientProvider, T: HalfIntegralMatrix, T0: HalfIntegralMatrix, k: int):
    """Normalized coefficient A~_T(k); at k = 2 the value n_T c_{|d_T|}(2) / c_{D_T0}(2)."""
    return A_tilde_paths(provider, T, T0, k).value


def _equal(x, y) -> bool:
    if isinstance(x, PadicElement) or isinstance(y, PadicElement):
        return (x - y) == 0 if isinstance(x, PadicElement) else (y - x) == 0
    return x == y


def select_T0(provider: CoefficientProvider, k: int = 2, bound: int = 2000) -> HalfIntegralMatrix:
    """First T = (u, v, w) with c(T) = 1, p not dividing D_T and c_{D_T}(k) != 0,
    scanning D_T upward and (u, v, w) lexicographically within each D_T."""
    p = provider.p
    for D in range(3, bound + 1):
        if (-D) % 4 not in (0, 1) or D % p == 0:
            continue
        if _is_zero(provider.c_D(D, k)):
            continue
        for T in matrices_with_disc(D):
            if T.content == 1:
                return T
    raise MissingDataError(f"no T0 with D_T0 <= {bound}")


def matrices_with_disc(D: int) -> list[HalfIntegralMatrix]:
    """Reduced T (|v| <= u <= w) with 4uw - v^2 = D, in lexicographic order."""
    out = []
    u = 1
    while 3 * u * u <= D:
        for v in range(-u, u + 1):
            if (D + v * v) % (4 * u) == 0:
                w = (D + v * v) // (4 * u)
                if w >= u:
                    out.append(HalfIntegralMatrix(u, v, w))
        u += 1
    return out


def matrices_up_to(bound: int) -> list[HalfIntegralMatrix]:
    """All positive definite T with 1 <= u, w <= bound and |v| <= bound."""
    out = []
    for u in range(1, bound + 1):
        for w in range(1, bound + 1):
            for v in range(-bound, bound + 1):
                if 4 * u * w - v * v > 0:
                    out.append(HalfIntegralMatrix(u, v, w))
    return out


# -- records --------------------------------------------------------------------------


@dataclass
class SKCoefficientRecord:
    T: HalfIntegralMatrix
    k: int
    A_T: object
    A_T_p: object
    alpha_T: object
    A_tilde: object
    n_T_k: object
    flags: list = field(default_factory=list)

    def as_dict(self) -> dict:
        dec = fundamental_decompose(-self.T.disc)
        return {
            "T": list(self.T.as_tuple()),
            "D_T": self.T.disc,
            "c_T": self.T.content,
            "d_T": dec.d,
            "f_T": dec.f,
            "k": self.k,
            "A_T": _fmt(self.A_T),
            "A_T_p": _fmt(self.A_T_p),
            "alpha_T": _fmt(self.alpha_T),
            "A_tilde": _fmt(self.A_tilde),
            "n_T": _fmt(self.n_T_k),
            "flags": list(self.flags),
        }


def _fmt(x):
    if x is None:
        return None
    if isinstance(x, PadicElement):
        return x.serialize()
    return str(Fraction(x))


def sk_record(provider: CoefficientProvider, T: HalfIntegralMatrix, T0: HalfIntegralMatrix, k: int = 2) -> SKCoefficientRecord:
    flags = []
    A_full = maass_assemble(provider, T, k, "full")
    Ap = maass_assemble(provider, T, k, "depleted")
    alpha = maass_assemble(provider, T, k, "alpha")
    try:
        paths = A_tilde_paths(provider, T, T0, k)
        At, nT = paths.value, paths.n_T
    except MissingDataError:
        raise
    except ConstraintError as exc:
        At, nT = None, n_T(provider, T, k)
        flags.append(f"A_tilde unavailable: {exc}")
    if _is_zero(nT):
        flags.append("n_T = 0")
    return SKCoefficientRecord(T, k, A_full, Ap, alpha, At, nT, flags)


def records_to_json(records) -> str:
    return json.dumps([r.as_dict() for r in records], indent=1)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    cols = ["T", "D_T", "c_T", "d_T", "f_T", "k", "A_T", "A_T_p", "alpha_T", "A_tilde", "n_T", "flags"]
    w = csv.writer(buf)
    w.writerow(cols)
    for r in records:
        d = r.as_dict()
        d["T"] = " ".join(map(str, d["T"]))
        d["flags"] = ";".join(d["flags"])
        w.writerow([d[c] for c in cols])
    return buf.getvalue()


def level_primes(M: int) -> list[int]:
    return sorted(factorize(M)) if M > 1 else []
