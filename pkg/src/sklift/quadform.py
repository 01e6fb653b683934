"""Binary quadratic forms of positive discriminant.

Covers reduction cycles, Gamma_0(N)-classes of forms with N | A, Heegner
forms relative to a level, automorphs, genus characters and the roots
tau_Q as exact quadratic surds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from .arith import ConstraintError, is_fundamental_discriminant, is_square, kronecker

Mat = tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True, order=True)
class BinaryQuadraticForm:
    """Q(x, y) = A x^2 + B x y + C y^2."""

    A: int
    B: int
    C: int

    @property
    def disc(self) -> int:
        return self.B * self.B - 4 * self.A * self.C

    @property
    def content(self) -> int:
        return gcd(gcd(self.A, self.B), self.C)

    @property
    def is_primitive(self) -> bool:
        return self.content == 1

    def __call__(self, x: int, y: int) -> int:
        return self.A * x * x + self.B * x * y + self.C * y * y

    def __neg__(self) -> "BinaryQuadraticForm":
        return BinaryQuadraticForm(-self.A, -self.B, -self.C)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.A, self.B, self.C)


def det(g: Mat) -> int:
    return g[0][0] * g[1][1] - g[0][1] * g[1][0]


def mat_mul(g: Mat, h: Mat) -> Mat:
    (a, b), (c, d) = g
    (e, f), (k, l) = h
    return ((a * e + b * k, a * f + b * l), (c * e + d * k, c * f + d * l))


def mat_inv(g: Mat) -> Mat:
    (a, b), (c, d) = g
    return ((d, -b), (-c, a))


def form_action(Q: BinaryQuadraticForm, g: Mat, check: bool = True) -> BinaryQuadraticForm:
    """(Q|g)(x, y) = Q(a x + b y, c x + d y) for g = ((a, b), (c, d))."""
    if check and det(g) != 1:
        raise ConstraintError(f"form_action needs det 1, got {det(g)}")
    (a, b), (c, d) = g
    A, B, C = Q.A, Q.B, Q.C
    return BinaryQuadraticForm(
        A * a * a + B * a * c + C * c * c,
        2 * A * a * b + B * (a * d + b * c) + 2 * C * c * d,
        A * b * b + B * b * d + C * d * d,
    )


# -- units ----------------------------------------------------------------------


@lru_cache(maxsize=4096)
def pell(n: int) -> tuple[int, int]:
    """Minimal (x, y) with x, y > 0 and x^2 - n y^2 = 1 (continued fraction of sqrt n)."""
    if n <= 0 or is_square(n):
        raise ConstraintError(f"Pell equation needs a positive nonsquare, got {n}")
    a0 = isqrt(n)
    m, d, a = 0, 1, a0
    h_prev, h = 1, a0
    k_prev, k = 0, 1
    while h * h - n * k * k != 1:
        m = d * a - m
        d = (n - m * m) // d
        a = (a0 + m) // d
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
    return h, k


@lru_cache(maxsize=4096)
def fundamental_unit(Delta: int) -> tuple[int, int]:
    """Smallest (t, u), t, u > 0, with t^2 - Delta u^2 = 4: the norm-one
    generator (t + u sqrt(Delta))/2 of the order of discriminant Delta."""
    if Delta <= 0 or is_square(Delta) or Delta % 4 not in (0, 1):
        raise ConstraintError(f"not a positive nonsquare discriminant: {Delta}")
    if Delta % 4 == 0:
        x, y = pell(Delta // 4)
        return 2 * x, y
    x, y = pell(Delta)
    # x + y sqrt(D) is either the square-free generator of Z[sqrt D] or the
    # cube of a half-integral unit; look for the cube root
    for t in _cube_root_candidates(x):
        rest = t * t - 4
        if rest > 0 and rest % Delta == 0 and is_square(rest // Delta):
            return t, isqrt(rest // Delta)
    return 2 * x, 2 * y


def _cube_root_candidates(x: int) -> list[int]:
    # eps^3 = x + y sqrt(D) with eps = (t + u sqrt D)/2 forces t^3 - 3t = 2x
    t = _icbrt(2 * x)
    out = []
    for cand in range(max(1, t - 2), t + 3):
        if cand**3 - 3 * cand == 2 * x:
            out.append(cand)
    return out


def _icbrt(n: int) -> int:
    lo, hi = 0, 1 << (n.bit_length() // 3 + 2)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**3 <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo


def unit_matrix(Q: BinaryQuadraticForm, t: int, u: int) -> Mat:
    """The automorph of Q attached to the unit (t + u sqrt(disc))/2 (Q primitive)."""
    A, B, C = Q.as_tuple()
    return (((t - B * u) // 2, -C * u), (A * u, (t + B * u) // 2))


# -- reduction cycles ---------------------------------------------------------------


def is_reduced(Q: BinaryQuadraticForm) -> bool:
    """0 < B < sqrt(D) and sqrt(D) - B < 2|A| < sqrt(D) + B."""
    D = Q.disc
    r = isqrt(D)
    if not 0 < Q.B <= r:
        return False
    # compare via squares: (2|A| + B)^2 > D and (2|A| - B)^2 < D with 2|A| > B - sqrt(D) automatically
    a2 = 2 * abs(Q.A)
    return (a2 + Q.B) ** 2 > D and (a2 - Q.B) ** 2 < D and a2 > 0


def rho_step(Q: BinaryQuadraticForm) -> tuple[BinaryQuadraticForm, int]:
    """Neighbour of a reduced form: Q | ((0, -1), (1, s)); returns (form, s)."""
    a, b, c = Q.as_tuple()
    D = Q.disc
    r = isqrt(D)
    m = 2 * abs(c)
    lo = r - m + 1
    bp = lo + ((-b - lo) % m)
    s = (bp + b) // (2 * c)
    cp = (bp * bp - D) // (4 * c)
    return BinaryQuadraticForm(c, bp, cp), s


def reduced_forms(Delta: int, primitive_only: bool = True) -> list[BinaryQuadraticForm]:
    out = []
    r = isqrt(Delta)
    for b in range(1, r + 1):
        if (b - Delta) % 2:
            continue
        num = b * b - Delta
        if num == 0:
            continue
        for a_abs in range(1, (r + b) // 2 + 1):
            if num % (4 * a_abs):
                continue
            for a in (a_abs, -a_abs):
                c = num // (4 * a)
                Q = BinaryQuadraticForm(a, b, c)
                if is_reduced(Q) and (not primitive_only or Q.is_primitive):
                    out.append(Q)
    return sorted(out)


@dataclass(frozen=True)
class FormClass:
    """A proper SL2(Z)-class of nonsquare discriminant: its reduced cycle, the
    step parameters s_i, and the product P of the step matrices (the generator of
    the automorphs of the first form, up to sign). ``orientation`` is +1 when P
    comes from the unit (t + u sqrt(D))/2 with t, u > 0 and -1 when from its inverse."""

    cycle: tuple[BinaryQuadraticForm, ...]
    steps: tuple[int, ...]
    automorph: Mat
    orientation: int  # +1 when the product of the steps is the positive generator

    @property
    def rep(self) -> BinaryQuadraticForm:
        return self.cycle[0]


@lru_cache(maxsize=4096)
def sl2_classes(Delta: int) -> tuple[FormClass, ...]:
    """Proper equivalence classes of primitive forms of a nonsquare discriminant."""
    if Delta <= 0 or is_square(Delta) or Delta % 4 not in (0, 1):
        raise ConstraintError(f"not a positive nonsquare discriminant: {Delta}")
    remaining = set(reduced_forms(Delta))
    t, u = fundamental_unit(Delta)
    out = []
    for Q in sorted(remaining):
        if Q not in remaining:
            continue
        cyc, steps = [Q], []
        P: Mat = ((1, 0), (0, 1))
        cur = Q
        while True:
            nxt, s = rho_step(cur)
            steps.append(s)
            P = mat_mul(P, ((0, -1), (1, s)))
            if nxt == Q:
                break
            cyc.append(nxt)
            cur = nxt
        for F in cyc:
            remaining.discard(F)
        tr = P[0][0] + P[1][1]
        sign = 1 if tr > 0 else -1
        Pn = tuple(tuple(sign * x for x in row) for row in P)
        uu = Pn[1][0] // Q.A if Q.A else 0
        if abs(tr) != t or abs(uu) != u or Pn != unit_matrix(Q, t, uu):
            raise ArithmeticError(f"cycle product of {Q} is not the fundamental automorph")
        out.append(FormClass(tuple(cyc), tuple(steps), Pn, 1 if uu > 0 else -1))
    return tuple(out)


# -- Gamma_0(M) classes -----------------------------------------------------------


def p1_points(M: int) -> list[tuple[int, int]]:
    """Canonical representatives of P^1(Z/MZ)."""
    if M == 1:
        return [(0, 1)]
    seen = set()
    out = []
    for c in range(M):
        for d in range(M):
            if gcd(gcd(c, d), M) != 1:
                continue
            key = p1_canonical(M, c, d)
            if key not in seen:
                seen.add(key)
                out.append(key)
    return sorted(out)


def p1_canonical(M: int, x: int, y: int) -> tuple[int, int]:
    if M == 1:
        return (0, 1)
    x, y = x % M, y % M
    if gcd(y, M) == 1:
        return (x * pow(y, -1, M) % M, 1)
    if gcd(x, M) == 1:
        return (1, y * pow(x, -1, M) % M)
    return min(((u * x) % M, (u * y) % M) for u in range(1, M) if gcd(u, M) == 1)


def lift_column(M: int, x: int, y: int) -> Mat:
    """g in SL2(Z) whose first column reduces to (x, y) mod M (gcd(x, y, M) = 1)."""
    if M == 1:
        return ((1, 0), (0, 1))
    x, y = x % M, y % M
    if x == 0:
        x = M
    while gcd(x, y) != 1:
        y += M
    # a*x + b*y = 1 -> g = ((x, -b), (y, a))
    a, b = _bezout(x, y)
    return ((x, -b), (y, a))


def _bezout(x: int, y: int) -> tuple[int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    a, b = x, y
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        x0, y0 = -x0, -y0
    return x0, y0


def _apply_col(g: Mat, M: int, pt: tuple[int, int]) -> tuple[int, int]:
    (a, b), (c, d) = g
    x, y = pt
    return p1_canonical(M, a * x + b * y, c * x + d * y)


@dataclass(frozen=True)
class LevelClass:
    """A Gamma_0(M)-class of forms with M | A: the representative Q' = scale*(Q|g),
    the SL2 class it came from, and the orbit length n (stabilizer g^-1 P^n g)."""

    form: BinaryQuadraticForm
    scale: int
    sl2: FormClass
    g: Mat
    orbit_length: int

    def stabilizer(self) -> Mat:
        P = self.sl2.automorph
        Pn: Mat = ((1, 0), (0, 1))
        for _ in range(self.orbit_length):
            Pn = mat_mul(Pn, P)
        return mat_mul(mat_mul(mat_inv(self.g), Pn), self.g)


def level_classes(Delta0: int, M: int, scale: int = 1) -> list[LevelClass]:
    """Gamma_0(M)-classes of forms scale*Q0 (Q0 primitive of discriminant Delta0)
    whose first coefficient is divisible by M."""
    out = []
    pts = p1_points(M)
    for cls in sl2_classes(Delta0):
        Q = cls.rep
        P = cls.automorph
        roots = [pt for pt in pts if (scale * Q(*pt)) % M == 0]
        seen = set()
        for pt in roots:
            if pt in seen:
                continue
            orbit = [pt]
            seen.add(pt)
            nxt = _apply_col(P, M, pt)
            while nxt != pt:
                orbit.append(nxt)
                seen.add(nxt)
                nxt = _apply_col(P, M, nxt)
            g = lift_column(M, *pt)
            Qg = form_action(Q, g, check=False)
            F = BinaryQuadraticForm(scale * Qg.A, scale * Qg.B, scale * Qg.C)
            out.append(LevelClass(F, scale, cls, g, len(orbit)))
    return out


def cycle_manin_rows(lc: LevelClass, M: int) -> list[tuple[int, int]]:
    """Bottom rows (mod M) of the matrices h with h{0, oo} summing (with sign -1 each)
    to the cycle {r, stab r} of lc; the orientation of the class is not applied."""
    (x1, y1), (x2, y2) = lc.g
    c, d = (-x2) % M if M > 1 else 0, x1 % M if M > 1 else 0
    rows = []
    steps = lc.sl2.steps
    for _ in range(lc.orbit_length):
        for s in steps:
            rows.append((c, d))
            c, d = d, (-c + d * s) % M if M > 1 else 0
    return rows


def square_level_classes(s: int, M: int) -> list[tuple[BinaryQuadraticForm, object, object]]:
    """Gamma_0(M)-classes of forms of square discriminant s^2 with M | A
    (imprimitive forms included), each with its two rational roots (x_-, x_+)
    as cusps; returns (form, start, end) with the geodesic oriented from x_- to x_+."""
    out = []
    pts = p1_points(M)
    for C in range(s):
        Q = BinaryQuadraticForm(0, s, C)
        for pt in pts:
            if Q(*pt) % M:
                continue
            g = lift_column(M, *pt)
            F = form_action(Q, g, check=False)
            out.append((F,) + split_roots(F))
    return out


def split_roots(F: BinaryQuadraticForm):
    """Oriented endpoints (x_-, x_+) of the geodesic of a form of square discriminant."""
    s = isqrt(F.disc)
    A, B, C = F.as_tuple()
    if A == 0:
        fin = Fraction(-C, B)
        return ("oo", fin) if B > 0 else (fin, "oo")
    return Fraction(-B - s, 2 * A), Fraction(-B + s, 2 * A)


# -- Heegner forms -------------------------------------------------------------------


@dataclass(frozen=True)
class HeegnerStructure:
    N: int
    Delta: int
    delta: int
    unit: tuple[int, int]


def heegner_structure(N: int, Delta: int, p: int | None = None) -> HeegnerStructure:
    if N < 1:
        raise ConstraintError(f"level must be positive, got {N}")
    if Delta <= 0 or is_square(Delta) or Delta % 4 not in (0, 1):
        raise ConstraintError(f"Delta must be a positive nonsquare discriminant, got {Delta}")
    if gcd(Delta, N * (p or 1)) != 1:
        raise ConstraintError(f"gcd(Delta, Np) must be 1 (Delta={Delta}, N={N}, p={p})")
    delta = next((x for x in range(2 * N) if (x * x - Delta) % (4 * N) == 0), None)
    if delta is None:
        raise ConstraintError(f"no delta with delta^2 = {Delta} mod {4 * N}: primes of N not split")
    return HeegnerStructure(N, Delta, delta, pell(Delta))


def primes_split(N: int, Delta: int) -> bool:
    """Whether Delta is a square mod 4N (the existence condition for delta)."""
    return any((x * x - Delta) % (4 * N) == 0 for x in range(2 * N))


def heegner_forms(H: HeegnerStructure) -> list[BinaryQuadraticForm]:
    """Representatives of primitive forms with N | A, B = delta mod N, modulo Gamma_0(N)."""
    return [lc.form for lc in heegner_level_classes(H)]


def heegner_level_classes(H: HeegnerStructure) -> list[LevelClass]:
    N = H.N
    return [lc for lc in level_classes(H.Delta, N) if (lc.form.B - H.delta) % N == 0]


def is_heegner_form(H: HeegnerStructure, Q: BinaryQuadraticForm) -> bool:
    return Q.disc == H.Delta and Q.is_primitive and Q.A % H.N == 0 and (Q.B - H.delta) % H.N == 0


def automorph(H: HeegnerStructure, Q: BinaryQuadraticForm) -> Mat:
    """gamma_Q = ((a + bB, 2Cb), (-2Ab, a - bB)) from the Pell unit (a, b)."""
    if not is_heegner_form(H, Q):
        raise ConstraintError(f"{Q.as_tuple()} is not a Heegner form for N={H.N}, Delta={H.Delta}")
    a, b = H.unit
    A, B, C = Q.as_tuple()
    return ((a + b * B, 2 * C * b), (-2 * A * b, a - b * B))


def represented_value(Q: BinaryQuadraticForm, coprime_to: int, bound: int = 64) -> int | None:
    """A value Q(m, n), gcd(m, n) = 1, prime to the given integer; spiral search."""
    for r in range(1, bound + 1):
        ring = []
        for m in range(-r, r + 1):
            ring += [(m, r), (m, -r)]
        for n in range(-r + 1, r):
            ring += [(r, n), (-r, n)]
        if r == 1:
            ring = [(1, 0), (0, 1)] + ring
        for m, n in ring:
            if gcd(m, n) != 1:
                continue
            val = Q(m, n)
            if val != 0 and gcd(val, coprime_to) == 1:
                return val
    return None


def genus_value(d: int, Q: BinaryQuadraticForm, bound: int = 64) -> int:
    """(d / n) for n represented by Q prime to d, or 0 if gcd(A, B, C, d) > 1."""
    if gcd(Q.content, d) > 1:
        return 0
    n = represented_value(Q, d, bound)
    if n is None:
        raise ArithmeticError(f"no value of {Q.as_tuple()} prime to {d} with |m|, |n| <= {bound}")
    return kronecker(d, n)


def genus_character(H: HeegnerStructure, d: int, Q: BinaryQuadraticForm, bound: int = 64) -> int:
    if not is_fundamental_discriminant(d) or H.Delta % d:
        raise ConstraintError(f"{d} is not a fundamental divisor of Delta = {H.Delta}")
    dp = H.Delta // d
    if not is_fundamental_discriminant(dp) or gcd(d, dp) != 1:
        raise ConstraintError(f"Delta = {H.Delta} does not split as {d} * {dp} into coprime fundamentals")
    return genus_value(d, Q, bound)


# -- exact quadratic surds ------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticSurd:
    """(P + R sqrt(Delta)) / S with integers, S > 0, in lowest terms."""

    P: int
    R: int
    S: int
    Delta: int

    @staticmethod
    def make(r: Fraction, s: Fraction, Delta: int) -> "QuadraticSurd":
        den = r.denominator * s.denominator // gcd(r.denominator, s.denominator)
        P, R = int(r * den), int(s * den)
        g = gcd(gcd(P, R), den)
        return QuadraticSurd(P // g, R // g, den // g, Delta)

    def parts(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.P, self.S), Fraction(self.R, self.S)

    def mobius(self, g: Mat) -> "QuadraticSurd":
        (a, b), (c, d) = g
        r, s = self.parts()
        nr, ns = a * r + b, a * s
        dr, ds = c * r + d, c * s
        norm = dr * dr - ds * ds * self.Delta
        if norm == 0:
            raise ZeroDivisionError("surd maps to infinity")
        # (nr + ns w)(dr - ds w) / norm
        return QuadraticSurd.make(
            (nr * dr - ns * ds * self.Delta) / norm, (ns * dr - nr * ds) / norm, self.Delta
        )

    def __float__(self) -> float:
        return (self.P + self.R * self.Delta**0.5) / self.S


def tau_Q(Q: BinaryQuadraticForm) -> QuadraticSurd:
    """(-B + sqrt(Delta)) / (2A)."""
    if Q.A == 0:
        raise ConstraintError("tau_Q needs A != 0")
    return QuadraticSurd.make(Fraction(-Q.B, 2 * Q.A), Fraction(1, 2 * Q.A), Q.disc)
