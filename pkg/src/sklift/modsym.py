"""Weight-2 modular symbols for Gamma_0(M).

The space is presented by Manin symbols (c:d) in P^1(Z/MZ) modulo the
2-term and 3-term relations. Symbols {a, b} between cusps are converted to
Manin symbols with continued fractions. Hecke and Atkin-Lehner operators act
through explicit matrices on {a, b} and are re-expressed in the basis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, isqrt

from . import linalg
from .arith import ConstraintError, factorize, is_prime, kronecker, primes_up_to

log = logging.getLogger(__name__)

MAX_LEVEL = 10_000

# a cusp is a reduced pair (p, q) with q >= 0; infinity is (1, 0)
Cusp = tuple[int, int]
INFINITY: Cusp = (1, 0)


class MissingEigenlineError(LookupError):
    """No rational newform matches the requested selector."""


def cusp(x) -> Cusp:
    """Normalize int / Fraction / (p, q) / 'oo' into a reduced cusp pair."""
    if isinstance(x, str):
        if x in ("oo", "inf", "infinity"):
            return INFINITY
        x = Fraction(x)
    if isinstance(x, tuple):
        p, q = x
    else:
        x = Fraction(x)
        p, q = x.numerator, x.denominator
    if q == 0:
        return INFINITY
    g = gcd(p, q)
    p, q = p // g, q // g
    if q < 0:
        p, q = -p, -q
    return (p, q)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def act(g, z: Cusp) -> Cusp:
    """Moebius action of an integer matrix ((a, b), (c, d)) on a cusp."""
    (a, b), (c, d) = g
    p, q = z
    return cusp((a * p + b * q, c * p + d * q))


def complete_to_sl2(c: int, d: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Some ((a, b), (c, d)) in SL2(Z) with the given coprime bottom row."""
    g, x, y = _ext_gcd(c, d)
    if g != 1:
        raise ValueError(f"({c}, {d}) is not a primitive pair")
    # a*d - b*c = 1 with a = y, b = -x since c*x + d*y = 1
    return ((y, -x), (c, d))


def genus_x0(M: int) -> int:
    """Genus of X_0(M) from the classical index / elliptic point / cusp counts."""
    fac = factorize(M) if M > 1 else {}
    mu = M
    for q in fac:
        mu = mu * (q + 1) // q
    nu2 = 0 if M % 4 == 0 else 1
    nu3 = 0 if M % 9 == 0 else 1
    for q in fac:
        nu2 *= 1 + kronecker(-4, q)
        nu3 *= 1 + kronecker(-3, q)
    cusps = 0
    for d in range(1, M + 1):
        if M % d == 0:
            cusps += _phi(gcd(d, M // d))
    twelve_g = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * cusps
    return twelve_g // 12


def _phi(n: int) -> int:
    out = n
    for q in (factorize(n) if n > 1 else {}):
        out -= out // q
    return out


class ModularSymbolSpace:
    """Full weight-2 modular symbol space M_2(Gamma_0(M)) over Q (sign 0)."""

    def __init__(self, M: int, max_level: int = MAX_LEVEL):
        if M < 1:
            raise ConstraintError(f"level must be positive, got {M}")
        if M > max_level:
            raise ConstraintError(f"level {M} exceeds the configured bound {max_level}")
        self.M = M
        self._norm_cache: dict[tuple[int, int], int | None] = {}
        self.points = self._enumerate_p1()
        self.index = {pt: i for i, pt in enumerate(self.points)}
        self._build_relations()

    # -- P^1(Z/MZ) -----------------------------------------------------------

    def _enumerate_p1(self) -> list[tuple[int, int]]:
        M = self.M
        if M == 1:
            return [(0, 0)]
        pts = set()
        for c in range(M):
            for d in range(M):
                if gcd(gcd(c, d), M) == 1:
                    pts.add(self._canonical(c, d))
        return sorted(pts)

    def _canonical(self, c: int, d: int) -> tuple[int, int]:
        M = self.M
        if M == 1:
            return (0, 0)
        c, d = c % M, d % M
        if gcd(d, M) == 1:
            return (c * pow(d, -1, M) % M, 1)
        if gcd(c, M) == 1:
            return (1, d * pow(c, -1, M) % M)
        return min(((u * c) % M, (u * d) % M) for u in range(1, M) if gcd(u, M) == 1)

    def normalize(self, c: int, d: int) -> int | None:
        """Index of (c:d) in P^1(Z/MZ), or None if gcd(c, d, M) > 1."""
        M = self.M
        key = (c % M, d % M)
        try:
            return self._norm_cache[key]
        except KeyError:
            pass
        if gcd(gcd(key[0], key[1]), M) != 1:
            out = None
        else:
            out = self.index[self._canonical(*key)]
        self._norm_cache[key] = out
        return out

    # -- relations -------------------------------------------------------------

    def _build_relations(self) -> None:
        n = len(self.points)
        norm = self.normalize
        rep = [-1] * n
        sgn = [0] * n
        for i, (c, d) in enumerate(self.points):
            if rep[i] >= 0:
                continue
            j = norm(d, -c)
            rep[i] = i
            if j == i:
                sgn[i] = 0
            else:
                sgn[i] = 1
                rep[j], sgn[j] = i, -1
        gens = [i for i in range(n) if rep[i] == i and sgn[i] != 0]
        gpos = {g: k for k, g in enumerate(gens)}
        rows = set()
        for i, (c, d) in enumerate(self.points):
            row = [0] * len(gens)
            for k in (i, norm(d, -c - d), norm(-c - d, c)):
                if sgn[k]:
                    row[gpos[rep[k]]] += sgn[k]
            if any(row):
                rows.add(tuple(row))
        red, pivots = linalg.rref(linalg.to_fractions(sorted(rows)), len(gens))
        pivset = set(pivots)
        free = [k for k in range(len(gens)) if k not in pivset]
        fpos = {k: b for b, k in enumerate(free)}
        gen_vec: list[dict[int, Fraction]] = [dict() for _ in gens]
        for k in free:
            gen_vec[k] = {fpos[k]: Fraction(1)}
        for row, pcol in zip(red, pivots):
            gen_vec[pcol] = {fpos[k]: -row[k] for k in free if row[k] != 0}
        self.basis = [gens[k] for k in free]
        self.dim = len(self.basis)
        self.manin_vectors: list[dict[int, Fraction]] = []
        for i in range(n):
            if sgn[i] == 0:
                self.manin_vectors.append({})
            else:
                v = gen_vec[gpos[rep[i]]]
                self.manin_vectors.append({b: sgn[i] * x for b, x in v.items()})

    # -- symbols -------------------------------------------------------------

    def manin_to_symbol(self, i: int) -> tuple[Cusp, Cusp]:
        """A pair {b/d, a/c} representing the Manin symbol with index i."""
        c, d = self.points[i]
        M = self.M
        if M == 1:
            return ((0, 1), INFINITY)
        if c == 0:
            c = M
        while gcd(c, d) != 1:
            d += M
        g = complete_to_sl2(c, d)
        return act(g, (0, 1)), act(g, INFINITY)

    def _zero_to(self, z: Cusp, out: dict[int, int], sign: int) -> None:
        """Accumulate the Manin symbols of {0, z} into out (with multiplicity)."""
        norm = self.normalize
        p, q = z
        if q == 0:
            i = norm(0, 1)
            out[i] = out.get(i, 0) + sign
            return
        i = norm(0, 1)
        out[i] = out.get(i, 0) + sign
        q_prev2, q_prev = 1, 0
        s = -1
        a, b = p, q
        while b:
            t = a // b
            a, b = b, a - t * b
            q_j = t * q_prev + q_prev2
            i = norm(s * q_j, q_prev)
            out[i] = out.get(i, 0) + sign
            q_prev2, q_prev = q_prev, q_j
            s = -s

    def symbol_terms(self, alpha, beta, out: dict[int, int] | None = None, sign: int = 1) -> dict[int, int]:
        """Manin-symbol multiplicities of {alpha, beta}."""
        out = {} if out is None else out
        self._zero_to(cusp(beta), out, sign)
        self._zero_to(cusp(alpha), out, -sign)
        return out

    def terms_to_vector(self, terms: dict[int, int]) -> list[Fraction]:
        v = [Fraction(0)] * self.dim
        for i, m in terms.items():
            if m:
                for b, x in self.manin_vectors[i].items():
                    v[b] += m * x
        return v

    def symbol_vector(self, alpha, beta) -> list[Fraction]:
        return self.terms_to_vector(self.symbol_terms(alpha, beta))

    # -- cusps and boundary -----------------------------------------------------

    def cusps_equivalent(self, z1: Cusp, z2: Cusp) -> bool:
        (p1, q1), (p2, q2) = z1, z2
        s1 = 1 if q1 in (0, 1) else pow(p1, -1, q1)
        s2 = 1 if q2 in (0, 1) else pow(p2, -1, q2)
        m = gcd(q1 * q2, self.M)
        return (s1 * q2 - s2 * q1) % m == 0

    @cached_property
    def boundary_matrix(self) -> tuple[list[Cusp], linalg.Matrix]:
        reps: list[Cusp] = []

        def cls(z):
            for k, r in enumerate(reps):
                if self.cusps_equivalent(z, r):
                    return k
            reps.append(z)
            return len(reps) - 1

        cols = []
        for i in self.basis:
            a, b = self.manin_to_symbol(i)
            col: dict[int, int] = {}
            ka, kb = cls(a), cls(b)
            col[kb] = col.get(kb, 0) + 1
            col[ka] = col.get(ka, 0) - 1
            cols.append(col)
        mat = [[Fraction(col.get(k, 0)) for col in cols] for k in range(len(reps))]
        return reps, mat

    @cached_property
    def cuspidal_basis(self) -> linalg.Matrix:
        _, mat = self.boundary_matrix
        return linalg.nullspace(mat, self.dim)

    @property
    def cuspidal_dimension(self) -> int:
        return len(self.cuspidal_basis)

    def cusp_classes(self) -> list[Cusp]:
        """Representatives of all Gamma_0(M)-classes of cusps."""
        reps: list[Cusp] = []
        for q in range(1, self.M + 1):
            if self.M % q:
                continue
            for p in range(0, q + self.M + 1):
                z = cusp((p, q))
                if gcd(p, q) == 1 and not any(self.cusps_equivalent(z, r) for r in reps):
                    reps.append(z)
        return reps

    # -- operators ---------------------------------------------------------------

    def hecke_images(self, ell: int, alpha: Cusp, beta: Cusp) -> list[tuple[Cusp, Cusp]]:
        """T_ell (ell prime to M) or U_ell (ell | M) applied to {alpha, beta}."""
        if not is_prime(ell):
            raise ConstraintError(f"Hecke operators implemented for primes only, got {ell}")
        mats = [((1, j), (0, ell)) for j in range(ell)]
        if self.M % ell:
            mats.append(((ell, 0), (0, 1)))
        return [(act(g, alpha), act(g, beta)) for g in mats]

    def _operator_matrix(self, image) -> linalg.Matrix:
        cols = []
        for i in self.basis:
            terms: dict[int, int] = {}
            for a, b in image(i):
                self.symbol_terms(a, b, terms)
            cols.append(self.terms_to_vector(terms))
        return linalg.transpose(cols)

    def hecke_matrix(self, ell: int) -> linalg.Matrix:
        key = ("T", ell)
        cache = self.__dict__.setdefault("_op_cache", {})
        if key not in cache:
            cache[key] = self._operator_matrix(lambda i: self.hecke_images(ell, *self.manin_to_symbol(i)))
        return cache[key]

    def star_matrix(self) -> linalg.Matrix:
        """The involution {a, b} -> {-a, -b}, i.e. (c:d) -> (-c:d)."""
        cache = self.__dict__.setdefault("_op_cache", {})
        if "star" not in cache:
            cols = []
            for i in self.basis:
                c, d = self.points[i]
                cols.append(self.terms_to_vector({self.normalize(-c, d): 1}))
            cache["star"] = linalg.transpose(cols)
        return cache["star"]

    def atkin_lehner_matrix_entries(self, ell: int):
        """An integer matrix W_ell = ((ell, y), (M, ell*w)) of determinant ell."""
        M = self.M
        if M % ell or (M // ell) % ell == 0:
            raise ConstraintError(f"W_{ell} needs {ell} to divide {M} exactly")
        g, w, y = _ext_gcd(ell, -(M // ell))
        # ell*w - (M/ell)*y = 1
        assert g == 1
        W = ((ell, y), (M, ell * w))
        assert ell * ell * w - M * y == ell
        return W

    def atkin_lehner_matrix(self, ell: int) -> linalg.Matrix:
        W = self.atkin_lehner_matrix_entries(ell)
        cache = self.__dict__.setdefault("_op_cache", {})
        if ("W", ell) not in cache:
            cache[("W", ell)] = self._operator_matrix(
                lambda i: [tuple(act(W, z) for z in self.manin_to_symbol(i))]
            )
        return cache[("W", ell)]


@dataclass
class NewformSlot:
    """A rational newform located in a modular symbol space.

    ``vector`` is the minus-sign eigen-functional on the full symbol space:
    it satisfies v o T_ell = a_ell v and v o star = -v, scaled so that its
    first nonzero coordinate is 1 (times ``gauge``).
    """

    space: ModularSymbolSpace
    eigenvalues: dict[int, int]
    atkin_lehner: dict[int, int]
    vector: list[Fraction]
    gauge: Fraction = Fraction(1)
    _manin_values: list[Fraction] | None = field(default=None, repr=False)
    _ap_cache: dict[int, int] = field(default_factory=dict, repr=False)

    @property
    def level(self) -> int:
        return self.space.M

    @property
    def manin_values(self) -> list[Fraction]:
        if self._manin_values is None:
            vec = self.vector
            self._manin_values = [
                sum((x * vec[b] for b, x in mv.items()), Fraction(0)) for mv in self.space.manin_vectors
            ]
        return self._manin_values

    def evaluate_terms(self, terms: dict[int, int]) -> Fraction:
        vals = self.manin_values
        return sum((m * vals[i] for i, m in terms.items() if m), Fraction(0))

    def rescaled(self, lam) -> "NewformSlot":
        lam = Fraction(lam)
        if lam == 0:
            raise ConstraintError("gauge factor must be nonzero")
        return NewformSlot(
            self.space,
            dict(self.eigenvalues),
            dict(self.atkin_lehner),
            [x * lam for x in self.vector],
            self.gauge * lam,
            None,
            dict(self._ap_cache),
        )

    def gauge_hash(self) -> str:
        """Short stable fingerprint of the eigen-functional (identifies the gauge)."""
        import hashlib

        text = ",".join(f"{x.numerator}/{x.denominator}" for x in self.vector)
        return hashlib.sha256(f"{self.level}:{text}".encode()).hexdigest()[:16]

    def a_prime(self, ell: int) -> int:
        """Hecke eigenvalue at the prime ell (U_ell eigenvalue when ell | M)."""
        if ell in self.eigenvalues:
            return self.eigenvalues[ell]
        if ell not in self._ap_cache:
            sp = self.space
            vals = self.manin_values
            i = next(k for k, x in enumerate(vals) if x != 0)
            a, b = sp.manin_to_symbol(i)
            terms: dict[int, int] = {}
            for x, y in sp.hecke_images(ell, a, b):
                sp.symbol_terms(x, y, terms)
            ratio = self.evaluate_terms(terms) / vals[i]
            if ratio.denominator != 1:
                raise ArithmeticError(f"non-integral eigenvalue {ratio} at {ell}")
            self._ap_cache[ell] = int(ratio)
        return self._ap_cache[ell]

    def a_n(self, n: int) -> int:
        if n < 1:
            raise ConstraintError(f"a_n needs n >= 1, got {n}")
        out = 1
        for ell, e in factorize(n).items() if n > 1 else ():
            ap = self.a_prime(ell)
            bad = self.level % ell == 0
            prev, cur = 1, ap
            for _ in range(e - 1):
                prev, cur = cur, ap * cur - (0 if bad else ell) * prev
            out *= cur
        return out


def _split(space: ModularSymbolSpace, basis: linalg.Matrix, T: linalg.Matrix, a: int) -> linalg.Matrix:
    """Basis of {v in span(basis) : T v = a v}."""
    images = []
    for v in basis:
        tv = linalg.matvec(T, v)
        images.append([x - a * y for x, y in zip(tv, v)])
    # coefficients x with sum_j x_j images_j = 0
    cols = linalg.transpose(images)
    null = linalg.nullspace(cols, len(basis))
    return [[sum((c * v[k] for c, v in zip(x, basis) if c), Fraction(0)) for k in range(space.dim)] for x in null]


def rational_newforms(space: ModularSymbolSpace, prime_bound: int | None = None) -> list[NewformSlot]:
    """All newforms of level M with rational Hecke eigenvalues, ordered by their
    eigenvalue sequence at good primes."""
    M = space.M
    if space.dim == 0:
        return []
    if prime_bound is None:
        prime_bound = max(50, 2 * isqrt(M) + 20)
    pieces: list[tuple[linalg.Matrix, dict[int, int]]] = [(linalg.identity(space.dim), {})]
    used: list[int] = []
    for ell in primes_up_to(prime_bound):
        if M % ell == 0:
            continue
        if all(len(b) <= 2 for b, _ in pieces) and used:
            break
        T = space.hecke_matrix(ell)
        used.append(ell)
        bound = isqrt(4 * ell)
        new = []
        for basis, eig in pieces:
            if len(basis) <= 2 and eig:
                # already a single eigensystem; record its eigenvalue
                tv = linalg.matvec(T, basis[0])
                k = next(k for k, x in enumerate(basis[0]) if x != 0)
                a = tv[k] / basis[0][k]
                new.append((basis, {**eig, ell: int(a)}))
                continue
            for a in range(-bound, bound + 1):
                sub = _split(space, basis, T, a)
                if sub:
                    new.append((sub, {**eig, ell: a}))
        pieces = new
    out = []
    star = space.star_matrix()
    for basis, eig in pieces:
        if len(basis) != 2:
            continue
        bad = {}
        for ell in sorted(factorize(M)) if M > 1 else []:
            U = space.hecke_matrix(ell)
            tv = linalg.matvec(U, basis[0])
            k = next(k for k, x in enumerate(basis[0]) if x != 0)
            bad[ell] = tv[k] / basis[0][k]
        if any(x.denominator != 1 for x in bad.values()):
            continue
        eig_all = {**eig, **{ell: int(x) for ell, x in bad.items()}}
        rows: linalg.Matrix = []
        n = space.dim
        for ell, a in eig_all.items():
            T = space.hecke_matrix(ell)
            rows += [[T[j][i] - (a if i == j else 0) for j in range(n)] for i in range(n)]
        rows += [[star[j][i] + (1 if i == j else 0) for j in range(n)] for i in range(n)]
        null = linalg.nullspace(rows, n)
        if len(null) != 1:
            log.debug("eigen-functional not one-dimensional at level %s: %s", M, eig_all)
            continue
        v = null[0]
        lead = next(x for x in v if x != 0)
        v = [x / lead for x in v]
        al = {}
        for ell in eig_all:
            if M % ell == 0 and (M // ell) % ell:
                W = space.atkin_lehner_matrix(ell)
                wv = [sum(W[j][i] * v[j] for j in range(n)) for i in range(n)]
                k = next(k for k, x in enumerate(v) if x != 0)
                sign = wv[k] / v[k]
                if sign not in (1, -1) or any(x != sign * y for x, y in zip(wv, v)):
                    raise ArithmeticError(f"W_{ell} is not a +-1 eigen-map on the newform line")
                al[ell] = int(sign)
        out.append(NewformSlot(space, eig_all, al, v))
    out.sort(key=lambda s: tuple(s.eigenvalues[ell] for ell in used))
    return out


def newform_slot(space: ModularSymbolSpace, selector=0) -> NewformSlot:
    """Select a rational newform by index, by a dict of prescribed eigenvalues
    {ell: a_ell}, or by Weierstrass coefficients (a1, a2, a3, a4, a6)."""
    forms = rational_newforms(space)
    if isinstance(selector, int):
        if not 0 <= selector < len(forms):
            raise MissingEigenlineError(f"level {space.M} has {len(forms)} rational newforms; index {selector}")
        return forms[selector]
    if isinstance(selector, tuple) and len(selector) == 5:
        from .curves import ap_from_curve

        selector = {ell: ap_from_curve(selector, ell) for ell in primes_up_to(30) if space.M % ell}
    for f in forms:
        if all(f.a_prime(ell) == a for ell, a in selector.items()):
            return f
    raise MissingEigenlineError(f"no rational newform of level {space.M} matches {selector}")


def period_integral(slot: NewformSlot, r, s) -> Fraction:
    """Minus-part period {r, s} of the newform, as an exact rational."""
    return slot.evaluate_terms(slot.space.symbol_terms(r, s))


def twisted_L_value(slot: NewformSlot, d: int) -> Fraction:
    """Algebraic part of L(f, chi_d, 1) for a fundamental discriminant d < 0:
    sum over a mod |d| of chi_d(a) {oo, a/|d|} on the minus eigen-functional."""
    from .arith import is_fundamental_discriminant

    if not is_fundamental_discriminant(d):
        raise ConstraintError(f"{d} is not a fundamental discriminant")
    if gcd(d, slot.level) != 1:
        raise ConstraintError(f"discriminant {d} is not coprime to the level {slot.level}")
    if d > 0:
        raise ConstraintError("only negative discriminants pair with the minus eigen-functional")
    m = -d
    sp = slot.space
    terms: dict[int, int] = {}
    for a in range(1, m):
        chi = kronecker(d, a)
        if chi:
            sp.symbol_terms(INFINITY, (a, m), terms, chi)
    return slot.evaluate_terms(terms)


def twist_root_number(slot: NewformSlot, d: int) -> int:
    """Sign of the functional equation of L(f x chi_d, s) for gcd(d, M) = 1."""
    w_M = 1
    for ell in factorize(slot.level) if slot.level > 1 else {}:
        w_M *= atkin_lehner_sign(slot, ell)
    return -w_M * kronecker(d, -slot.level)


def atkin_lehner_sign(slot: NewformSlot, ell: int) -> int:
    if slot.level % ell:
        raise ConstraintError(f"{ell} does not divide the level {slot.level}")
    if (slot.level // ell) % ell == 0:
        raise ConstraintError(f"{ell}^2 divides the level {slot.level}; not supported")
    return slot.atkin_lehner[ell]
