import math
import random
from fractions import Fraction

import mpmath
import pytest

from conftest import curves, slot, space
from sklift import linalg
from sklift.arith import ConstraintError, factorize, is_fundamental_discriminant, kronecker, primes_up_to
from sklift.curves import ap_from_curve
from sklift.modsym import (
    INFINITY,
    MissingEigenlineError,
    ModularSymbolSpace,
    act,
    atkin_lehner_sign,
    newform_slot,
    period_integral,
    rational_newforms,
    twist_root_number,
    twisted_L_value,
)


def genus_oracle(M):
    """g(X_0(M)) = 1 + mu/12 - nu2/4 - nu3/3 - cusps/2."""
    fac = factorize(M) if M > 1 else {}
    mu = M
    for q in fac:
        mu = mu * (q + 1) // q
    nu2 = 0 if M % 4 == 0 else math.prod(1 + kronecker(-4, q) for q in fac)
    nu3 = 0 if M % 9 == 0 else math.prod(1 + kronecker(-3, q) for q in fac)
    cusps = sum(_phi(math.gcd(d, M // d)) for d in range(1, M + 1) if M % d == 0)
    g = 1 + Fraction(mu, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusps, 2)
    assert g.denominator == 1
    return int(g)


def _phi(n):
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def row_times(v, mat):
    n = len(v)
    return [sum(v[j] * mat[j][i] for j in range(n)) for i in range(n)]


# -- space construction -------------------------------------------------------------


@pytest.mark.parametrize("M, dim", [(11, 2), (1, 0), (15, 2), (37, 4), (23, 4)])
def test_cuspidal_dimension_examples(M, dim):
    assert ModularSymbolSpace(M).cuspidal_dimension == dim == 2 * genus_oracle(M)


# genera of X_0(M) from published tables
KNOWN_GENUS = {11: 1, 22: 2, 23: 2, 30: 3, 37: 2, 50: 2, 64: 3, 100: 7}


def test_genus_oracle_matches_tables():
    for M, g in KNOWN_GENUS.items():
        assert genus_oracle(M) == g


def test_cuspidal_dimension_matches_genus_small():
    for M in range(1, 51):
        assert ModularSymbolSpace(M).cuspidal_dimension == 2 * genus_oracle(M), M


def test_level_bound():
    with pytest.raises(ConstraintError):
        ModularSymbolSpace(10001)
    with pytest.raises(ConstraintError):
        ModularSymbolSpace(30, max_level=20)
    with pytest.raises(ConstraintError):
        ModularSymbolSpace(0)


@pytest.mark.parametrize("M", [11, 15, 21, 36, 37])
def test_manin_relations_annihilate(M):
    sp = space(M) if M in (11, 15, 21) else ModularSymbolSpace(M)

    def vec(c, d):
        return sp.manin_vectors[sp.normalize(c, d)]

    def add(*vs):
        out = {}
        for v in vs:
            for k, x in v.items():
                out[k] = out.get(k, 0) + x
        return {k: x for k, x in out.items() if x}

    for c, d in sp.points:
        assert add(vec(c, d), vec(d, -c)) == {}
        assert add(vec(c, d), vec(d, -c - d), vec(-c - d, c)) == {}


@pytest.mark.parametrize("M", [11, 15, 21, 37])
def test_hecke_commute_on_cuspidal(M):
    sp = space(M) if M in (11, 15, 21) else ModularSymbolSpace(M)
    basis = sp.cuspidal_basis
    primes = primes_up_to(20)
    for i, l in enumerate(primes):
        for q in primes[i + 1 :]:
            Tl, Tq = sp.hecke_matrix(l), sp.hecke_matrix(q)
            for v in basis:
                assert linalg.matvec(Tl, linalg.matvec(Tq, v)) == linalg.matvec(Tq, linalg.matvec(Tl, v))


# -- newforms ---------------------------------------------------------------------------


def test_level11_a2():
    assert slot(11).a_prime(2) == -2 == ap_from_curve(curves()[11]["coeffs"], 2)


@pytest.mark.parametrize("M", [11, 15, 21])
def test_eigenvalues_match_point_counts(M):
    f = slot(M)
    coeffs = curves()[M]["coeffs"]
    for ell in primes_up_to(50):
        if M % ell:
            assert f.a_prime(ell) == ap_from_curve(coeffs, ell)
            assert abs(f.a_prime(ell)) <= 2 * math.sqrt(ell)
        else:
            assert f.a_prime(ell) in (-1, 1)


@pytest.mark.parametrize("M", [11, 15, 21])
def test_eigen_equation_residual(M):
    f = slot(M)
    sp = f.space
    for ell in primes_up_to(23):
        assert row_times(f.vector, sp.hecke_matrix(ell)) == [f.a_prime(ell) * x for x in f.vector]
    assert row_times(f.vector, sp.star_matrix()) == [-x for x in f.vector]
    assert next(x for x in f.vector if x) == 1


def test_level37_two_newforms():
    sp = ModularSymbolSpace(37)
    forms = rational_newforms(sp)
    assert len(forms) == 2
    a = newform_slot(sp, (0, 0, 1, -1, 0))
    b = newform_slot(sp, (0, 1, 1, -23, -50))
    assert a.a_prime(2) == -2 and b.a_prime(2) == 0
    assert newform_slot(sp, {2: 0}).vector == b.vector


def test_missing_eigenline():
    with pytest.raises(MissingEigenlineError):
        newform_slot(ModularSymbolSpace(23))  # the newforms have coefficients in Q(sqrt 5)
    with pytest.raises(MissingEigenlineError):
        newform_slot(ModularSymbolSpace(1))
    with pytest.raises(MissingEigenlineError):
        newform_slot(space(11), {2: 1})


def test_a_n_recursion():
    f = slot(11)
    # q-expansion of 11a: q - 2q^2 - q^3 + 2q^4 + q^5 + 2q^6 - 2q^7 - 2q^9 - 2q^10 + q^11 - 2q^12 + 4q^13
    expected = [1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2, 4]
    assert [f.a_n(n) for n in range(1, 14)] == expected


# -- periods ------------------------------------------------------------------------------


def random_gamma0(rng, M):
    while True:
        c = M * rng.randint(-5, 5)
        d = rng.randint(-30, 30)
        if math.gcd(c, d) == 1:
            break
    g, x, y = _egcd(d, -c)
    # a d - b c = 1
    a, b = x, y
    k = rng.randint(-3, 3)
    return ((a + k * c, b + k * d), (c, d))


def _egcd(a, b):
    if b == 0:
        return (a, 1, 0) if a > 0 else (-a, -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def random_cusp(rng):
    q = rng.randint(0, 40)
    if q == 0:
        return INFINITY
    p = rng.randint(-60, 60)
    return Fraction(p, q)


def test_period_trivial_cases():
    f = slot(11)
    for r in (INFINITY, Fraction(0), Fraction(1, 3), Fraction(-5, 7)):
        assert period_integral(f, r, r) == 0
    assert period_integral(f, Fraction(2, 5), Fraction(1, 7)) + period_integral(f, Fraction(1, 7), Fraction(2, 5)) == 0


def test_period_infinity_zero_level11():
    # {oo, 0} is fixed by the real involution, so its minus part vanishes
    f = slot(11)
    assert period_integral(f, INFINITY, Fraction(0)) == 0
    sp = f.space
    v = sp.symbol_vector(INFINITY, (0, 1))
    assert linalg.matvec(sp.star_matrix(), v) == v


@pytest.mark.parametrize("M", [11, 15, 21])
def test_period_additivity_and_invariance(M):
    rng = random.Random(M)
    f = slot(M)
    for _ in range(500):
        r, s, t = random_cusp(rng), random_cusp(rng), random_cusp(rng)
        assert period_integral(f, r, s) + period_integral(f, s, t) == period_integral(f, r, t)
        g = random_gamma0(rng, M)
        assert (g[0][0] * g[1][1] - g[0][1] * g[1][0]) == 1 and g[1][0] % M == 0
        gr, gs = act(g, _as_cusp(r)), act(g, _as_cusp(s))
        assert period_integral(f, gr, gs) == period_integral(f, r, s)


def _as_cusp(x):
    if x == INFINITY:
        return INFINITY
    return (x.numerator, x.denominator)


# -- twisted L-values -------------------------------------------------------------------


def numeric_twisted_L(f, d, terms=4000):
    """L(f, chi_d, 1) = 2 sum chi(n) a_n exp(-2 pi n / (|d| sqrt M)) / n for an even twist."""
    mpmath.mp.dps = 30
    x = 2 * mpmath.pi / (abs(d) * mpmath.sqrt(f.level))
    total = mpmath.mpf(0)
    for n in range(1, terms):
        chi = kronecker(d, n)
        if chi:
            total += chi * f.a_n(n) * mpmath.exp(-n * x) / n
    return 2 * total


def test_twisted_L_level11_examples():
    f = slot(11)
    # d = -3: nonzero, confirmed numerically
    assert twisted_L_value(f, -3) != 0
    assert abs(numeric_twisted_L(f, -3)) > 0.1
    # d = -7: the twist has root number -1 and the central value vanishes
    assert twist_root_number(f, -7) == -1
    assert twisted_L_value(f, -7) == 0


def test_twisted_L_vanishing_matches_numeric():
    f = slot(11)
    for d in (-3, -4, -8, -19, -20, -24):
        exact = twisted_L_value(f, d)
        if twist_root_number(f, d) == 1:
            assert (exact != 0) == (abs(numeric_twisted_L(f, d)) > 1e-6)


def test_twisted_L_errors():
    f = slot(11)
    with pytest.raises(ConstraintError):
        twisted_L_value(f, -11)
    with pytest.raises(ConstraintError):
        twisted_L_value(f, -12)


@pytest.mark.parametrize("M", [11, 15, 21])
def test_twisted_L_vanishing_matches_sign(M):
    f = slot(M)
    for n in range(3, 301):
        d = -n
        if not is_fundamental_discriminant(d) or math.gcd(d, M) != 1:
            continue
        if twist_root_number(f, d) == -1:
            assert twisted_L_value(f, d) == 0


def test_twisted_L_linear_in_gauge():
    f = slot(15)
    g = f.rescaled(Fraction(-7, 3))
    for d in (-8, -23, -47):
        assert twisted_L_value(g, d) == Fraction(-7, 3) * twisted_L_value(f, d)
        assert (twisted_L_value(g, d) == 0) == (twisted_L_value(f, d) == 0)


# -- Atkin-Lehner --------------------------------------------------------------------------


@pytest.mark.parametrize("M", [11, 15, 21])
def test_atkin_lehner_involution(M):
    f = slot(M)
    sp = f.space
    for ell in factorize(M):
        W = sp.atkin_lehner_matrix(ell)
        w = atkin_lehner_sign(f, ell)
        assert w in (1, -1)
        assert row_times(f.vector, W) == [w * x for x in f.vector]
        # W acts as an involution on the cuspidal part
        for v in sp.cuspidal_basis:
            assert linalg.matvec(W, linalg.matvec(W, v)) == v
        # for ell exactly dividing M, a_ell = -w_ell
        assert f.a_prime(ell) == -w


def test_atkin_lehner_errors():
    f = slot(15)
    with pytest.raises(ConstraintError):
        atkin_lehner_sign(f, 7)
    with pytest.raises(ConstraintError):
        ModularSymbolSpace(18).atkin_lehner_matrix(3)


def functional_equation_residual(f, eps, t):
    """Lambda(1) from the split integral at t and 1/t; correct eps makes it t-independent."""
    mpmath.mp.dps = 30
    A = 2 * mpmath.pi / mpmath.sqrt(f.level)
    total = mpmath.mpf(0)
    for n in range(1, 400):
        an = f.a_n(n)
        if an:
            total += an / mpmath.mpf(n) * (mpmath.exp(-A * n * t) + eps * mpmath.exp(-A * n / t))
    return total


def test_level11_sign_matches_functional_equation():
    f = slot(11)
    w = atkin_lehner_sign(f, 11)
    eps = -w
    a, b = functional_equation_residual(f, eps, 1.0), functional_equation_residual(f, eps, 1.3)
    assert abs(a - b) < 1e-20
    wrong_a, wrong_b = functional_equation_residual(f, -eps, 1.0), functional_equation_residual(f, -eps, 1.3)
    assert abs(wrong_a - wrong_b) > 1e-3
    assert w == -1
