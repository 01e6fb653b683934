import os
from fractions import Fraction
from math import gcd

import pytest

from conftest import SPLITS, slot, table
from sklift.arith import ConstraintError, MissingDataError, factorize, is_fundamental_discriminant, kronecker
from sklift.maass import ComputedProvider, rho
from sklift.modsym import twisted_L_value
from sklift.padic import WeightSeries
from sklift.shintani import (
    DiscriminantType,
    J_sum,
    ShintaniTable,
    choose_auxiliary_discriminant,
    classify_discriminant,
)

DMAX = 600


def negative_fundamentals(bound, M):
    return [-n for n in range(3, bound + 1) if is_fundamental_discriminant(-n) and gcd(n, M) == 1]


# -- classification ---------------------------------------------------------------------


def test_atkin_lehner_signs_of_fixtures():
    assert slot(15).atkin_lehner == {3: 1, 5: -1}
    assert slot(21).atkin_lehner == {3: -1, 7: 1}


def test_classify_by_definition(level):
    f = slot(level)
    N, p = SPLITS[level]
    seen = set()
    for d in negative_fundamentals(400, level):
        at_N = all(kronecker(d, l) == f.atkin_lehner[l] for l in factorize(N))
        at_p = kronecker(d, p) == f.atkin_lehner[p]
        expected = DiscriminantType.NEITHER if not at_N else (DiscriminantType.TYPE_I if at_p else DiscriminantType.TYPE_II)
        kind = classify_discriminant(d, f, p)
        assert kind is expected
        seen.add(kind)
    assert seen == set(DiscriminantType)


@pytest.mark.parametrize("d, kind", [(-8, "I"), (-23, "I"), (-11, "II"), (-4, "neither"), (-7, "neither")])
def test_classify_examples_level15(d, kind):
    # w3 = +1, w5 = -1: type I needs (d/3) = +1 and (d/5) = -1
    assert classify_discriminant(d, slot(15), 5).value == kind


def test_classify_errors():
    f = slot(15)
    with pytest.raises(ConstraintError):
        classify_discriminant(-3, f, 5)  # not coprime to 15
    with pytest.raises(ConstraintError):
        classify_discriminant(-12, f, 5)  # not fundamental
    with pytest.raises(ConstraintError):
        classify_discriminant(-8, f, 7)  # 7 does not divide 15


# -- coefficients -----------------------------------------------------------------------------


@pytest.mark.parametrize("M, D0", [(11, -3), (15, -8), (21, -19)])
def test_auxiliary_discriminant(M, D0):
    f = slot(M)
    assert choose_auxiliary_discriminant(f) == D0
    assert twisted_L_value(f, D0) != 0
    assert all(kronecker(D0, l) == f.atkin_lehner[l] for l in factorize(M))


def test_auxiliary_discriminant_search_bound():
    with pytest.raises(MissingDataError):
        choose_auxiliary_discriminant(slot(21), bound=10)


def test_parity_zeros(level):
    t = table(level)
    for D in range(1, DMAX + 1):
        if (-D) % 4 in (2, 3):
            assert t.coefficient(D) == 0


def test_coefficient_rejects_nonpositive():
    with pytest.raises(ConstraintError):
        table(15).coefficient(0)


def test_opposite_sign_forces_zero(level):
    # (-D/l) = -w_l at some l | Np gives an exact zero
    t = table(level)
    f = slot(level)
    checked = 0
    for D in range(3, DMAX + 1):
        if (-D) % 4 not in (0, 1):
            continue
        if any(kronecker(-D, l) == -f.atkin_lehner[l] for l in factorize(level)):
            assert t.coefficient(D) == 0, D
            checked += 1
    assert checked > 100


def test_table_not_identically_zero(level):
    t = table(level)
    nonzero = [D for D in range(1, 200) if t.coefficient(D) != 0]
    assert len(nonzero) > 5
    assert t.coefficient(-t.aux) != 0


def test_type_i_nonvanishing_matches_twisted_L(level):
    t = table(level)
    f = slot(level)
    p = SPLITS[level][1]
    for d in negative_fundamentals(200, level):
        if classify_discriminant(d, f, p) is DiscriminantType.TYPE_I:
            assert (t.coefficient(-d) != 0) == (twisted_L_value(f, d) != 0), d


def test_type_ii_coefficients_vanish(level):
    t = table(level)
    f = slot(level)
    p = SPLITS[level][1]
    for d in negative_fundamentals(DMAX, level):
        if classify_discriminant(d, f, p) is DiscriminantType.TYPE_II:
            assert t.coefficient(-d) == 0


def test_kohnen_multiplicativity_small(level):
    t = table(level)
    N, p = SPLITS[level]
    prov = ComputedProvider(t, N, p)
    count = 0
    for d in negative_fundamentals(DMAX, 1):
        for n in range(2, 30):
            if gcd(n, level) != 1 or -d * n * n > DMAX:
                continue
            assert t.coefficient(-d * n * n) == t.coefficient(-d) * rho(prov, d, n, 2)
            count += 1
    assert count > 20


def test_gauge_rescaling(level):
    t = table(level)
    lam = Fraction(-5, 7)
    r = t.rescaled(lam)
    assert r.aux == t.aux and r.gauge() != t.gauge()
    base = t.coefficient(-t.aux)
    for D in range(3, 250):
        assert r.coefficient(D) == lam * t.coefficient(D)
        assert r.coefficient(D) / r.coefficient(-r.aux) == t.coefficient(D) / base


def test_cache_round_trip(tmp_path):
    t = ShintaniTable(slot(15), 5)
    t.extend(120)
    path = t.cache_path(str(tmp_path))
    assert os.path.basename(path) == "shintani_15.tsv"
    t.save(path)
    with open(path) as fh:
        header = fh.readline()
        first = fh.readline().rstrip("\n").split("\t")
    assert header == f"# gauge {t.gauge()}\n"
    assert len(first) == 3
    fresh = ShintaniTable(slot(15), 5)
    assert fresh.load(path) == len(t.coefficients)
    assert fresh.coefficients == t.coefficients
    # a different gauge refuses the cache
    other = t.rescaled(3)
    assert other.load(path) == 0 and other.coefficients == {}
    assert fresh.load(str(tmp_path / "missing.tsv")) == 0


def test_table_level_must_contain_p():
    with pytest.raises(ConstraintError):
        ShintaniTable(slot(15), 7)


# -- J sums ---------------------------------------------------------------------------------------


def admissible_pairs(M, p, bound):
    f = slot(M)
    ds = negative_fundamentals(bound, M)
    out = []
    for d in ds:
        if classify_discriminant(d, f, p) is not DiscriminantType.TYPE_II:
            continue
        for dp in ds:
            if d * dp > bound or gcd(d, dp) != 1:
                continue
            if classify_discriminant(dp, f, p) is DiscriminantType.TYPE_I:
                out.append((d, dp))
    return out


def test_jsum_vanishes_at_two(level):
    p = SPLITS[level][1]
    pairs = admissible_pairs(level, p, 500)
    assert len(pairs) >= 3
    for d, dp in pairs:
        res = J_sum(slot(level), p, d, dp)
        assert res.k2_value == 0
        assert res.note == "Euler factor vanishes at k=2"
        assert res.Delta == d * dp


def test_jsum_rejects_wrong_types():
    f = slot(15)
    with pytest.raises(ConstraintError):
        J_sum(f, 5, -8, -11)  # -8 is type I
    with pytest.raises(ConstraintError):
        J_sum(f, 5, -11, -11)


def first_pair(level):
    p = SPLITS[level][1]
    d, dp = admissible_pairs(level, p, 500)[0]
    return d, dp, J_sum(slot(level), p, d, dp)


def test_jsum_derivative_of_linear_data(level):
    p = SPLITS[level][1]
    d, dp, res = first_pair(level)
    nodes = [2, 2 + (p - 1), 2 + 2 * (p - 1)]
    data = {}
    expected = Fraction(0)
    for i, (Q, chi) in enumerate(res.terms):
        c = Fraction(i + 1, 3)
        data[Q] = WeightSeries(p, [(k, (k - 2) * c) for k in nodes])
        expected += chi * c
    out = J_sum(slot(level), p, d, dp, data)
    assert out.derivative == expected
    assert out.k2_value == 0


def test_jsum_zero_character_terms_need_no_data(level):
    p = SPLITS[level][1]
    d, dp, res = first_pair(level)
    nodes = [2, 2 + (p - 1)]
    data = {Q: WeightSeries(p, [(k, k - 2) for k in nodes]) for Q, chi in res.terms if chi}
    out = J_sum(slot(level), p, d, dp, data)
    assert out.derivative == sum(chi for _, chi in res.terms)
    if data:
        missing = dict(data)
        missing.pop(next(iter(missing)))
        with pytest.raises(MissingDataError):
            J_sum(slot(level), p, d, dp, missing)


def test_non_squarefree_level_rejected():
    from sklift.modsym import ModularSymbolSpace, newform_slot

    f = newform_slot(ModularSymbolSpace(27))
    with pytest.raises(ConstraintError):
        choose_auxiliary_discriminant(f)
