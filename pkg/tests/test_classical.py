from fractions import Fraction

import pytest

from gridlab import classical
from gridlab.classical import EtaPowerProduct
from gridlab.qlaurent import Series


def naive_product(factors, prec):
    """prod (1 - q^k)^r as a coefficient list, by repeated polynomial multiplication."""
    out = [0] * prec
    out[0] = 1
    for k, r in factors:
        for _ in range(abs(r)):
            if r > 0:
                for e in range(prec - 1, k - 1, -1):
                    out[e] -= out[e - k]
            else:
                for e in range(k, prec):
                    out[e] += out[e - k]
    return out


def coeffs(s, lo, hi):
    return [int(c) for c in s.coeff_list(lo, hi)]


def test_theta_families():
    assert classical.theta(25).to_dict() == {0: 1, 1: 2, 4: 2, 9: 2, 16: 2}
    assert classical.theta1(5).to_dict() == {0: 1, 1: -2, 4: 2}
    assert classical.theta(25).coeff(2) == 0


def test_theta_squares_against_representation_counts():
    prec = 51
    th2 = classical.theta(prec) ** 2
    th12 = classical.theta1(prec) ** 2
    r = [0] * prec
    for x in range(-8, 9):
        for y in range(-8, 9):
            if x * x + y * y < prec:
                r[x * x + y * y] += 1
    assert coeffs(th2, 0, prec) == r
    diff = th2 - th12
    assert all(diff.coeff(e) % 8 == 0 for e in range(1, prec))


def test_delta_two_routes_to_200():
    via_eis = classical.delta(200, method="eisenstein")
    via_eta = classical.delta(200, method="eta")
    assert via_eis == via_eta
    assert coeffs(via_eta, 1, 4) == [1, -24, 252]
    oracle = naive_product([(k, 24) for k in range(1, 200)], 199)
    assert coeffs(via_eta, 1, 200) == oracle


def test_j_expansion_and_integrality():
    j = classical.jfun(30)
    assert coeffs(j, -1, 2) == [1, 744, 196884]
    assert j.is_integral()


def test_e4_cubed_minus_e6_squared_has_no_constant():
    e4, e6 = classical.eisenstein(4, 10), classical.eisenstein(6, 10)
    assert (e4**3 - e6**2).coeff(0) == 0


def test_eisenstein_rejects_unsupported_weight():
    with pytest.raises(ValueError):
        classical.eisenstein(5, 10)


def test_bernoulli_values():
    assert classical.bernoulli(4) == Fraction(-1, 30)
    assert classical.bernoulli(10) == Fraction(5, 66)


def test_eta_products_against_hand_expansion():
    s = classical.eta_power_product({4: 6}, 14)
    assert s.to_dict() == {1: 1, 5: -6, 9: 9, 13: 10}
    oracle = naive_product([(4 * k, 6) for k in range(1, 4)], 13)
    assert coeffs(s, 1, 14) == oracle
    s24 = classical.eta_power_product({24: 1}, 200)
    pent = {24 * k * (3 * k - 1) // 2 + 1: (-1) ** k for k in range(-3, 4)}
    assert s24.to_dict() == {e: c for e, c in pent.items() if e < 200}
    assert classical.eta_power_product({1: 24}, 50) == classical.delta(50, method="eisenstein")


def test_eta_product_with_negative_exponents():
    s = classical.eta_power_product({1: -2, 2: 1}, 30)  # eta(2t)/eta(t)^2
    oracle = naive_product([(k, -2) for k in range(1, 31)] + [(2 * k, 1) for k in range(1, 16)], 30)
    assert s.val == 0
    assert coeffs(s, 0, 30) == oracle


def test_eta_power_product_type():
    e = EtaPowerProduct({4: 6})
    assert e.leading == 1 and e.weight == 3
    with pytest.raises(ValueError):
        EtaPowerProduct({1: 1})


def test_g_seed_published_coefficients():
    g = classical.zagier_g_seed(20)
    assert [g.coeff(e) for e in (-1, 0, 3, 4, 7)] == [1, -2, 248, -492, 4119]
    assert g.coeff(1) == 0


def test_bracket_properties():
    a = classical.theta(30)
    assert classical.rc_bracket(a, Fraction(1, 2), a, Fraction(1, 2)).is_zero()
    const = Series.monomial(0, 20, 5)
    g = classical.eisenstein(4, 20)
    assert classical.rc_bracket(const, 2, g, 4) == g.qderive() * 10


def long_division_f(prec):
    """Ramanujan's f(q) summand by summand, dividing power series by (1+q^k) in Fractions."""
    total = [Fraction(0)] * prec
    total[0] = Fraction(1)
    n = 1
    while n * n < prec:
        term = [Fraction(0)] * prec
        term[n * n] = Fraction(1)
        for k in range(1, n + 1):
            for _ in range(2):
                for e in range(k, prec):
                    term[e] -= term[e - k]
        total = [a + b for a, b in zip(total, term)]
        n += 1
    return total


def test_mock_theta_f_against_long_division():
    f = classical.mock_theta_f(40)
    assert coeffs(f, 0, 5) == [1, 1, -2, 3, -3]
    assert [Fraction(c) for c in f.coeff_list(0, 40)] == long_division_f(40)
    assert f.is_integral()


def test_residue_builders_match_exact():
    M = 7**6
    for build in (classical.theta, classical.jfun, classical.zagier_g_seed, classical.mock_theta_f):
        assert build(60, M) == build(60).reduce_mod(M)
    assert classical.delta(60, 3**8) == classical.delta(60).reduce_mod(3**8)
