import json
from fractions import Fraction

import pytest

from gridlab.operators import hecke_images, required_input_prec, zagier_spec
from gridlab.padic import (
    ap_closed_form,
    modulus_exponent,
    residue_vp,
    verify_ap_lemma,
    verify_bp_lemma,
    verify_coefficient_lemmas,
    verify_successive_congruence,
    verify_thm_hecke,
    verify_thm_today,
    vp,
    w_of,
)
from gridlab.qlaurent import PrecisionError, Series
from gridlab.report import CongruenceReport
from gridlab.zagier import ZagierGrid, build_g_basis


@pytest.fixture(scope="module")
def g_mod():
    """g_1 .. g_25 mod 3^9, long enough for T(3^8) windows of 20 terms."""
    return build_g_basis(25, required_input_prec(276, 3, 3), 3**9)


@pytest.fixture(scope="module")
def zgrid():
    return ZagierGrid.build(40, 40, 3000)


def test_vp():
    assert vp(9, 3) == 2
    assert vp(19675 - (-8), 3) == 9
    assert vp(Fraction(1, 3), 3) == -1
    assert vp(0, 3) is None
    assert residue_vp(486, 3, 9) == 5 and residue_vp(3**9, 3, 9) is None


def test_w():
    assert w_of(Series.from_dict({-4: 1, 0: -2}, 5), 3) == 0
    assert w_of(Series.from_dict({-9: 1, -1: 1}, 5), 3) == 1
    assert w_of(Series.from_dict({-36: 3, -4: 1}, 5), 3) == 1
    with pytest.raises(ValueError):
        w_of(Series.from_dict({0: 1}, 5), 3)


def test_modulus_exponent():
    assert modulus_exponent(Series.zero(1, 3**9), 3) == 9
    assert modulus_exponent(Series.zero(1), 3) is None
    with pytest.raises(ValueError):
        modulus_exponent(Series.zero(1, 12), 3)


def test_worked_example_spot_coefficients(g_mod):
    imgs = hecke_images(g_mod[4], zagier_spec(3, 3))
    assert imgs[3].coeff(3) == 19679 and imgs[1].coeff(3) == 19193
    assert vp(19679 - 19193, 3) == 5


def test_thm_hecke_worked_instance(g_mod):
    g4 = g_mod[4]
    rep = verify_thm_hecke("zagier", g4.truncate(required_input_prec(275, 3, 3)), 3, 1)
    assert rep.passed and rep.required == 1
    sub = verify_thm_hecke("zagier", g4.truncate(required_input_prec(275, 3, 3)), 3, 1, window=275)
    assert sub.observed == 2


def test_thm_hecke_window_guard(g_mod):
    with pytest.raises(PrecisionError):
        verify_thm_hecke("zagier", g_mod[4].truncate(required_input_prec(10, 3, 3)), 3, 1, window=11)
    with pytest.raises(ValueError):
        verify_thm_hecke("zagier", Series.from_dict({-9: 1}, 100), 3, 0)


def test_thm_hecke_fo_trivial_bound(fo):
    G = fo.G(23, required_input_prec(5, 5, 2))
    rep = verify_thm_hecke("fo", G, 5, 0)
    assert rep.passed and rep.required == 0


def test_window_monotonicity(g_mod):
    g4 = g_mod[4].truncate(required_input_prec(275, 3, 3))
    observed = [verify_thm_hecke("zagier", g4, 3, 1, window=w).observed for w in (4, 20, 100, 275)]
    for a, b in zip(observed, observed[1:]):
        assert b is None or (a is not None and b <= a)


def test_successive_exact_form(zgrid):
    rep = verify_successive_congruence("zagier", zgrid.g_form, 4, 3, 1, 12)
    assert rep.passed
    assert rep.params["exact_form"] == {"324": 9}
    five = verify_successive_congruence("zagier", zgrid.g_form, 5, 3, 1, 12)
    assert five.passed and five.params["eps"] == -1
    boundary = verify_successive_congruence("zagier", zgrid.g_form, 9, 3, 1, 12)
    assert boundary.passed and boundary.params["v"] == 1
    with pytest.raises(ValueError):
        verify_successive_congruence("zagier", zgrid.g_form, 9, 3, 0, 12)


def test_bp_lemma(zgrid):
    rep = verify_bp_lemma("zagier", zgrid.g_form, 4, [3, 4, 7, 8], 3, 1)
    assert rep.passed and rep.required == 1
    imgs = hecke_images(zgrid.g_form(4, 40), zagier_spec(3, 1))
    assert vp(imgs[1].coeff(3) - imgs[0].coeff(3), 3) >= 1
    bound0 = verify_bp_lemma("zagier", zgrid.g_form, 9, [3, 4], 3, 1)
    assert bound0.required == 0 and bound0.passed


def test_ap_closed_form_u0(zgrid):
    # u = 0: a_{p^n}(D, i) = sum_t (-i/p)^{n-t} a(D, p^{2t} i)
    col = lambda idx: zgrid.a(5, idx)  # noqa: E731
    i, p, n = 4, 3, 1
    expected = sum((1 if (-i) % 3 == 1 else -1) ** (n - t) * col(p ** (2 * t) * i) for t in range(n + 1))
    assert ap_closed_form(col, i, p, n) == expected
    assert verify_ap_lemma("zagier", zgrid.f_form, [1, 4, 5, 8], 4, 3, 1).passed
    with pytest.raises(ValueError):
        ap_closed_form(col, 0, 3, 1)


def test_coefficient_lemmas_bundle(zgrid):
    rep = verify_coefficient_lemmas("zagier", zgrid.g_form, zgrid.f_form, 4, range(1, 12), 3, 1)
    assert rep.passed


def test_thm_today_example(zgrid):
    assert zgrid.g_form(1, 73).coeff(72) % 3 == 0
    rep = verify_thm_today("zagier", lambda D, d: zgrid.g_form(D, d + 1).coeff(d), 3, 0, 1, [1], [8])
    assert rep.passed and rep.params["pairs"] == 1


def test_thm_today_reports_vacuous_and_fo(fo):
    big = build_g_basis(25, 3**2 * 30 + 1)
    rep = verify_thm_today("zagier", lambda D, d: big[D].coeff(d), 3, 0, 1, range(1, 26), range(1, 31))
    assert rep.passed and rep.vacuous > 0 and rep.substantive > 0
    fo_rep = verify_thm_today("fo", lambda D, d: fo.G(D, d + 1).coeff(d), 5, 0, 1, [23, 47], range(1, 50))
    assert fo_rep.passed


def test_report_serialization():
    rep = CongruenceReport("demo", {"p": 3})
    rep.add_valuation("a", 9, 1, 3)
    rep.add_valuation("b", 0, 1, 3)
    rep.add_equality("c", 1, 2)
    doc = json.loads(rep.dumps())
    assert doc["schema"] == "gridlab.report.v1"
    assert (doc["pass"], doc["observed"], doc["required"]) == (False, 2, 1)
    assert rep.vacuous == 1 and rep.failures == 1
    with pytest.raises(ValueError):
        rep.add_valuation("d", 3, 5, 3, modulus_exp=4)
