import pytest

from gridlab import classical
from gridlab.etabuilder import ConstructionFailure
from gridlab.folsomono import (
    FOBuilder,
    FOGrid,
    b1_theta,
    build_F1,
    build_F_from_duality,
    build_G,
    is_F_index,
    is_G_index,
    load_fixture,
    verify_fo_duality,
    verify_fo_hecke_duality,
    verify_fo_hecke_expansion,
)
from gridlab.qlaurent import PrecisionError, Series

PUBLISHED_G = {
    23: {-23: 1, 1: -1, 25: 263, 49: -3400, 73: 23374},
    47: {-47: 1, 1: 2, 25: -2781, 49: 102060},
    71: {-71: 1, 1: -3, 25: 17960},
}
PUBLISHED_F = {
    1: {-1: -1, 23: 1, 47: -2, 71: 3},
    25: {-25: -1, 23: -263, 47: 2781, 71: -17960},
    49: {-49: -1, 23: 3400, 47: -102060},
    73: {-73: -1, 23: -23374},
}


def test_F1_listed_terms_and_support():
    F1 = build_F1(200)
    for e, c in PUBLISHED_F[1].items():
        assert F1.coeff(e) == c
    assert F1.coeff(95) == classical.mock_theta_f(5).coeff(4) == -3
    assert all(e == -1 or e % 24 == 23 for e, _ in F1.items())
    with pytest.raises(ValueError):
        build_F1(10)


@pytest.mark.parametrize("D", sorted(PUBLISHED_G))
def test_G_published(fo, D):
    G = fo.G(D, 100)
    for e, c in PUBLISHED_G[D].items():
        assert G.coeff(e) == c, (D, e)


@pytest.mark.parametrize("d", [25, 49, 73])
def test_F_from_duality_published(d):
    F = build_F_from_duality(d, 95)
    for e, c in PUBLISHED_F[d].items():
        assert F.coeff(e) == c
    assert F.prec == 96


def test_fixture_file_matches_table():
    fx = load_fixture()
    for D, terms in PUBLISHED_G.items():
        assert {int(e): c for e, c in fx["G"][str(D)].items()} == terms
    for d, terms in PUBLISHED_F.items():
        assert {int(e): c for e, c in fx["F"][str(d)].items()} == terms


def test_b1_is_the_anchor_eta_quotient(fo):
    assert fo.fixture.matches("B1", b1_theta(200))
    assert fo.anchor.series(2000) == b1_theta(2000)


def test_two_construction_routes_agree(fo):
    for D in (23, 47, 95, 191):
        assert fo.G(D, 400) == fo.G_solved(D, 400)


def test_calibration_against_mock_theta(fo):
    F1 = fo.F1(1000)
    for D in range(23, 1000, 24):
        assert fo.G(D, 2).coeff(1) == -F1.coeff(D)


def test_support_and_integrality(fo):
    for D in (23, 47, 71, 95, 119):
        G = fo.G(D, 600)
        assert G.is_integral()
        assert G.principal_part() == [(-D, 1)]
        assert all(e % 24 == 1 for e, _ in G.items() if e > 0)


def test_mirror_scale(fo):
    assert fo.mirror_scale == -9


def test_residue_mode_matches_exact(fo):
    M = 5**8
    r = FOBuilder(M)
    for D in (23, 71, 143):
        assert r.G(D, 300) == fo.G(D, 300).reduce_mod(M)
    assert r.F(25, 200) == fo.F(25, 200).reduce_mod(M)


def test_F_routes_agree(fo):
    assert fo.F(25, 150, route="hecke") == fo.F(25, 150, route="duality")
    assert fo.F(49, 150, route="hecke") == fo.F(49, 150, route="duality")
    with pytest.raises(ValueError):
        fo.F(73, 50, route="hecke")
    with pytest.raises(ValueError):
        fo.F(73, 50, route="sideways")


def test_index_guards(fo):
    assert is_G_index(23) and not is_G_index(24)
    assert is_F_index(1) and not is_F_index(23)
    with pytest.raises(ValueError):
        fo.G(24, 10)
    with pytest.raises(ValueError):
        build_F_from_duality(2, 40)


def test_grid_block_duality():
    g = FOGrid.build(95, 49)
    assert g.provenance["F25"].kind == "duality-derived"
    for D in (23, 47, 71, 95):
        assert g.A(D, 1) == -g.B(D, 1)


def test_duality_report(fo):
    rep = verify_fo_duality(fo, 95, 97)
    assert rep.passed
    assert rep.params["independent_columns"] == [1, 25, 49]
    assert rep.params["tautological_columns"] == [73, 97]


@pytest.mark.parametrize("p", [5, 7])
def test_hecke_duality(fo, p):
    rep = verify_fo_hecke_duality(fo, p, [23, 47, 71, 95], [1, 25, 49])
    assert rep.passed, rep.summary()


@pytest.mark.parametrize(
    "family,index,p,n",
    [("G", 23, 5, 1), ("G", 23, 7, 1), ("G", 23, 5, 0), ("F", 1, 5, 1), ("F", 25, 5, 1), ("G", 47, 5, 1), ("F", 1, 7, 1)],
)
def test_hecke_expansion(fo, family, index, p, n):
    rep = verify_fo_hecke_expansion(fo, family, index, p, n, 30)
    assert rep.passed, rep.summary()


@pytest.mark.parametrize("prime", [2147483647, 2147483629])
def test_hecke_expansion_second_power(prime):
    # G_14375 is slow in exact arithmetic; two large primes fingerprint the identity
    rep = verify_fo_hecke_expansion(FOBuilder(prime), "G", 23, 5, 2, 2)
    assert rep.passed and rep.params["combination"] == {"23": 1, "575": 5, "14375": 25}


def test_G_precision_guard(fo):
    with pytest.raises(PrecisionError):
        fo.G(23, 30).coeff(30)
    assert isinstance(build_G(23, 30), Series)
    assert issubclass(ConstructionFailure, RuntimeError)
