"""The Folsom-Ono grid on Gamma_0(144) with character chi_12.

G_D = q^-D + sum_{d>0} B(D,d) q^d  (D = 23 mod 24, support 1 mod 24)
F_d = -q^-d + sum_{D>0} A(D,d) q^D (d = 1 mod 24, support 23 mod 24)

G_D is built from eta quotients in the variable x = q^24, writing G_D = B_1 h
with h a modular function for Gamma_0(6) evaluated at 24 tau. h has poles at
two cusps: at infinity (principal part forced by q^-D) and at the cusp 1/2,
which the Atkin-Lehner involution W_3 swaps with infinity. With B_1 = q b(x)
and D = 24t - 1:

  h = P(phi) + R(u),  P(phi) = x^-t / b(x) + O(1),  R(phi) = x^-3t / b(x^3) + O(1)

where phi is a Hauptmodul with its pole at infinity and u = phi | W_3. The
remaining constant is a multiple of B_1, fixed so that [q^1] G_D matches the
q^D coefficient of F_1 (which comes from Ramanujan's f(q)).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources

from . import classical
from .etabuilder import (
    ConstructionFailure,
    EtaQuotientCandidate,
    atkin_lehner_terms,
    compress,
    compressed_eta,
    evaluate_polynomial,
    expand,
    hauptmodul_polynomial,
    hauptmodul_powers,
    involution_scale,
    search_candidates,
    solve_principal_part,
)
from .operators import fo_spec, hecke_images, is_prime, kronecker, required_input_prec
from .qlaurent import PrecisionError, Series
from .report import CongruenceReport
from .zagier import hecke_f_combination, hecke_g_combination, split_square

LEVEL = 144
SCALES = (24, 48, 72, 144)
MIRROR_Q = 3  # W_3 swaps infinity and 1/2 on Gamma_0(6)


def load_fixture() -> dict:
    with resources.files("gridlab.data").joinpath("fo_fixture.json").open() as fh:
        return json.load(fh)


def is_G_index(D: int) -> bool:
    return D > 0 and D % 24 == 23


def is_F_index(d: int) -> bool:
    return d > 0 and d % 24 == 1


# ---------------------------------------------------------------------- cusp forms
def b1_theta(prec: int, modulus: int | None = None) -> Series:
    """sum_{n >= 1, gcd(n,6) = 1} (n/3) n q^{n^2}."""
    terms = {}
    n = 1
    while n * n < prec:
        if n % 2 and n % 3:
            terms[n * n] = kronecker(n, 3) * n
        n += 1
    return Series.from_dict(terms, prec, modulus)


def b2_theta(prec: int, modulus: int | None = None) -> Series:
    """sum_{n >= 1, 3 does not divide n} (n/3) n q^{4 n^2}."""
    terms = {}
    n = 1
    while 4 * n * n < prec:
        if n % 3:
            terms[4 * n * n] = kronecker(n, 3) * n
        n += 1
    return Series.from_dict(terms, prec, modulus)


@dataclass(frozen=True)
class CuspFormFixture:
    """The two cusp forms spanning the weight 3/2 cusp space, with their listed terms."""

    b1_terms: dict
    b2_terms: dict

    @classmethod
    def load(cls) -> "CuspFormFixture":
        fx = load_fixture()
        return cls({int(k): v for k, v in fx["B1"].items()}, {int(k): v for k, v in fx["B2"].items()})

    def b1(self, prec: int, modulus: int | None = None) -> Series:
        return b1_theta(prec, modulus)

    def b2(self, prec: int, modulus: int | None = None) -> Series:
        return b2_theta(prec, modulus)

    def matches(self, name: str, s: Series) -> bool:
        """True if ``s`` agrees with every listed term and vanishes elsewhere through the last one."""
        terms = self.b1_terms if name == "B1" else self.b2_terms
        top = max(terms) + 1
        if s.prec < top:
            raise PrecisionError(f"need prec {top} to compare with the {name} table")
        return s.truncate(top) == Series.from_dict(terms, top, s.modulus)


# ---------------------------------------------------------------------- F_1
def build_F1(prec: int, modulus: int | None = None) -> Series:
    """q^-1 (f(q^24) - 2), known below q^prec."""
    if prec < 24:
        raise ValueError("build_F1 needs prec >= 24")
    f = classical.mock_theta_f(-(-(prec + 1) // 24), modulus)
    return (f - 2).dilate(24, prec + 1).shift(-1)


def mock_coefficients(n: int, modulus: int | None = None) -> list:
    """Coefficients of f(q) for exponents 0..n."""
    f = classical.mock_theta_f(n + 1, modulus)
    return [f.coeff(k) for k in range(n + 1)]


# ---------------------------------------------------------------------- G_D
@dataclass
class Provenance:
    kind: str  # constructed | duality-derived | hecke-derived | mock-theta
    detail: dict = field(default_factory=dict)


class FOBuilder:
    """Selects eta-quotient generators once and builds G_D on demand.

    ``modulus`` switches every series to residue arithmetic.
    """

    def __init__(self, modulus: int | None = None, box: int = 12):
        self.modulus = modulus
        self.box = box
        self.fixture = CuspFormFixture.load()
        self._powers: list[Series] = []
        self._poles: dict[int, tuple[dict, dict]] = {}

    # -- generator selection
    @cached_property
    def ladder_candidate(self) -> EtaQuotientCandidate:
        cands = search_candidates(LEVEL, 0, SCALES, residue=0, box=self.box, modular_function=True)
        hits = [c for c in cands if c.leading == -24]
        if not hits:
            raise ConstructionFailure("no weight 0 eta quotient with a single pole of order 24 at infinity")
        return hits[0]

    @cached_property
    def cusp_candidates(self) -> list[EtaQuotientCandidate]:
        return search_candidates(LEVEL, Fraction(3, 2), SCALES, residue=1, box=self.box, strict=True)

    @cached_property
    def anchor(self) -> EtaQuotientCandidate:
        """The strictly cuspidal candidate whose expansion is the tabulated B_1."""
        top = max(self.fixture.b1_terms) + 1
        for c in self.cusp_candidates:
            if c.leading == 1 and self.fixture.matches("B1", c.series(top)):
                return c
        raise ConstructionFailure("no eta quotient reproduces the B_1 table")

    def compatible(self, c: EtaQuotientCandidate) -> bool:
        """c / anchor is a modular function with trivial character on Gamma_0(144)."""
        diff = dict(self.anchor.terms)
        for d, r in c.terms.items():
            diff[d] = diff.get(d, 0) - r
        ratio = EtaQuotientCandidate.make(LEVEL, diff)
        if sum((LEVEL // d) * r for d, r in ratio.exponents) % 24:
            return False
        if any(o.denominator != 1 for o in ratio.orders().values()):
            return False
        prod = Fraction(1)
        for d, r in ratio.exponents:
            prod *= Fraction(d) ** r
        return all(int(v**0.5 + 0.5) ** 2 == v for v in (prod.numerator, prod.denominator))

    @cached_property
    def generators(self) -> list[EtaQuotientCandidate]:
        return [c for c in self.cusp_candidates if self.compatible(c)]

    @cached_property
    def mirror_candidate(self) -> EtaQuotientCandidate:
        """Eta quotient proportional to phi | W_3 (simple pole at the cusp 1/2 only)."""
        return EtaQuotientCandidate.make(LEVEL, atkin_lehner_terms(self.ladder_candidate.terms, MIRROR_Q, 24))

    @cached_property
    def mirror_scale(self) -> Fraction:
        """kappa with phi | W_3 = kappa * mirror; equals phi at the cusp 1/2."""
        phi, _ = compressed_eta(self.ladder_candidate, 12)
        psi, _ = compressed_eta(self.mirror_candidate, 12)
        return involution_scale(phi, psi) / psi.coeff(0)

    # -- compressed building blocks
    def _scalar(self, c: Fraction):
        if self.modulus is None:
            return c
        return c.numerator * pow(c.denominator, -1, self.modulus) % self.modulus

    def _phi(self, prec_x: int) -> Series:
        S, r = compressed_eta(self.ladder_candidate, prec_x, self.modulus)
        assert r == 0
        return S

    def _u(self, prec_x: int) -> Series:
        S, r = compressed_eta(self.mirror_candidate, prec_x, self.modulus)
        assert r == 0
        return S * self._scalar(self.mirror_scale)

    def _b1x(self, prec_x: int) -> Series:
        S, r = compressed_eta(self.anchor, prec_x, self.modulus)
        assert r == 1
        return S

    def _phi_powers(self, depth: int) -> list[Series]:
        if len(self._powers) <= depth:
            depth = max(depth, 2 * len(self._powers))
            self._powers = hauptmodul_powers(self._phi(depth), depth)
        return self._powers

    def pole_polynomials(self, t: int) -> tuple[dict, dict]:
        """(P, R): h = P(phi) + R(u) up to a constant, for D = 24t - 1."""
        if t not in self._poles:
            depth = MIRROR_Q * t
            binv = self._b1x(depth + 1).invert()
            inf_part = {e - t: c for e, c in binv.items() if e < t}
            mirror = binv.dilate(MIRROR_Q, depth + 1)
            cusp_part = {e - depth: c for e, c in mirror.items() if e < depth}
            powers = self._phi_powers(depth)
            phi = powers[1]
            self._poles[t] = (hauptmodul_polynomial(phi, inf_part, powers), hauptmodul_polynomial(phi, cusp_part, powers))
        return self._poles[t]

    def _calibrate(self, hx: Series, t: int, prec_x: int) -> Series:
        alpha = mock_coefficients(t, self.modulus)[t]
        c = -alpha - hx.coeff(0)
        return hx + self._b1x(prec_x) * c

    def _mirror_part(self, t: int, prec_x: int) -> Series:
        _, R = self.pole_polynomials(t)
        return self._b1x(prec_x) * evaluate_polynomial(R, self._u(prec_x), prec_x)

    def G_compressed(self, D: int, prec_x: int) -> Series:
        """S with G_D = q S(q^24), known below x^prec_x."""
        if not is_G_index(D):
            raise ValueError(f"G_{D} does not exist (need D = 23 mod 24)")
        t = (D + 1) // 24
        P, _ = self.pole_polynomials(t)
        work = prec_x + 2 * t
        hx = (self._b1x(work) * evaluate_polynomial(P, self._phi(work), work)).truncate(prec_x)
        if hx.prec < prec_x:
            raise PrecisionError(f"G_{D} infinity part lost precision ({hx.prec} < {prec_x})")
        return self._calibrate(hx + self._mirror_part(t, prec_x), t, prec_x)

    def G(self, D: int, prec: int) -> Series:
        """G_D known below q^prec."""
        prec_x = max(-(-(prec - 1) // 24), 1)
        return expand(self.G_compressed(D, prec_x), 24, 1, prec)

    def G_solved(self, D: int, prec: int, candidates: list[EtaQuotientCandidate] | None = None) -> Series:
        """G_D with the pole at infinity obtained by elimination over candidate x phi^k.

        A second route to :meth:`G`: the infinity part comes out of Gaussian elimination
        instead of the closed-form polynomial, and any compatible candidate set works.
        """
        if not is_G_index(D):
            raise ValueError(f"G_{D} does not exist (need D = 23 mod 24)")
        t = (D + 1) // 24
        prec_x = max(-(-(prec - 1) // 24), 1)
        work = prec_x + t + 2
        phi = self._phi(work)
        gens = []
        for c in (self.generators if candidates is None else candidates):
            S, r = compressed_eta(c, work, self.modulus)
            if r != 1:
                continue
            power = S
            for _ in range(t + 1 - max(0, -S.val)):
                gens.append(power)
                power = (power * phi).truncate(work)
        try:
            hx = solve_principal_part(gens, {-t: 1}, work, clear_constant=False)
        except ConstructionFailure as exc:
            raise ConstructionFailure(str(exc), D) from None
        hx = hx.truncate(prec_x) + self._mirror_part(t, prec_x)
        return expand(self._calibrate(hx, t, prec_x), 24, 1, prec)

    # -- F side
    def F1(self, prec: int) -> Series:
        return build_F1(prec, self.modulus)

    def F_from_duality(self, d: int, Dmax: int) -> Series:
        """-q^-d - sum_{D <= Dmax} B(D,d) q^D, known below q^(Dmax+1)."""
        if not is_F_index(d):
            raise ValueError(f"F_{d} does not exist (need d = 1 mod 24)")
        prec_x = (d - 1) // 24 + 1
        terms = {-d: -1}
        for D in range(23, Dmax + 1, 24):
            S = self.G_compressed(D, prec_x)
            terms[D] = -S.coeff((d - 1) // 24)
        return Series.from_dict(terms, Dmax + 1, self.modulus)

    def F_from_hecke(self, p: int, prec: int) -> Series:
        """F_{p^2} = F_1 | T(p^2) - (-12/p) F_1."""
        src = self.F1(required_input_prec(prec, p, 1))
        img = hecke_images(src, fo_spec(p, 1, 0))[-1]
        return (img - src.truncate(img.prec) * kronecker(-12, p)).truncate(prec)

    def F(self, d: int, prec: int, route: str = "auto") -> Series:
        """F_d known below q^prec.

        ``route`` is "duality", "hecke" (d = p^2, p >= 5 prime) or "auto", which takes the
        cheaper Hecke route for prime squares and duality otherwise.
        """
        if d == 1:
            return self.F1(max(prec, 24)).truncate(prec)
        root = math.isqrt(d)
        square = root * root == d and root >= 5 and is_prime(root)
        if route == "hecke" or (route == "auto" and square):
            if not square:
                raise ValueError(f"F_{d} has no Hecke route (d must be the square of a prime >= 5)")
            return self.F_from_hecke(root, prec)
        if route not in ("auto", "duality"):
            raise ValueError(f"unknown route {route!r}")
        return self.F_from_duality(d, prec - 1)


def build_G(D: int, prec: int, modulus: int | None = None) -> Series:
    return FOBuilder(modulus).G(D, prec)


def build_F_from_duality(d: int, Dmax: int, modulus: int | None = None) -> Series:
    return FOBuilder(modulus).F_from_duality(d, Dmax)


# ---------------------------------------------------------------------- grid
@dataclass
class FOGrid:
    G: dict[int, Series]
    F: dict[int, Series]
    provenance: dict[str, Provenance]

    @classmethod
    def build(cls, Dmax: int, dmax: int, builder: FOBuilder | None = None) -> "FOGrid":
        b = builder or FOBuilder()
        G = {D: b.G(D, dmax + 1) for D in range(23, Dmax + 1, 24)}
        F = {}
        prov = {f"G{D}": Provenance("constructed", {"generators": [c.terms for c in b.generators], "ladder": b.ladder_candidate.terms}) for D in G}
        for d in range(1, dmax + 1, 24):
            if d == 1:
                F[d] = b.F1(Dmax + 1)
                prov["F1"] = Provenance("mock-theta")
            else:
                F[d] = b.F_from_duality(d, Dmax)
                prov[f"F{d}"] = Provenance("duality-derived", {"Dmax": Dmax})
        return cls(G, F, prov)

    def A(self, D: int, d: int):
        return self.F[d].coeff(D)

    def B(self, D: int, d: int):
        return self.G[D].coeff(d)


# ---------------------------------------------------------------------- verifiers
def verify_fo_duality(builder: FOBuilder, Dmax: int, dmax: int) -> CongruenceReport:
    """A(D,d) = -B(D,d) with every F_d from an independent route where one exists.

    d = 1 uses F_1 from f(q); d = p^2 uses F_1 | T(p^2). Other columns can only come
    from duality itself and are recorded as tautological.
    """
    rep = CongruenceReport("fo-duality", {"Dmax": Dmax, "dmax": dmax})
    independent: dict[int, Series] = {1: builder.F1(Dmax + 1)}
    for p in (5, 7, 11, 13):
        if p * p <= dmax:
            independent[p * p] = builder.F_from_hecke(p, Dmax + 1)
    tautological = []
    for d in range(1, dmax + 1, 24):
        if d not in independent:
            tautological.append(d)
            continue
        for D in range(23, Dmax + 1, 24):
            rep.add_equality((D, d), independent[d].coeff(D), -builder.G(D, d + 1).coeff(d))
    rep.params["independent_columns"] = sorted(independent)
    rep.params["tautological_columns"] = tautological
    rep.notes.append("d=1 column is the calibration input for [q^1] G_D")
    return rep


def verify_fo_hecke_duality(builder: FOBuilder, p: int, Ds, ds) -> CongruenceReport:
    """A_p(D,d) = -B_p(D,d): F_d | T(p^2) (weight 1/2) against G_D | T(p^2) (weight 3/2).

    Also checks the principal parts of G_D | T(p^2) against the delta-function formula.
    """
    if p < 5:
        raise ValueError("p must be >= 5")
    rep = CongruenceReport("fo-hecke-duality", {"p": p, "D": list(Ds), "d": list(ds)})
    top_D, top_d = max(Ds), max(ds)
    chi = kronecker(12, p)
    for d in ds:
        Fd = builder.F(d, p * p * top_D + 1)
        img_F = hecke_images(Fd, fo_spec(p, 1, 0))[-1]
        for D in Ds:
            GD = builder.G(D, p * p * top_d + 1)
            img_G = hecke_images(GD, fo_spec(p, 1, 1))[-1]
            rep.add_equality(("A_p=-B_p", D, d), img_F.coeff(D), -img_G.coeff(d))
    for D in Ds:
        GD = builder.G(D, p * p + 1)
        img_G = hecke_images(GD, fo_spec(p, 1, 1))[-1]
        expected = {-D: chi * kronecker(D, p), -p * p * D: p}
        if D % (p * p) == 0:
            expected[-D // (p * p)] = 1
        got = dict(img_G.principal_part())
        rep.add_equality(("principal", D), {e: c for e, c in got.items()}, {e: c for e, c in expected.items() if c})
    return rep


def fo_combination_series(builder: FOBuilder, family: str, combo: dict[int, int], prec: int) -> Series:
    # F_d comes from the G columns here; the Hecke route would make F_1 checks circular
    out = None
    for idx, c in sorted(combo.items()):
        s = builder.G(idx, prec) if family == "G" else builder.F(idx, prec, route="duality")
        out = s * c if out is None else out + s * c
    return out


def verify_fo_hecke_expansion(builder: FOBuilder, family: str, index: int, p: int, n: int, window: int) -> CongruenceReport:
    """Operator chain against the explicit basis combination (with the (12/p) factors)."""
    rep = CongruenceReport(f"fo-hecke-{family}", {"index": index, "p": p, "n": n, "window": window})
    need = required_input_prec(window, p, n)
    if family == "G":
        lhs = hecke_images(builder.G(index, need), fo_spec(p, n, 1))[-1]
        combo = hecke_g_combination(index, p, n, char=12)
    elif family == "F":
        lhs = hecke_images(builder.F(index, need), fo_spec(p, n, 0))[-1]
        combo = hecke_f_combination(index, p, n, char=12)
    else:
        raise ValueError(f"unknown family {family!r}")
    rhs = fo_combination_series(builder, family, combo, window)
    rep.params["combination"] = {str(k): v for k, v in combo.items()}
    rep.params["branch"] = "n<v" if n < split_square(index, p)[0] else "n>=v"
    rep.compare_series(lhs.truncate(window), rhs)
    return rep
