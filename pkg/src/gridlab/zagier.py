"""Zagier's weight 1/2 and 3/2 bases {f_d}, {g_D} on Gamma_0(4), plus-space.

f_d = q^-d + sum_{D>0} a(D,d) q^D  (d = 0, 3, 4, 7, 8, ...; f_0 = theta)
g_D = q^-D + sum_{d>=0} b(D,d) q^d (D = 1, 4, 5, 8, 9, ...)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Iterable

from . import classical
from .operators import (
    HeckeSpec,
    hecke_composite,
    hecke_images,
    kronecker,
    required_input_prec,
    zagier_spec,
)
from .etabuilder import ConstructionFailure
from .qlaurent import PrecisionError, Series
from .report import CongruenceReport


def load_fixture() -> dict:
    """Published leading coefficients of f_0, f_3, f_4, g_1, g_4, g_5 and the worked p = 3 example."""
    with resources.files("gridlab.data").joinpath("zagier_fixture.json").open() as fh:
        return json.load(fh)


def fixture_terms(family: str, index: int) -> tuple[dict[int, int], int]:
    """({exponent: coefficient}, prec) for a tabulated form."""
    raw = dict(load_fixture()[family][str(index)])
    prec = raw.pop("_prec")
    return {int(e): c for e, c in raw.items()}, prec


F_FAMILY = "f"
G_FAMILY = "g"


def f_indices(max_d: int) -> list[int]:
    return [d for d in range(0, max_d + 1) if d % 4 in (0, 3)]


def g_indices(max_D: int) -> list[int]:
    return [D for D in range(1, max_D + 1) if D % 4 in (0, 1)]


def is_f_index(d: int) -> bool:
    return d >= 0 and d % 4 in (0, 3)


def is_g_index(D: int) -> bool:
    return D >= 1 and D % 4 in (0, 1)


@dataclass
class ZagierBasis:
    family: str
    forms: dict[int, Series]
    prec: int
    modulus: int | None = None

    def __getitem__(self, index: int) -> Series:
        try:
            return self.forms[index]
        except KeyError:
            raise KeyError(f"{self.family}_{index} not built (max index {self.max_index})") from None

    def __contains__(self, index: int) -> bool:
        return index in self.forms

    @property
    def max_index(self) -> int:
        return max(self.forms)

    def coefficient(self, index: int, e: int):
        return self[index].coeff(e)

    def to_json(self) -> dict:
        return {
            "schema": "gridlab.basis.v1",
            "family": "zagier-" + self.family,
            "prec": self.prec,
            "modulus": self.modulus,
            "forms": {str(i): s.to_json() for i, s in sorted(self.forms.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ZagierBasis":
        if obj.get("schema") != "gridlab.basis.v1":
            raise ValueError("not a gridlab.basis.v1 document")
        family = obj["family"].removeprefix("zagier-")
        forms = {int(i): Series.from_json(s) for i, s in obj["forms"].items()}
        return cls(family, forms, int(obj["prec"]), obj.get("modulus"))


def _reduce(x: Series, basis: dict[int, Series], lead: int, clear_constant: bool) -> Series:
    """Turn x = c q^-lead + ... into the monic form with no lower principal part.

    Lower terms are cleared with the monic basis forms first and the division by c
    comes last, so in residue mode a non-unit c only costs precision in the modulus.
    """
    c = x.coeff(-lead)
    if not c:
        raise ConstructionFailure(f"leading coefficient at q^-{lead} vanished", lead)
    for e in range(-lead + 1, 1 if clear_constant else 0):
        r = x.coeff(e)
        if not r:
            continue
        if -e not in basis:
            raise ConstructionFailure(f"no basis form with principal part q^{e} to reduce against", lead)
        x = x - basis[-e] * r
    return x.divide_exact(c)


def _work_modulus(modulus: int | None) -> int | None:
    # the seeds are divided by 20; carry one extra factor of gcd(M, 20)
    if modulus is None:
        return None
    if modulus % 2 == 0:
        raise ValueError("residue builds need an odd modulus (the seed brackets carry a factor 1/2)")
    return modulus * math.gcd(modulus, 20)


def _seed_pieces(work: int, modulus: int | None):
    e10_4 = classical.e10(-(-work // 4) + 2, modulus).dilate(4, work)
    delta_4 = classical.delta(-(-work // 4) + 2, modulus).dilate(4, work)
    return e10_4, delta_4.invert()


def build_f_basis(max_d: int, prec: int, modulus: int | None = None) -> ZagierBasis:
    """f_0 = theta, f_3 from [theta, E10(4tau)]/Delta(4tau), then the j(4tau) ladder."""
    if max_d < 0:
        raise ValueError("max_d must be >= 0")
    wm = _work_modulus(modulus)
    work = prec + max_d + 16
    th = classical.theta(work, wm)
    forms: dict[int, Series] = {0: th}
    if max_d >= 3:
        e10_4, inv_delta_4 = _seed_pieces(work, wm)
        seed = classical.rc_bracket(th, Fraction(1, 2), e10_4, 10) * inv_delta_4
        forms[3] = _reduce(seed, forms, 3, clear_constant=True)
    if wm != modulus:
        forms = {d: f.reduce_mod(modulus) for d, f in forms.items()}
    jj = classical.j4(work, modulus)
    for d in f_indices(max_d):
        if d in forms:
            continue
        forms[d] = _reduce(forms[d - 4] * jj, forms, d, clear_constant=True)
    return _finish(F_FAMILY, forms, prec, modulus)


def build_g_basis(max_D: int, prec: int, modulus: int | None = None) -> ZagierBasis:
    """g_1 = theta_1 E4(4tau)/eta(4tau)^6; g_4 from the bracket seed; then the j(4tau) ladder.

    The bracket [g_1, E10(4tau)]/Delta(4tau) starts at q^-5, so g_4 is obtained by
    eliminating q^-5 against g_1 j(4tau) before normalizing.
    """
    if max_D < 1:
        raise ValueError("max_D must be >= 1")
    wm = _work_modulus(modulus)
    work = prec + max_D + 16
    g1 = classical.zagier_g_seed(work, wm)
    forms: dict[int, Series] = {1: g1}
    if max_D >= 4:
        e10_4, inv_delta_4 = _seed_pieces(work, wm)
        jj = classical.j4(work, wm)
        seed = classical.rc_bracket(g1, Fraction(3, 2), e10_4, 10) * inv_delta_4
        g1j = g1 * jj
        x = seed - g1j * seed.coeff(-5)
        forms[4] = _reduce(x, forms, 4, clear_constant=False)
    if wm != modulus:
        forms = {D: g.reduce_mod(modulus) for D, g in forms.items()}
    jj = classical.j4(work, modulus)
    for D in g_indices(max_D):
        if D in forms:
            continue
        forms[D] = _reduce(forms[D - 4] * jj, forms, D, clear_constant=False)
    return _finish(G_FAMILY, forms, prec, modulus)


def _finish(family: str, forms: dict[int, Series], prec: int, modulus) -> ZagierBasis:
    out = {}
    for i, s in sorted(forms.items()):
        if s.prec < prec:
            raise ConstructionFailure(f"{family}_{i} only known below q^{s.prec}, wanted {prec}", i)
        if modulus is None and not s.is_integral():
            raise ConstructionFailure(f"{family}_{i} has non-integral coefficients", i)
        out[i] = s.truncate(prec)
    return ZagierBasis(family, out, prec, modulus)


# ---------------------------------------------------------------------- grid access
class ZagierGrid:
    """Both families together, with grid lookups a(D,d), b(D,d).

    Forms beyond the built ladder are realized on a window of exponents through the
    dual family's columns: b(D,d) = -a(D,d) is read off f_d, and a(D,d) off g_D.
    """

    def __init__(self, f: ZagierBasis, g: ZagierBasis):
        if f.modulus != g.modulus:
            raise ValueError("bases live in different coefficient rings")
        self.f = f
        self.g = g
        self.modulus = f.modulus

    @classmethod
    def build(cls, max_d: int, max_D: int, prec_f: int, prec_g: int | None = None, modulus: int | None = None) -> "ZagierGrid":
        prec_g = prec_f if prec_g is None else prec_g
        return cls(build_f_basis(max_d, prec_f, modulus), build_g_basis(max_D, prec_g, modulus))

    def a(self, D: int, d: int):
        return self.f[d].coeff(D)

    def b(self, D: int, d: int):
        return self.g[D].coeff(d)

    def g_form(self, D: int, upto: int) -> Series:
        """g_D known below q^upto: the built form, or its dual-column realization."""
        if D in self.g.forms and self.g[D].prec >= upto:
            return self.g[D].truncate(upto)
        if not is_g_index(D):
            raise KeyError(f"g_{D} does not exist")
        terms = {-D: 1}
        for d in range(0, upto):
            if is_f_index(d):
                if d not in self.f.forms:
                    raise PrecisionError(f"f_{d} missing for dual column of g_{D}")
                terms[d] = -self.f[d].coeff(D)
        return Series.from_dict(terms, upto, self.modulus)

    def f_form(self, d: int, upto: int) -> Series:
        """f_d known below q^upto, built or realized from the g columns."""
        if d in self.f.forms and self.f[d].prec >= upto:
            return self.f[d].truncate(upto)
        if not is_f_index(d):
            raise KeyError(f"f_{d} does not exist")
        if d == 0:
            return classical.theta(upto, self.modulus)
        terms = {-d: 1}
        for D in range(1, upto):
            if is_g_index(D):
                if D not in self.g.forms:
                    raise PrecisionError(f"g_{D} missing for dual column of f_{d}")
                terms[D] = -self.g[D].coeff(d)
        return Series.from_dict(terms, upto, self.modulus)


def grid_coefficient(grid: ZagierGrid, family: str, D: int, d: int):
    """a(D,d) (family 'f') or b(D,d) (family 'g')."""
    if family in ("f", "a"):
        if not (is_f_index(d) and d in grid.f):
            raise KeyError(f"f_{d} not available")
        return grid.a(D, d)
    if family in ("g", "b"):
        if not (is_g_index(D) and D in grid.g):
            raise KeyError(f"g_{D} not available")
        return grid.b(D, d)
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------- verifiers
def verify_duality_zagier(grid: ZagierGrid, max_D: int, max_d: int, ms: Iterable[int] = (), window: int | None = None) -> CongruenceReport:
    """a_m(D,d) = -b_m(D,d): m = 1 on the full block, and each m in ``ms`` on a window."""
    rep = CongruenceReport("zagier-duality", {"max_D": max_D, "max_d": max_d, "ms": list(ms)})
    for D in g_indices(max_D):
        for d in f_indices(max_d):
            rep.add_equality((1, D, d), grid.a(D, d), -grid.b(D, d))
    for m in ms:
        Ds = g_indices(max_D)[: window] if window else g_indices(max_D)
        ds = f_indices(max_d)[: window] if window else f_indices(max_d)
        top_D, top_d = max(Ds), max(ds)
        for d in ds:
            fd = grid.f_form(d, m * m * top_D + 1)
            img = hecke_composite(fd, m, k=0)
            for D in Ds:
                gD = grid.g_form(D, m * m * top_d + 1)
                bm = hecke_composite(gD, m, k=1).coeff(d)
                rep.add_equality((m, D, d), img.coeff(D), -bm)
    return rep


def verify_divisor_recursion(grid: ZagierGrid, m: int, max_d: int) -> CongruenceReport:
    """a_m(1,d) = sum_{n | m} n a(n^2, d): Hecke image versus grid lookups."""
    rep = CongruenceReport("zagier-divisor-recursion", {"m": m, "max_d": max_d})
    divisors = [n for n in range(1, m + 1) if m % n == 0]
    for d in f_indices(max_d):
        fd = grid.f_form(d, m * m + 1)
        lhs = hecke_composite(fd, m, k=0).coeff(1)
        rhs = sum(n * grid.a(n * n, d) for n in divisors)
        rep.add_equality((m, d), lhs, rhs)
    return rep


def split_square(D: int, p: int) -> tuple[int, int]:
    """D = p^{2v} j with p^2 not dividing j; returns (v, j)."""
    v = 0
    while D and D % (p * p) == 0:
        D //= p * p
        v += 1
    return v, D


def _pow0(x: int, e: int) -> int:
    # 0^0 = 1, as needed for the Legendre factors
    return 1 if e == 0 else x**e


def hecke_g_combination(D: int, p: int, n: int, char: int = 1) -> dict[int, int]:
    """Explicit basis combination for g_D | T(p^{2n}); ``char`` is the extra (s/p) factor."""
    if D <= 0:
        raise ValueError("index must be positive")
    v, j = split_square(D, p)
    eps = kronecker(char * j, p)
    combo: dict[int, int] = {}

    def put(idx, c):
        if c:
            combo[idx] = combo.get(idx, 0) + c

    if n < v:
        for t in range(n + 1):
            put(p ** (2 * v - 2 * n + 4 * t) * j, p**t)
    else:
        for t in range(n - v + 1):
            put(p ** (2 * t) * j, _pow0(eps, n - v - t) * p**t)
        for t in range(1, v + 1):
            put(p ** (2 * n - 2 * v + 4 * t) * j, p ** (n - v + t))
    return combo


def hecke_f_combination(d: int, p: int, n: int, char: int = 1) -> dict[int, int]:
    """Explicit basis combination for f_d | T(p^{2n}) (normalized weight 1/2).

    d = 0 is excluded: theta is a Hecke eigenform and p^2 divides 0.
    """
    if d <= 0:
        raise ValueError("index must be positive")
    u, i = split_square(d, p)
    eps = kronecker(-char * i, p)
    combo: dict[int, int] = {}

    def put(idx, c):
        if c:
            combo[idx] = combo.get(idx, 0) + c

    if n < u:
        for t in range(n + 1):
            put(p ** (2 * u - 2 * n + 4 * t) * i, p ** (n - t))
    else:
        for t in range(n - u + 1):
            put(p ** (2 * t) * i, _pow0(eps, n - u - t) * p**u)
        for t in range(1, u + 1):
            put(p ** (2 * n - 2 * u + 4 * t) * i, p ** (u - t))
    return combo


def combination_series(combo: dict[int, int], realize, upto: int) -> Series:
    out = None
    for idx, c in sorted(combo.items()):
        term = realize(idx, upto) * c
        out = term if out is None else out + term
    return out


def verify_hecke_expansion(grid: ZagierGrid, family: str, index: int, p: int, n: int, window: int) -> CongruenceReport:
    """Operator chain versus the explicit combination of basis forms, below q^window."""
    rep = CongruenceReport(
        f"zagier-hecke-{family}", {"index": index, "p": p, "n": n, "window": window}
    )
    need = required_input_prec(window, p, n)
    if family == "g":
        base = grid.g_form(index, need)
        lhs = hecke_images(base, zagier_spec(p, n, 1))[-1]
        combo = hecke_g_combination(index, p, n)
        rhs = combination_series(combo, grid.g_form, window)
    elif family == "f":
        base = grid.f_form(index, need)
        lhs = hecke_images(base, zagier_spec(p, n, 0))[-1]
        combo = hecke_f_combination(index, p, n)
        rhs = combination_series(combo, grid.f_form, window)
    else:
        raise ValueError(f"unknown family {family!r}")
    rep.params["combination"] = {str(k): v for k, v in combo.items()}
    rep.params["branch"] = "n<v" if n < split_square(index, p)[0] else "n>=v"
    rep.compare_series(lhs.truncate(window), rhs)
    return rep
