"""Eta quotients on Gamma_0(N): cusp orders, candidate search and a principal-part solver.

Expansions of eta quotients whose scales are all multiples of 24 live on a single
progression L + 24Z; the solver works in the compressed variable x = q^24.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .classical import eta_power_product, euler_product
from .qlaurent import PrecisionError, Series

ETA_SCHEMA = "gridlab.eta.v1"


class ConstructionFailure(RuntimeError):
    """Raised when no combination achieves the requested principal part."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def euler_phi(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def gamma0_index(N: int) -> int:
    out = Fraction(N)
    for p in {p for p in range(2, N + 1) if N % p == 0 and all(p % q for q in range(2, math.isqrt(p) + 1))}:
        out *= Fraction(p + 1, p)
    return int(out)


# ---------------------------------------------------------------------- cusps
@dataclass(frozen=True)
class CuspClass:
    """Cusp a/c of Gamma_0(N) with c | N."""

    a: int
    c: int
    N: int

    @property
    def width(self) -> int:
        return self.N // math.gcd(self.c * self.c, self.N)

    @property
    def is_infinity(self) -> bool:
        return self.c == self.N

    def __str__(self) -> str:
        return "oo" if self.is_infinity else f"{self.a}/{self.c}"


def cusp_classes(N: int) -> list[CuspClass]:
    """One representative per Gamma_0(N) cusp class."""
    out = []
    for c in divisors(N):
        g = math.gcd(c, N // c)
        seen = set()
        a = 1
        while len(seen) < euler_phi(g):
            if math.gcd(a, c) == 1 and a % g not in seen:
                seen.add(a % g)
                out.append(CuspClass(a, c, N))
            a += 1
    expected = sum(euler_phi(math.gcd(c, N // c)) for c in divisors(N))
    if len(out) != expected:
        raise AssertionError(f"cusp enumeration for N={N} found {len(out)} classes, expected {expected}")
    return out


def _order_row(c: int, N: int, scales: Sequence[int]) -> np.ndarray:
    """Coefficients of r_delta in the order at cusps with denominator c (Ligozat)."""
    g = math.gcd(c, N // c)
    return np.array(
        [Fraction(N * math.gcd(c, d) ** 2, 24 * g * c * d) for d in scales], dtype=object
    )


# ---------------------------------------------------------------------- candidates
@dataclass(frozen=True)
class EtaQuotientCandidate:
    """prod_delta eta(delta tau)^{r_delta} on Gamma_0(N)."""

    N: int
    exponents: tuple[tuple[int, int], ...]

    @classmethod
    def make(cls, N: int, terms: dict[int, int]) -> "EtaQuotientCandidate":
        terms = {int(d): int(r) for d, r in terms.items() if r}
        bad = [d for d in terms if N % d]
        if bad:
            raise ValueError(f"scales {bad} do not divide N={N}")
        return cls(N, tuple(sorted(terms.items())))

    @property
    def terms(self) -> dict[int, int]:
        return dict(self.exponents)

    @property
    def weight(self) -> Fraction:
        return Fraction(sum(r for _, r in self.exponents), 2)

    @property
    def leading(self) -> Fraction:
        return Fraction(sum(d * r for d, r in self.exponents), 24)

    @property
    def total_abs(self) -> int:
        return sum(abs(r) for _, r in self.exponents)

    def orders(self) -> dict[CuspClass, Fraction]:
        return cusp_orders(self)

    def series(self, prec: int, modulus: int | None = None) -> Series:
        if self.leading.denominator != 1:
            raise ValueError("leading power is not integral")
        return eta_power_product(self.terms, prec, modulus)

    def progression(self) -> tuple[int, int]:
        """(step, residue): exponents lie in residue + step*Z."""
        step = 0
        for d, _ in self.exponents:
            step = math.gcd(step, d)
        step = step or 1
        return step, int(self.leading) % step

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "exponents": {str(d): r for d, r in self.exponents},
            "weight": str(self.weight),
            "leading": str(self.leading),
            "orders": {str(c): str(o) for c, o in self.orders().items()},
        }


def cusp_orders(candidate: EtaQuotientCandidate, N: int | None = None) -> dict[CuspClass, Fraction]:
    """Order of vanishing at every cusp class, in the local parameter at that cusp."""
    N = candidate.N if N is None else N
    scales = [d for d, _ in candidate.exponents]
    if any(N % d for d in scales):
        raise ValueError(f"scales {scales} must divide N={N}")
    r = [rr for _, rr in candidate.exponents]
    out = {}
    rows: dict[int, Fraction] = {}
    for cusp in cusp_classes(N):
        if cusp.c not in rows:
            rows[cusp.c] = sum((w * x for w, x in zip(_order_row(cusp.c, N, scales), r)), Fraction(0))
        out[cusp] = rows[cusp.c]
    return out


def valence_total(candidate: EtaQuotientCandidate) -> tuple[Fraction, Fraction]:
    """(sum of orders over all cusps, k * index / 12); equal for every eta quotient."""
    total = sum(candidate.orders().values(), Fraction(0))
    return total, candidate.weight * gamma0_index(candidate.N) / 12


def _is_rational_square(x: Fraction) -> bool:
    return all(math.isqrt(v) ** 2 == v for v in (x.numerator, x.denominator))


def search_candidates(
    N: int,
    weight,
    scales: Sequence[int] | None = None,
    residue: int | None = None,
    box: int = 12,
    strict: bool = False,
    pole_budget: int | None = None,
    modular_function: bool = False,
) -> list[EtaQuotientCandidate]:
    """Eta quotients of the given weight over ``scales`` with |r| <= box.

    Kept: integral leading power, leading power = ``residue`` mod 24 (if given),
    ord >= 0 (> 0 with ``strict``) at every cusp other than infinity and, with
    ``pole_budget``, leading power >= -pole_budget. ``modular_function`` adds the
    conditions for a weight 0 function with trivial character (integral orders,
    sum (N/delta) r = 0 mod 24, prod delta^r a square).
    Sorted by total |r|, then lexicographically by exponent vector.
    """
    scales = sorted(divisors(N) if scales is None else scales)
    if any(N % d for d in scales):
        raise ValueError("every scale must divide N")
    target = Fraction(weight) * 2
    if target.denominator != 1:
        raise ValueError("weight must be a multiple of 1/2")
    target = int(target)

    cusps = [c for c in cusp_classes(N) if not c.is_infinity]
    denoms = sorted({c.c for c in cusps})
    # integer matrix: order * 24 * lcm of denominators
    rows = [_order_row(c, N, scales) for c in denoms]
    scale_l = math.lcm(1, *(x.denominator for row in rows for x in row))
    M = np.array([[int(x * scale_l) for x in row] for row in rows], dtype=np.int64).reshape(len(rows), len(scales))

    rng = np.arange(-box, box + 1, dtype=np.int64)
    k = len(scales)
    found = []
    # enumerate all but the last exponent; the weight fixes the last one
    combos = list(itertools.product(rng.tolist(), repeat=k - 1))
    head = np.array(combos, dtype=np.int64).reshape(len(combos), k - 1)
    last = target - head.sum(axis=1)
    keep = np.abs(last) <= box
    R = np.concatenate([head[keep], last[keep, None]], axis=1)
    sd = R @ np.array(scales, dtype=np.int64)
    keep = sd % 24 == 0
    if residue is not None:
        keep &= (sd // 24) % 24 == residue % 24
    if pole_budget is not None:
        keep &= sd // 24 >= -pole_budget
    R = R[keep]
    if len(R):
        ords = R @ M.T
        keep = (ords > 0).all(axis=1) if strict else (ords >= 0).all(axis=1)
        if modular_function:
            keep &= (ords % scale_l == 0).all(axis=1)
            keep &= (R @ np.array([N // d for d in scales], dtype=np.int64)) % 24 == 0
        R = R[keep]
    for row in R:
        cand = EtaQuotientCandidate.make(N, dict(zip(scales, row.tolist())))
        if modular_function:
            prod = Fraction(1)
            for d, r in cand.exponents:
                prod *= Fraction(d) ** r
            if not _is_rational_square(prod):
                continue
        found.append(cand)
    found.sort(key=lambda c: (c.total_abs, [r for _, r in sorted(c.terms.items())]))
    return found


# ---------------------------------------------------------------------- compressed series
def compress(s: Series, step: int, residue: int) -> Series:
    """S(x) with s(q) = q^residue * S(q^step); s must be supported on residue + step*Z."""
    if not s.support_ok(step, [residue]):
        raise ValueError(f"series is not supported on {residue} mod {step}")
    prec = -(-(s.prec - residue) // step)
    terms = {(e - residue) // step: c for e, c in s.items()}
    return Series.from_dict(terms, prec, s.modulus)


def expand(S: Series, step: int, residue: int, prec: int | None = None) -> Series:
    """Inverse of :func:`compress`."""
    out = S.dilate(step).shift(residue)
    return out if prec is None else out.truncate(prec)


def compressed_eta(candidate: EtaQuotientCandidate, prec_x: int, modulus: int | None = None) -> tuple[Series, int]:
    """(S, residue) with the candidate's q-series equal to q^residue S(q^24), S known below x^prec_x.

    All scales must be multiples of 24.
    """
    terms = candidate.terms
    if any(d % 24 for d in terms):
        raise ValueError("compressed expansion needs every scale divisible by 24")
    L = int(candidate.leading)
    residue = L % 24
    shift = (L - residue) // 24
    pure = euler_product({d // 24: r for d, r in terms.items()}, prec_x - shift, modulus)
    return pure.shift(shift), residue


# ---------------------------------------------------------------------- solver
def solve_principal_part(
    generators: Sequence[Series],
    target: dict[int, object],
    prec: int,
    clear_constant: bool = True,
) -> Series:
    """Exact combination of ``generators`` whose terms below the constant equal ``target``.

    Gaussian elimination ordered by pole depth: every exponent e < 0 (and e = 0 with
    ``clear_constant``) must end up with coefficient target.get(e, 0).
    """
    if not generators:
        raise ConstructionFailure("no generators supplied")
    modulus = generators[0].modulus
    top = 1 if clear_constant else 0
    deepest = min(min(g.val for g in generators), min(target, default=0))
    # pivot table: leading exponent -> reduced generator with monic leading term
    pivots: dict[int, Series] = {}
    for g in sorted(generators, key=lambda s: s.val):
        g = g.truncate(prec)
        while not g.is_zero() and g.val < top:
            e = g.val
            if e in pivots:
                g = g - pivots[e] * g.coeff(e)
            else:
                pivots[e] = g.divide_exact(g.coeff(e)) if modulus is not None else g / g.coeff(e)
                break
    out = Series.zero(prec, modulus)
    for e in range(deepest, top):
        want = Fraction(target.get(e, 0)) if modulus is None else target.get(e, 0)
        have = out.coeff(e)
        delta = want - have
        if (modulus is None and delta != 0) or (modulus is not None and delta % modulus):
            if e not in pivots:
                raise ConstructionFailure(f"no generator reaches exponent {e}", -min(target, default=0))
            out = out + pivots[e] * delta
    # residual must vanish identically below the constant
    for e in range(deepest, top):
        got = out.coeff(e)
        want = target.get(e, 0)
        ok = got == want if modulus is None else (got - want) % modulus == 0
        if not ok:
            raise ConstructionFailure(f"residual at q^{e} is nonzero", -min(target, default=0))
    return out


def atkin_lehner_terms(terms: dict[int, int], Q: int, unit: int = 1) -> dict[int, int]:
    """Exponents of the W_Q image: scale unit*a goes to unit*a*Q/gcd(a,Q)^2."""
    out = {}
    for d, r in terms.items():
        if d % unit:
            raise ValueError(f"scale {d} is not a multiple of {unit}")
        a = d // unit
        g = math.gcd(a, Q)
        out[unit * a * Q // (g * g)] = r
    return out


def involution_scale(phi: Series, psi: Series, checks: int = 6) -> Fraction:
    """The value e with (phi - e)(psi - beta) constant, i.e. phi at the pole of psi.

    phi = x^-1 + O(1) and psi holomorphic at infinity with psi - psi(inf) = c x + ..., c != 0.
    Then e * psi / psi(inf) is the image of phi under the involution exchanging the two poles.
    """
    if phi.modulus is not None or psi.modulus is not None:
        raise ValueError("involution_scale needs exact series")
    prec = min(phi.prec, psi.prec + phi.val)
    if prec < checks + 2:
        raise ValueError("not enough terms to pin the relation")
    prod = (phi * psi).truncate(prec)
    beta = prod.coeff(-1)
    if beta != psi.coeff(0) or psi.coeff(1) == 0:
        raise ConstructionFailure("second function is not a Hauptmodul shifted to the other cusp")
    rest = prod - phi.truncate(prec) * beta
    e = rest.coeff(1) / psi.coeff(1)
    for k in range(2, checks + 2):
        if rest.coeff(k) != e * psi.coeff(k):
            raise ConstructionFailure(f"no bilinear relation between the two functions (x^{k})")
    return e


def hauptmodul_powers(phi: Series, depth: int) -> list[Series]:
    """[1, phi, ..., phi^depth], each known at least below x^1 when phi is known below x^depth."""
    if phi.prec < depth:
        raise PrecisionError(f"need phi below x^{depth}, have x^{phi.prec}")
    powers = [Series.monomial(0, phi.prec + 1, 1, phi.modulus)]
    for _ in range(depth):
        powers.append(powers[-1] * phi)
    return powers


def hauptmodul_polynomial(phi: Series, principal: dict[int, object], powers: list[Series] | None = None) -> dict[int, object]:
    """Coefficients {k: c_k} of the polynomial P with P(phi) = principal + O(1), P(0) = 0.

    ``phi`` must be x^-1 + O(1); the deepest pole is peeled first. ``powers`` may carry a
    precomputed table from :func:`hauptmodul_powers` covering the depth.
    """
    if phi.val != -1 or phi.coeff(-1) != 1:
        raise ValueError("expected x^-1 + O(1)")
    depth = -min(principal, default=0)
    if powers is None or len(powers) <= depth:
        powers = hauptmodul_powers(phi, depth)
    coeffs: dict[int, object] = {}
    residual = Series.from_dict({e: c for e, c in principal.items() if e < 0}, 0, phi.modulus)
    for k in range(depth, 0, -1):
        c = residual.coeff(-k)
        if c:
            coeffs[k] = c
            residual = residual - powers[k].truncate(0) * c
    return coeffs


def evaluate_polynomial(coeffs: dict[int, object], f: Series, prec: int) -> Series:
    """sum c_k f^k by Horner's rule, known below ``prec``."""
    out = Series.zero(prec, f.modulus)
    for k in range(max(coeffs, default=0), -1, -1):
        out = (out * f).truncate(prec) + coeffs.get(k, 0)
    return out


def fixture_json(candidates: Iterable[EtaQuotientCandidate], ladder: EtaQuotientCandidate | None = None) -> dict:
    cands = list(candidates)
    scales = sorted({d for c in cands for d, _ in c.exponents} | ({d for d, _ in ladder.exponents} if ladder else set()))
    return {
        "schema": ETA_SCHEMA,
        "scales": scales,
        "candidates": [c.to_json() for c in cands],
        "ladder": ladder.to_json() if ladder else None,
    }


def dump_fixture(path, candidates, ladder=None) -> None:
    with open(path, "w") as fh:
        json.dump(fixture_json(candidates, ladder), fh, indent=1, sort_keys=True)
