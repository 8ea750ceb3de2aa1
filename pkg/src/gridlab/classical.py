"""Builders for the classical q-series used by the grid constructions.

Every builder takes the output precision ``prec`` and an optional ``modulus``;
with a modulus the series is produced directly in Z/modulus (only integral
intermediate steps are used, apart from the Eisenstein route to Delta, which
is skipped when 1728 is not a unit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import numpy as np

from .qlaurent import Series


def _empty(n: int, modulus: int | None) -> np.ndarray:
    if modulus is None:
        arr = np.empty(n, dtype=object)
        arr[:] = 0
        return arr
    return np.zeros(n, dtype=np.int64)


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n (B_1 = -1/2 convention is irrelevant here)."""
    if n == 1:
        return Fraction(-1, 2)
    if n % 2:
        return Fraction(0)
    b = [Fraction(0)] * (n + 1)
    b[0] = Fraction(1)
    for m in range(1, n + 1):
        b[m] = -sum(math.comb(m + 1, k) * b[k] for k in range(m)) / (m + 1)
    return b[n]


def theta(prec: int, modulus: int | None = None) -> Series:
    """sum_{n in Z} q^{n^2}."""
    return _theta(prec, modulus, alternating=False)


def theta1(prec: int, modulus: int | None = None) -> Series:
    """sum_{n in Z} (-1)^n q^{n^2}."""
    return _theta(prec, modulus, alternating=True)


def _theta(prec: int, modulus, alternating: bool) -> Series:
    if prec < 1:
        raise ValueError("theta needs prec >= 1")
    arr = _empty(prec, modulus)
    arr[0] = 1
    n = 1
    while n * n < prec:
        arr[n * n] = -2 if (alternating and n % 2) else 2
        n += 1
    return Series(arr, 0, prec, modulus=modulus)


@lru_cache(maxsize=16)
def _sigma_table(k: int, n: int, modulus: int | None) -> np.ndarray:
    """sigma_k(m) for 0 <= m < n (entry 0 unused)."""
    s = _empty(n, modulus)
    for d in range(1, n):
        if modulus is None:
            s[d::d] += d**k
        else:
            s[d::d] = (s[d::d] + pow(d, k, modulus)) % modulus
    return s


@lru_cache(maxsize=32)
def eisenstein(k: int, prec: int, modulus: int | None = None) -> Series:
    """E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n for even k >= 4."""
    if k < 4 or k % 2:
        raise ValueError("eisenstein: k must be even and >= 4")
    if prec < 1:
        raise ValueError("eisenstein needs prec >= 1")
    c = -Fraction(2 * k) / bernoulli(k)
    if c.denominator != 1:
        raise ValueError(f"E_{k} has non-integral normalization {c}")
    c = int(c)
    sig = _sigma_table(k - 1, prec, modulus)
    arr = sig * c if modulus is None else (sig * (c % modulus)) % modulus
    arr = arr.copy()
    arr[0] = 1
    return Series(arr, 0, prec, modulus=modulus)


def e10(prec: int, modulus: int | None = None) -> Series:
    """E_10 := E_4 * E_6."""
    return eisenstein(4, prec, modulus) * eisenstein(6, prec, modulus)


# ---------------------------------------------------------------------- eta products
@lru_cache(maxsize=32)
def _euler_power(r: int, prec: int, modulus: int | None) -> Series:
    """prod_{n>=1} (1 - q^n)^r to precision prec."""
    if r == 0:
        return Series.monomial(0, prec, 1, modulus)
    if r < 0:
        return _euler_power(-r, prec, modulus).invert()
    if r == 1:
        arr = _empty(prec, modulus)
        k = 0
        while True:
            hit = False
            for kk in ((k, -k) if k else (0,)):
                e = kk * (3 * kk - 1) // 2
                if e < prec:
                    c = -1 if kk % 2 else 1
                    arr[e] = c if modulus is None else c % modulus
                    hit = True
            if not hit:
                break
            k += 1
        return Series(arr, 0, prec, modulus=modulus)
    if r == 3:
        # Jacobi: sum (-1)^n (2n+1) q^{n(n+1)/2}
        arr = _empty(prec, modulus)
        n = 0
        while n * (n + 1) // 2 < prec:
            c = (-1) ** n * (2 * n + 1)
            arr[n * (n + 1) // 2] = c if modulus is None else c % modulus
            n += 1
        return Series(arr, 0, prec, modulus=modulus)
    out = _euler_power(1, prec, modulus) ** (r % 3)
    if r >= 3:
        out = out * _euler_power(3, prec, modulus) ** (r // 3)
    return out


@dataclass(frozen=True)
class EtaPowerProduct:
    """prod_delta eta(delta*tau)^{r_delta}, with integral leading power q^L."""

    terms: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        terms = {int(d): int(r) for d, r in dict(self.terms).items() if r}
        if any(d < 1 for d in terms):
            raise ValueError("eta scales must be positive")
        if sum(d * r for d, r in terms.items()) % 24:
            raise ValueError(f"leading power of {terms} is not integral")
        object.__setattr__(self, "terms", terms)

    @property
    def leading(self) -> int:
        return sum(d * r for d, r in self.terms.items()) // 24

    @property
    def weight(self) -> Fraction:
        return Fraction(sum(self.terms.values()), 2)

    def series(self, prec: int, modulus: int | None = None) -> Series:
        return eta_power_product(self.terms, prec, modulus)


def euler_product(terms: Mapping[int, int], prec: int, modulus: int | None = None) -> Series:
    """prod_delta prod_{n>=1} (1 - q^{delta n})^{r_delta} (no leading power), known below ``prec``."""
    terms = {int(d): int(r) for d, r in dict(terms).items() if r}
    if prec <= 0:
        return Series.zero(prec, modulus)
    pos = Series.monomial(0, prec, 1, modulus)
    neg = None
    for d, r in sorted(terms.items()):
        f = _euler_power(abs(r), -(-prec // d), modulus).dilate(d, prec)
        if r > 0:
            pos = pos * f
        else:
            neg = f if neg is None else neg * f
    if neg is not None:
        pos = pos * neg.invert()
    return pos


def eta_power_product(terms: Mapping[int, int], prec: int, modulus: int | None = None) -> Series:
    """q^L prod_delta prod_n (1 - q^{delta n})^{r_delta}, known below ``prec``."""
    terms = {int(d): int(r) for d, r in dict(terms).items() if r}
    total = sum(d * r for d, r in terms.items())
    if total % 24:
        raise ValueError(f"sum delta*r = {total} is not divisible by 24")
    lead = total // 24
    if prec - lead <= 0:
        return Series.zero(prec, modulus)
    return euler_product(terms, prec - lead, modulus).shift(lead)


@lru_cache(maxsize=32)
def delta(prec: int, modulus: int | None = None, method: str | None = None) -> Series:
    """Delta = (E4^3 - E6^2)/1728; the eta product is used when 1728 is not a unit."""
    if method is None:
        method = "eisenstein" if modulus is None or math.gcd(1728, modulus) == 1 else "eta"
    if method == "eta":
        return eta_power_product({1: 24}, prec, modulus)
    if method != "eisenstein":
        raise ValueError(f"unknown method {method!r}")
    e4, e6 = eisenstein(4, prec, modulus), eisenstein(6, prec, modulus)
    return ((e4 ** 3) - (e6 ** 2)) / 1728


@lru_cache(maxsize=32)
def jfun(prec: int, modulus: int | None = None) -> Series:
    """j = E4^3 / Delta = q^-1 + 744 + 196884 q + ..."""
    e4 = eisenstein(4, prec + 2, modulus)
    return ((e4 ** 3) / delta(prec + 2, modulus)).truncate(prec)


def j4(prec: int, modulus: int | None = None) -> Series:
    """j(4 tau)."""
    return jfun(-(-prec // 4), modulus).dilate(4, prec)


# ---------------------------------------------------------------------- seeds
def zagier_g_seed(prec: int, modulus: int | None = None) -> Series:
    """g = theta_1(tau) E_4(4 tau) / eta(4 tau)^6 = q^-1 - 2 + 248 q^3 - ..."""
    inv_eta = eta_power_product({4: -6}, prec, modulus)
    e4_4 = eisenstein(4, -(-(prec + 1) // 4), modulus).dilate(4, prec + 1)
    return (theta1(prec + 1, modulus) * e4_4 * inv_eta).truncate(prec)


def rc_bracket(f: Series, k_f, g: Series, k_g) -> Series:
    """k_f f Dg - k_g g Df (first Rankin-Cohen bracket up to scale)."""
    return f * g.qderive() * k_f - g * f.qderive() * k_g


def mock_theta_f(prec: int, modulus: int | None = None) -> Series:
    """Ramanujan's f(q) = 1 + sum_{n>=1} q^{n^2} / ((1+q)^2 ... (1+q^n)^2)."""
    if prec < 1:
        raise ValueError("mock_theta_f needs prec >= 1")
    total = _empty(prec, modulus)
    total[0] = 1
    prod = _empty(prec, modulus)  # 1 / prod_{k<=n} (1+q^k)^2, relative to q^{n^2}
    prod[0] = 1
    n = 1
    while n * n < prec:
        rel = prec - n * n
        prod = prod[:rel].copy()
        for _ in range(2):
            # divide by (1 + q^n) blockwise: c[e] = a[e] - c[e-n]
            for start in range(n, rel, n):
                stop = min(start + n, rel)
                prod[start:stop] -= prod[start - n : stop - n]
                if modulus is not None:
                    prod[start:stop] %= modulus
        total[n * n :] += prod
        if modulus is not None:
            total %= modulus
        n += 1
    return Series(total, 0, prec, modulus=modulus)
