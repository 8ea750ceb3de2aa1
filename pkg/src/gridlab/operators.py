"""U, V, quadratic twists and half-integral weight Hecke operators on q-series."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .qlaurent import Series


def kronecker(a: int, b: int) -> int:
    """Kronecker symbol (a/b) for arbitrary integers a, b."""
    a, b = int(a), int(b)
    if b == 0:
        return 1 if abs(a) == 1 else 0
    if a % 2 == 0 and b % 2 == 0:
        return 0
    result = 1
    if b < 0:
        b = -b
        if a < 0:
            result = -result
    twos = 0
    while b % 2 == 0:
        b //= 2
        twos += 1
    if twos % 2 and a % 8 in (3, 5):
        result = -result
    a %= b
    while a:
        while a % 2 == 0:
            a //= 2
            if b % 8 in (3, 5):
                result = -result
        a, b = b, a
        if a % 4 == 3 and b % 4 == 3:
            result = -result
        a %= b
    return result if b == 1 else 0


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, math.isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def op_U(a: Series, m: int) -> Series:
    """sum c(n) q^n -> sum c(mn) q^n; exponents with m | e contribute, signs included."""
    m = int(m)
    if m < 1:
        raise ValueError("U(m) needs m >= 1")
    prec = -(-a.prec // m)
    if m == 1:
        return a
    if a.is_zero():
        return Series.zero(prec, a.modulus)
    lo = -(-a.val // m)
    if lo >= prec:
        return Series.zero(prec, a.modulus)
    start = m * lo - a.val
    arr = a.numerators()[start::m][: prec - lo]
    return Series(arr, lo, prec, a.den, a.modulus)


def op_V(a: Series, m: int, prec: int | None = None) -> Series:
    """sum c(n) q^n -> sum c(n) q^{mn}."""
    return a.dilate(m, prec)


def op_twist(a: Series, t: int, k: int) -> Series:
    """Multiply the coefficient at n by the Kronecker symbol ((-1)^k n / t), t odd positive."""
    t = int(t)
    if t < 1 or t % 2 == 0:
        raise ValueError("twist modulus must be odd and positive")
    if t == 1 or a.is_zero():
        return a
    sign = -1 if k % 2 else 1
    pattern = np.array([kronecker(sign * r, t) for r in range(t)], dtype=np.int64)
    idx = (np.arange(a.val, a.val + len(a.numerators()), dtype=np.int64)) % t
    chi = pattern[idx]
    if a.modulus is None:
        return Series(a.numerators() * chi.astype(object), a.val, a.prec, a.den)
    return Series((a.numerators() * chi) % a.modulus, a.val, a.prec, modulus=a.modulus)


@dataclass(frozen=True)
class HeckeSpec:
    """T_s(p^{2n}) in weight k + 1/2; ``normalized`` means the p*T(p^2) convention."""

    p: int
    n: int = 1
    k: int = 1
    s: int = 1
    normalized: bool = False
    level: int | None = None

    def __post_init__(self):
        if self.k not in (0, 1):
            raise ValueError("weight class k must be 0 (weight 1/2) or 1 (weight 3/2)")
        if self.k == 0 and not self.normalized:
            raise ValueError("weight 1/2 Hecke operators are always used normalized")
        if not is_prime(self.p) or self.p == 2:
            raise ValueError(f"p = {self.p} must be an odd prime")
        if self.n < 0:
            raise ValueError("power n must be >= 0")
        if self.level is not None and self.level % self.p == 0:
            raise ValueError(f"p = {self.p} divides the level {self.level}")

    @property
    def recursion_multiplier(self) -> int:
        """c in T(p^{2m}) = T(p^{2m-2}) T(p^2) - c T(p^{2m-4})."""
        return self.p ** (2 * self.k + 1) if self.normalized else self.p ** (2 * self.k - 1)

    def with_n(self, n: int) -> "HeckeSpec":
        return HeckeSpec(self.p, n, self.k, self.s, self.normalized, self.level)


def zagier_spec(p: int, n: int = 1, weight_class: int = 1) -> HeckeSpec:
    """Trivial character, level 4 (normalized when weight 1/2)."""
    return HeckeSpec(p, n, weight_class, 1, weight_class == 0, 4)


def fo_spec(p: int, n: int = 1, weight_class: int = 1) -> HeckeSpec:
    """Nebentypus chi_12, level 144 (normalized when weight 1/2)."""
    return HeckeSpec(p, n, weight_class, 12, weight_class == 0, 144)


def hecke_T_p2(a: Series, spec: HeckeSpec) -> Series:
    """One application of T_s(p^2) (the ``n`` field of ``spec`` is ignored)."""
    p, k = spec.p, spec.k
    p2 = p * p
    eps = kronecker(spec.s, p)
    out_prec = min(-(-a.prec // p2), a.prec, p2 * a.prec)
    u = op_U(a, p2)
    tw = op_twist(a, p, k).truncate(out_prec)
    v = op_V(a, p2, out_prec)
    if spec.normalized:
        cu, ct, cv = p, p**k * eps, p ** (2 * k)
    else:
        cu, ct, cv = 1, Fraction(p) ** (k - 1) * eps, Fraction(p) ** (2 * k - 1)
    out = u.scale(cu).truncate(out_prec)
    if ct:
        out = out + tw.scale(ct)
    return out + v.scale(cv)


def hecke_images(a: Series, spec: HeckeSpec, nmax: int | None = None) -> list[Series]:
    """[a|T(p^0), a|T(p^2), ..., a|T(p^{2 nmax})] via the three-term recursion."""
    nmax = spec.n if nmax is None else nmax
    c = spec.recursion_multiplier
    images = [a]
    prev = None
    for _ in range(nmax):
        nxt = hecke_T_p2(images[-1], spec)
        if prev is not None:
            nxt = nxt - prev.scale(c)
        prev = images[-1]
        images.append(nxt)
    return images


def hecke_T_p2n(a: Series, spec: HeckeSpec) -> Series:
    """a | T_s(p^{2n}); T(p^0) is the identity."""
    return hecke_images(a, spec)[-1]


def hecke_composite(a: Series, m: int, k: int = 1, s: int = 1, level: int = 4, normalized: bool | None = None) -> Series:
    """a | T(m^2) as the product of T(p^{2e}) over p^e || m."""
    m = int(m)
    if m < 1:
        raise ValueError("m must be positive")
    if math.gcd(m, level) != 1:
        raise ValueError(f"gcd({m}, {level}) != 1: Hecke operator undefined at primes dividing the level")
    if normalized is None:
        normalized = k == 0
    out = a
    for p, e in sorted(factorize(m).items()):
        out = hecke_T_p2n(out, HeckeSpec(p, e, k, s, normalized, level))
    return out


def hecke_output_prec(prec: int, p: int, n: int) -> int:
    """Guaranteed precision of a|T(p^{2n}) for an input known below ``prec`` (> 0)."""
    for _ in range(n):
        prec = -(-prec // (p * p))
    return prec


def required_input_prec(out_prec: int, p: int, n: int) -> int:
    """Smallest input precision whose T(p^{2n}) image is known below ``out_prec``."""
    return (out_prec - 1) * (p * p) ** n + 1 if out_prec > 0 else out_prec
