"""Truncated Laurent series in q with exact coefficients.

Two coefficient rings are supported behind one type:

* exact mode: coefficients are rationals, stored as integer numerators over a
  common positive denominator (``modulus is None``);
* residue mode: coefficients live in Z/MZ (``modulus = M``), used for long
  Hecke chains where only a p-adic congruence is asked for.

Storage is dense from the first nonzero exponent ``val`` up to ``prec - 1``.
The coefficient at an exponent ``e >= prec`` is unknown and reading it raises
:class:`PrecisionError`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

import numpy as np

try:
    import gmpy2

    def _bigmul(x: int, y: int) -> int:
        return int(gmpy2.mpz(x) * gmpy2.mpz(y))

except ImportError:  # pragma: no cover
    def _bigmul(x: int, y: int) -> int:
        return x * y


SCHEMA = "gridlab.series.v1"

# residues must satisfy M**2 < 2**63 so that elementwise products fit in int64
MAX_MODULUS = 2**31

_SCHOOLBOOK_LIMIT = 24


class PrecisionError(ValueError):
    """Raised when a coefficient beyond the known precision is requested."""


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"not an exact rational: {c!r}")


class Series:
    """Immutable truncated Laurent series ``sum c_e q^e + O(q^prec)``."""

    __slots__ = ("val", "prec", "_c", "den", "modulus")

    def __init__(self, coeffs, val: int, prec: int, den: int = 1, modulus: int | None = None):
        # low-level constructor; normalizes leading zeros and common factors
        val, prec = int(val), int(prec)
        if modulus is None:
            arr = np.asarray(coeffs, dtype=object) if not isinstance(coeffs, np.ndarray) or coeffs.dtype != object else coeffs
        else:
            modulus = int(modulus)
            if not 1 < modulus <= MAX_MODULUS:
                raise ValueError(f"modulus must be in (1, 2**31], got {modulus}")
            arr = np.asarray(coeffs, dtype=np.int64) % modulus if not (isinstance(coeffs, np.ndarray) and coeffs.dtype == np.int64) else coeffs % modulus
            den = 1
        if val + len(arr) > prec:
            arr = arr[: max(prec - val, 0)]
        if val + len(arr) < prec:
            pad = np.zeros(prec - val - len(arr), dtype=arr.dtype)
            arr = np.concatenate([arr, pad]) if len(arr) else pad
        nz = np.flatnonzero(arr)
        if len(nz) == 0:
            arr = arr[:0]
            val = prec
        elif nz[0] > 0:
            arr = arr[nz[0]:]
            val += int(nz[0])
        if modulus is None and den != 1:
            if den <= 0:
                raise ValueError("denominator must be positive")
            g = math.gcd(den, *arr.tolist()) if len(arr) else den
            if g > 1:
                arr = arr // g
                den //= g
        arr.setflags(write=False)
        self._c = arr
        self.val = val
        self.prec = prec
        self.den = int(den)
        self.modulus = modulus

    # ------------------------------------------------------------------ builders
    @classmethod
    def from_dict(cls, coeffs: Mapping[int, object], prec: int, modulus: int | None = None) -> "Series":
        """Series with the given ``{exponent: coefficient}`` terms, known below ``prec``."""
        items = {int(e): c for e, c in coeffs.items() if int(e) < prec}
        if any(e >= prec for e in coeffs):
            raise PrecisionError("coefficient stored at an exponent >= prec")
        if not items:
            return cls([], prec, prec, modulus=modulus)
        lo = min(items)
        if modulus is not None:
            arr = np.zeros(prec - lo, dtype=np.int64)
            for e, c in items.items():
                arr[e - lo] = _residue(c, modulus)
            return cls(arr, lo, prec, modulus=modulus)
        fr = {e: _as_fraction(c) for e, c in items.items()}
        den = math.lcm(*(c.denominator for c in fr.values()))
        arr = np.zeros(prec - lo, dtype=object)
        for e, c in fr.items():
            arr[e - lo] = c.numerator * (den // c.denominator)
        return cls(arr, lo, prec, den=den)

    @classmethod
    def from_list(cls, coeffs: Iterable, val: int, prec: int | None = None, modulus: int | None = None) -> "Series":
        """Series whose coefficients start at exponent ``val``; rational entries allowed."""
        coeffs = list(coeffs)
        if prec is None:
            prec = val + len(coeffs)
        if modulus is None and any(isinstance(c, Fraction) or isinstance(c, str) for c in coeffs):
            return cls.from_dict({val + i: c for i, c in enumerate(coeffs) if c}, prec)
        if modulus is None:
            arr = np.empty(len(coeffs), dtype=object)
            arr[:] = [int(c) for c in coeffs]
        else:
            arr = np.array([_residue(c, modulus) for c in coeffs], dtype=np.int64)
        return cls(arr, val, prec, modulus=modulus)

    @classmethod
    def zero(cls, prec: int, modulus: int | None = None) -> "Series":
        return cls([], prec, prec, modulus=modulus)

    @classmethod
    def monomial(cls, e: int, prec: int, c=1, modulus: int | None = None) -> "Series":
        if e >= prec:
            return cls.zero(prec, modulus)
        return cls.from_dict({e: c}, prec, modulus)

    def _new(self, arr, val, prec, den=1) -> "Series":
        return Series(arr, val, prec, den, self.modulus)

    # ------------------------------------------------------------------ access
    @property
    def is_exact(self) -> bool:
        return self.modulus is None

    def is_zero(self) -> bool:
        return len(self._c) == 0

    @property
    def minexp(self) -> int:
        """Smallest exponent with a nonzero coefficient (``prec`` for the zero series)."""
        return self.val

    def coeff(self, e: int):
        """Coefficient of ``q^e``: a Fraction in exact mode, an int residue otherwise."""
        e = int(e)
        if e >= self.prec:
            raise PrecisionError(f"coefficient of q^{e} unknown (prec {self.prec})")
        if e < self.val:
            c = 0
        else:
            c = int(self._c[e - self.val])
        if self.modulus is None:
            return Fraction(c, self.den)
        return c

    __getitem__ = coeff

    def items(self) -> Iterator[tuple[int, object]]:
        """Nonzero ``(exponent, coefficient)`` pairs in ascending order."""
        for i in np.flatnonzero(self._c):
            yield self.val + int(i), self.coeff(self.val + int(i))

    def to_dict(self) -> dict[int, object]:
        return dict(self.items())

    def numerators(self) -> np.ndarray:
        """Raw stored numerators (exact) or residues, starting at ``val``."""
        return self._c

    def coeff_list(self, start: int, stop: int) -> list:
        """Coefficients for exponents ``start <= e < stop``."""
        return [self.coeff(e) for e in range(start, stop)]

    def principal_part(self) -> list[tuple[int, object]]:
        """Nonzero terms with negative exponent."""
        if self.prec < 0:
            raise PrecisionError("principal part not fully known (prec < 0)")
        return [(e, c) for e, c in self.items() if e < 0]

    def is_integral(self) -> bool:
        return self.modulus is not None or self.den == 1

    def support_ok(self, modulus: int, residues: Iterable[int]) -> bool:
        """True if every nonzero exponent lies in one of ``residues`` mod ``modulus``."""
        allowed = {r % modulus for r in residues}
        idx = np.flatnonzero(self._c) + self.val
        return all(int(r) in allowed for r in np.unique(idx % modulus))

    def __repr__(self) -> str:
        terms = []
        for e, c in list(self.items())[:8]:
            terms.append(f"{c}*q^{e}")
        body = " + ".join(terms) if terms else "0"
        ring = "" if self.modulus is None else f" mod {self.modulus}"
        return f"Series({body} + O(q^{self.prec}){ring})"

    # ------------------------------------------------------------------ ring ops
    def _coerce(self, other: "Series") -> tuple["Series", "Series"]:
        if self.modulus == other.modulus:
            return self, other
        if self.modulus is None:
            return self.reduce_mod(other.modulus), other
        if other.modulus is None:
            return self, other.reduce_mod(self.modulus)
        raise ValueError(f"incompatible moduli {self.modulus} and {other.modulus}")

    def _window(self, lo: int, hi: int) -> np.ndarray:
        """Stored numerators for exponents lo <= e < hi (zeros outside storage)."""
        n = hi - lo
        out = np.zeros(max(n, 0), dtype=self._c.dtype)
        if n <= 0:
            return out
        a, b = max(lo, self.val), min(hi, self.val + len(self._c))
        if a < b:
            out[a - lo : b - lo] = self._c[a - self.val : b - self.val]
        return out

    def __add__(self, other):
        if not isinstance(other, Series):
            if self.prec <= 0:
                return self
            other = Series.monomial(0, self.prec, other, self.modulus)
        a, b = self._coerce(other)
        prec = min(a.prec, b.prec)
        lo = min(a.val, b.val, prec)
        if a.modulus is None:
            den = a.den * b.den // math.gcd(a.den, b.den)
            arr = a._window(lo, prec) * (den // a.den) + b._window(lo, prec) * (den // b.den)
            return Series(arr, lo, prec, den)
        return Series((a._window(lo, prec) + b._window(lo, prec)) % a.modulus, lo, prec, modulus=a.modulus)

    __radd__ = __add__

    def __neg__(self) -> "Series":
        if self.modulus is None:
            return self._new(-self._c, self.val, self.prec, self.den)
        return self._new((-self._c) % self.modulus, self.val, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Series":
        """Multiply by an exact scalar."""
        if self.modulus is not None:
            r = _residue(c, self.modulus)
            return self._new((self._c * r) % self.modulus, self.val, self.prec)
        c = _as_fraction(c)
        if c == 0:
            return Series.zero(self.prec)
        return self._new(self._c * c.numerator, self.val, self.prec, self.den * c.denominator)

    def __mul__(self, other):
        if isinstance(other, Series):
            return mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Series):
            return mul(self, other.invert())
        if self.modulus is None:
            return self.scale(1 / _as_fraction(other))
        return self.scale(pow(_residue(other, self.modulus), -1, self.modulus))

    def __pow__(self, n: int) -> "Series":
        n = int(n)
        if n < 0:
            return self.invert() ** (-n)
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else mul(result, base)
            n >>= 1
            if n:
                base = mul(base, base)
        if result is None:
            rel = self.prec - self.val
            return Series.monomial(0, rel, 1, self.modulus)
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return (
            self.prec == other.prec
            and self.modulus == other.modulus
            and self.val == other.val
            and self.den == other.den
            and len(self._c) == len(other._c)
            and bool(np.all(self._c == other._c))
        )

    __hash__ = None

    def agrees_with(self, other: "Series", upto: int | None = None) -> bool:
        """True if both series agree on every exponent known to both (and below ``upto``)."""
        prec = min(self.prec, other.prec)
        if upto is not None:
            prec = min(prec, upto)
        return (self.truncate(prec) - other.truncate(prec)).is_zero()

    # ------------------------------------------------------------------ unary ops
    def truncate(self, prec: int) -> "Series":
        """Forget coefficients at exponents >= ``prec`` (never raises precision)."""
        prec = int(prec)
        if prec >= self.prec:
            return self
        n = max(prec - self.val, 0)
        return self._new(self._c[:n], min(self.val, prec), prec, self.den)

    def shift(self, k: int) -> "Series":
        """Multiply by ``q^k``."""
        return self._new(self._c, self.val + k, self.prec + k, self.den)

    def dilate(self, m: int, prec: int | None = None) -> "Series":
        """``q -> q^m`` (the V(m) operator); optional cap on the output precision."""
        m = int(m)
        if m < 1:
            raise ValueError("dilation factor must be >= 1")
        out_prec = m * self.prec if prec is None else min(m * self.prec, int(prec))
        if m == 1:
            return self.truncate(out_prec)
        if self.is_zero():
            return Series.zero(out_prec, self.modulus)
        val = m * self.val
        if out_prec <= val:
            return Series.zero(out_prec, self.modulus)
        n = out_prec - val
        arr = np.zeros(n, dtype=self._c.dtype)
        k = (n + m - 1) // m
        arr[::m] = self._c[:k]
        return self._new(arr, val, out_prec, self.den)

    def qderive(self) -> "Series":
        """``q d/dq``: the coefficient at ``e`` becomes ``e * c_e``."""
        exps = np.arange(self.val, self.val + len(self._c), dtype=np.int64)
        if self.modulus is None:
            arr = self._c * exps.astype(object)
            return self._new(arr, self.val, self.prec, self.den)
        return self._new((self._c * (exps % self.modulus)) % self.modulus, self.val, self.prec)

    def reduce_mod(self, modulus: int) -> "Series":
        """Image in Z/modulus; the denominator must be a unit there."""
        if self.modulus is not None:
            if self.modulus % modulus:
                raise ValueError("can only reduce to a divisor of the current modulus")
            return Series(self._c % modulus, self.val, self.prec, modulus=modulus)
        inv = pow(self.den, -1, modulus)
        arr = np.array([(x * inv) % modulus for x in self._c.tolist()], dtype=np.int64)
        return Series(arr, self.val, self.prec, modulus=modulus)

    def divide_exact(self, c) -> "Series":
        """Divide by an integer that may share factors with the modulus.

        In residue mode with g = gcd(c, M), every residue must be divisible by g and the
        quotient lives in Z/(M/g).
        """
        if self.modulus is None:
            return self.scale(1 / _as_fraction(c))
        c = int(c) % self.modulus
        g = math.gcd(c, self.modulus)
        if g == 1:
            return self.scale(pow(c, -1, self.modulus))
        if np.any(self._c % g):
            raise ArithmeticError(f"coefficients not divisible by {g} mod {self.modulus}")
        m = self.modulus // g
        if m == 1:
            raise ArithmeticError("division leaves no residue information")
        inv = pow(c // g, -1, m)
        return Series(((self._c // g) % m) * inv % m, self.val, self.prec, modulus=m)

    def lift(self) -> "Series":
        """Exact series with the least nonnegative residues as coefficients."""
        if self.modulus is None:
            return self
        arr = np.empty(len(self._c), dtype=object)
        arr[:] = self._c.tolist()
        return Series(arr, self.val, self.prec)

    def integer_coeffs(self) -> np.ndarray:
        """Numerators as Python ints; requires an integral exact series."""
        if self.modulus is not None or self.den != 1:
            raise ValueError("series is not an exact integral series")
        return self._c

    def invert(self) -> "Series":
        """Multiplicative inverse; the leading coefficient must be a unit."""
        if self.is_zero():
            raise ZeroDivisionError("cannot invert a series with no known nonzero coefficient")
        v = self.val
        rel = self.prec - v
        lead = self.coeff(v)
        if self.modulus is not None:
            try:
                inv_lead = pow(int(lead), -1, self.modulus)
            except ValueError:
                raise ZeroDivisionError(f"leading coefficient {lead} is not a unit mod {self.modulus}") from None
        else:
            inv_lead = 1 / lead
        unit = self.shift(-v).scale(inv_lead)  # 1 + O(q), relative precision rel
        b = Series.monomial(0, 1, 1, self.modulus)
        k = 1
        while k < rel:
            k = min(2 * k, rel)
            # the iterate is an exact polynomial; re-declare it known up to k
            bk = b._as_polynomial(k)
            e = Series.monomial(0, k, 1, self.modulus) - mul(unit.truncate(k), bk)
            b = bk + mul(bk, e)
        return b.scale(inv_lead).shift(-v)

    def _as_polynomial(self, prec: int) -> "Series":
        return self._new(self._c, self.val, max(prec, self.prec), self.den)

    # ------------------------------------------------------------------ serialization
    def to_json(self) -> dict:
        out = {
            "schema": SCHEMA,
            "prec": self.prec,
            "coeffs": [[e, _fmt(c)] for e, c in self.items()],
        }
        if self.modulus is not None:
            out["modulus"] = self.modulus
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "Series":
        if obj.get("schema") != SCHEMA:
            raise ValueError(f"unexpected schema {obj.get('schema')!r}")
        modulus = obj.get("modulus")
        terms = {int(e): (int(c) if modulus is not None else Fraction(c)) for e, c in obj["coeffs"]}
        return cls.from_dict(terms, int(obj["prec"]), modulus)


def _fmt(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return str(int(c))


def _residue(c, modulus: int) -> int:
    if isinstance(c, (int, np.integer)):
        return int(c) % modulus
    c = _as_fraction(c)
    return c.numerator * pow(c.denominator, -1, modulus) % modulus


# ---------------------------------------------------------------------- arithmetic
def add(a: Series, b: Series) -> Series:
    return a + b


def invert(a: Series) -> Series:
    return a.invert()


def dilate(a: Series, m: int) -> Series:
    return a.dilate(m)


def qderive(a: Series) -> Series:
    return a.qderive()


def principal_part(a: Series) -> list[tuple[int, object]]:
    return a.principal_part()


def mul(a: Series, b: Series) -> Series:
    """Cauchy product; precision ``min(prec_a + minexp_b, prec_b + minexp_a)``."""
    a, b = a._coerce(b)
    prec = min(a.prec + b.val, b.prec + a.val)
    val = a.val + b.val
    if a.is_zero() or b.is_zero() or prec <= val:
        return Series.zero(prec, a.modulus)
    n = prec - val
    x = a._c[:n]
    y = b._c[:n]
    if a.modulus is None:
        z = _mul_exact(x.tolist(), y.tolist(), n)
        arr = np.empty(len(z), dtype=object)
        arr[:] = z
        return Series(arr, val, prec, a.den * b.den)
    z = _mul_mod(x, y, n, a.modulus)
    return Series(z, val, prec, modulus=a.modulus)


def _schoolbook(x: list[int], y: list[int], n: int) -> list[int]:
    out = [0] * min(n, len(x) + len(y) - 1)
    for i, xi in enumerate(x):
        if xi:
            for j in range(min(len(y), n - i)):
                out[i + j] += xi * y[j]
    return out


def _mul_exact(x: list[int], y: list[int], n: int) -> list[int]:
    if min(len(x), len(y)) <= _SCHOOLBOOK_LIMIT:
        return _schoolbook(x, y, n)
    bx = max(abs(v) for v in x).bit_length()
    by = max(abs(v) for v in y).bit_length()
    if bx == 0 or by == 0:
        return [0] * min(n, len(x) + len(y) - 1)
    bits = bx + by + min(len(x), len(y)).bit_length() + 2
    nb = (bits + 7) // 8
    X = _pack_signed(x, nb)
    Y = _pack_signed(y, nb)
    L = min(n, len(x) + len(y) - 1)
    Z = _bigmul(X, Y)
    # bias every slot by 2^(8nb-1) so that the base-2^(8nb) digits are nonnegative
    total = len(x) + len(y) - 1
    half = 1 << (8 * nb - 1)
    bias = int.from_bytes((b"\x00" * (nb - 1) + b"\x80") * total, "little")
    buf = (Z + bias).to_bytes(total * nb + 1, "little")
    fb = int.from_bytes
    return [fb(buf[i * nb : (i + 1) * nb], "little") - half for i in range(L)]


def _pack_signed(x: list[int], nb: int) -> int:
    pos = b"".join((v if v > 0 else 0).to_bytes(nb, "little") for v in x)
    neg = b"".join((-v if v < 0 else 0).to_bytes(nb, "little") for v in x)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _mul_mod(x: np.ndarray, y: np.ndarray, n: int, modulus: int) -> np.ndarray:
    L = min(n, len(x) + len(y) - 1)
    if min(len(x), len(y)) <= _SCHOOLBOOK_LIMIT:
        short, long_ = (x, y) if len(x) <= len(y) else (y, x)
        out = np.zeros(L, dtype=np.int64)
        for i, s in enumerate(short.tolist()):
            if s and i < L:
                seg = long_[: L - i]
                out[i : i + len(seg)] = (out[i : i + len(seg)] + s * seg) % modulus
        return out
    bound = (modulus - 1) ** 2 * min(len(x), len(y))
    words = (bound.bit_length() + 63) // 64
    X = _pack_words(x, words)
    Y = _pack_words(y, words)
    Z = _bigmul(X, Y)
    total = len(x) + len(y) - 1
    buf = Z.to_bytes(total * words * 8, "little")
    w = np.frombuffer(buf, dtype="<u8", count=L * words).reshape(L, words)
    base = np.uint64((1 << 64) % modulus)
    m = np.uint64(modulus)
    acc = np.zeros(L, dtype=np.uint64)
    for k in range(words - 1, -1, -1):
        acc = (acc * base + w[:, k] % m) % m
    return acc.astype(np.int64)


def _pack_words(x: np.ndarray, words: int) -> int:
    if words == 1:
        return int.from_bytes(x.astype("<u8").tobytes(), "little")
    arr = np.zeros((len(x), words), dtype="<u8")
    arr[:, 0] = x
    return int.from_bytes(arr.tobytes(), "little")
