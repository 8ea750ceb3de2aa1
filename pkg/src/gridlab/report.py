"""Check reports shared by all verifiers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .qlaurent import Series

REPORT_SCHEMA = "gridlab.report.v1"
MAX_WITNESSES = 25

INF = None  # valuation of zero


def vp(x, p: int) -> int | None:
    """p-adic valuation of a rational; None stands for +infinity (x = 0)."""
    x = Fraction(x)
    if x == 0:
        return INF
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def residue_vp(r: int, p: int, k: int) -> int | None:
    """Valuation of a residue mod p^k, capped: returns None when r == 0 (valuation >= k)."""
    r %= p**k
    if r == 0:
        return INF
    return vp(r, p)


def _vmin(a, b):
    if a is INF:
        return b
    if b is INF:
        return a
    return min(a, b)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, tuple):
        return [_jsonable(t) for t in x]
    if isinstance(x, (list,)):
        return [_jsonable(t) for t in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


@dataclass
class CongruenceReport:
    """Outcome of one verifier run.

    Two kinds of entries feed it: exact equalities (``add_equality``/``compare_series``)
    and valuation bounds (``add_valuation``). ``passed`` is True iff no equality failed
    and every observed valuation meets its bound.
    """

    statement: str
    params: dict = field(default_factory=dict)
    required: int | None = None
    observed: int | None = None  # minimum valuation; None = +infinity (all zero)
    window: tuple[int, int] | None = None
    checked: int = 0
    substantive: int = 0
    vacuous: int = 0
    failures: int = 0
    saturated: bool = False  # a residue-mode zero only proves valuation >= modulus exponent
    witnesses: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    # -- entries
    def _witness(self, entry: dict) -> None:
        if len(self.witnesses) < MAX_WITNESSES:
            self.witnesses.append(entry)

    def add_equality(self, key, lhs, rhs) -> bool:
        self.checked += 1
        ok = lhs == rhs
        if ok:
            self.substantive += 1
        else:
            self.failures += 1
            self._witness({"key": key, "lhs": lhs, "rhs": rhs, "pass": False})
        return ok

    def compare_series(self, lhs: Series, rhs: Series) -> bool:
        """Coefficientwise equality on every exponent known to both series."""
        prec = min(lhs.prec, rhs.prec)
        lo = min(lhs.val, rhs.val, prec)
        self._widen(lo, prec)
        diff = lhs.truncate(prec) - rhs.truncate(prec)
        n = prec - lo
        self.checked += n
        bad = list(diff.items())
        self.failures += len(bad)
        self.substantive += n - len(bad)
        for e, _ in bad[:MAX_WITNESSES]:
            self._witness({"key": e, "lhs": lhs.coeff(e), "rhs": rhs.coeff(e), "pass": False})
        return not bad

    def add_valuation(self, key, value, required: int, p: int, modulus_exp: int | None = None) -> bool:
        """Record v_p(value) >= required; ``modulus_exp`` = k when value is a residue mod p^k."""
        if modulus_exp is not None and required > modulus_exp:
            raise ValueError(f"bound {required} exceeds the residue precision p^{modulus_exp}")
        self.required = required if self.required is None else min(self.required, required)
        self.checked += 1
        if modulus_exp is None:
            v = vp(value, p)
        else:
            v = residue_vp(int(value), p, modulus_exp)
            if v is INF:
                self.saturated = True
        if v is INF:
            self.vacuous += 1
            return True
        self.substantive += 1
        self.observed = _vmin(self.observed, v)
        ok = v >= required
        if not ok:
            self.failures += 1
        if not ok or len(self.witnesses) < 5:
            self._witness({"key": key, "value": value, "vp": v, "required": required, "pass": ok})
        return ok

    def valuation_of_series(self, s: Series, required: int, p: int, lo: int | None = None, hi: int | None = None, modulus_exp: int | None = None) -> int | None:
        """Feed every coefficient of ``s`` on [lo, hi) (default: the whole known range)."""
        lo = s.val if lo is None else lo
        hi = s.prec if hi is None else hi
        if hi > s.prec:
            raise ValueError(f"window end {hi} beyond known precision {s.prec}")
        self._widen(lo, hi)
        before = self.observed
        self.observed = None
        for e in range(lo, hi):
            self.add_valuation(e, s.coeff(e), required, p, modulus_exp)
        local = self.observed
        self.observed = _vmin(before, local)
        return local

    def _widen(self, lo: int, hi: int) -> None:
        if self.window is None:
            self.window = (lo, hi)
        else:
            self.window = (min(self.window[0], lo), max(self.window[1], hi))

    def merge(self, other: "CongruenceReport") -> "CongruenceReport":
        self.checked += other.checked
        self.substantive += other.substantive
        self.vacuous += other.vacuous
        self.failures += other.failures
        self.saturated |= other.saturated
        if other.required is not None:
            self.required = other.required if self.required is None else min(self.required, other.required)
        self.observed = _vmin(self.observed, other.observed)
        if other.window:
            self._widen(*other.window)
        for w in other.witnesses:
            self._witness({"from": other.statement, **w})
        return self

    # -- outcome
    @property
    def passed(self) -> bool:
        return self.failures == 0

    def summary(self) -> str:
        obs = "inf" if self.observed is None else self.observed
        bound = "" if self.required is None else f" required>={self.required} observed={obs}"
        return (
            f"[{'PASS' if self.passed else 'FAIL'}] {self.statement}{bound} "
            f"checked={self.checked} substantive={self.substantive} vacuous={self.vacuous} "
            f"failures={self.failures}"
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA,
            "statement": self.statement,
            "params": _jsonable(self.params),
            "required": self.required,
            "observed": self.observed,
            "window": list(self.window) if self.window else None,
            "pass": self.passed,
            "checked": self.checked,
            "substantive": self.substantive,
            "vacuous": self.vacuous,
            "failures": self.failures,
            "saturated": self.saturated,
            "witnesses": _jsonable(self.witnesses),
            "notes": list(self.notes),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)
