"""p-adic valuations and the congruence verifiers for both grids.

Every verifier returns a :class:`CongruenceReport`. Forms are supplied as callables
``form(index, prec) -> Series`` so the same code serves the Zagier grid
(``grid.g_form`` / ``grid.f_form``) and the Folsom-Ono builder (``builder.G`` /
``builder.F``). Series may be exact or residues mod p^k; in the latter case a zero
coefficient only certifies valuation >= k and the report is marked saturated.
"""

from __future__ import annotations

from typing import Callable, Iterable

from .operators import HeckeSpec, fo_spec, hecke_images, kronecker, required_input_prec, zagier_spec
from .qlaurent import PrecisionError, Series
from .report import CongruenceReport, residue_vp, vp
from .zagier import _pow0, hecke_g_combination, is_f_index, is_g_index, split_square

__all__ = [
    "CongruenceReport",
    "vp",
    "residue_vp",
    "w_of",
    "verify_thm_hecke",
    "verify_thm_today",
    "verify_successive_congruence",
    "verify_bp_lemma",
    "verify_ap_lemma",
    "verify_coefficient_lemmas",
    "verify_worked_example",
]

FormSource = Callable[[int, int], Series]
SIDES = ("zagier", "fo")


def w_of(g: Series, p: int) -> int:
    """max over principal-part exponents alpha of floor(v_p(|alpha|) / 2)."""
    alphas = [e for e, _ in g.principal_part()]
    if not alphas:
        raise ValueError("w(g) needs a nonempty principal part")
    return max(vp(-a, p) // 2 for a in alphas)


def modulus_exponent(s: Series, p: int) -> int | None:
    """k with s.modulus == p^k (None for exact series)."""
    if s.modulus is None:
        return None
    k, m = 0, s.modulus
    while m % p == 0:
        m //= p
        k += 1
    if m != 1:
        raise ValueError(f"modulus {s.modulus} is not a power of {p}")
    return k


def _spec(side: str, p: int, n: int, weight_class: int = 1) -> HeckeSpec:
    if side == "zagier":
        return zagier_spec(p, n, weight_class)
    if side == "fo":
        if p < 5:
            raise ValueError("the Folsom-Ono side needs p >= 5")
        return fo_spec(p, n, weight_class)
    raise ValueError(f"side must be one of {SIDES}, got {side!r}")


def _char(side: str) -> int:
    return 12 if side == "fo" else 1


def _window_end(s: Series, window: int | None) -> int:
    if window is None:
        return s.prec
    if window > s.prec:
        raise PrecisionError(f"window end {window} exceeds guaranteed precision {s.prec}")
    return window


# ---------------------------------------------------------------------- Hecke congruence
def verify_thm_hecke(side: str, g: Series, p: int, n: int, window: int | None = None) -> CongruenceReport:
    """g|T(p^{2n+4}) - g|T(p^{2n}) vanishes mod p^{n - w(g)} on every known exponent.

    ``g`` must be known far enough for the chain; the window defaults to everything the
    T(p^{2n+4}) image guarantees, principal part included.
    """
    w = w_of(g, p)
    if n < w:
        raise ValueError(f"n = {n} is below w(g) = {w}")
    images = hecke_images(g, _spec(side, p, n + 2), n + 2)
    diff = images[n + 2] - images[n].truncate(images[n + 2].prec)
    hi = _window_end(diff, window)
    rep = CongruenceReport(f"thm-hecke-{side}", {"p": p, "n": n, "w": w})
    lo = min(diff.val, hi)
    rep.valuation_of_series(diff, n - w, p, lo, hi, modulus_exponent(g, p))
    return rep


# ---------------------------------------------------------------------- successive images
def verify_successive_congruence(side: str, form: FormSource, D: int, p: int, n: int, window: int) -> CongruenceReport:
    """g_D|T(p^{2n+2}) - eps g_D|T(p^{2n}) vanishes mod p^{n-v+1}, eps = (j/p) [times (12/p)].

    Beyond the congruence, the difference is compared exactly with the explicit basis
    combination (n+1 image minus eps times the n image), which is the stronger statement.
    """
    v, j = split_square(D, p)
    if n < v:
        raise ValueError(f"n = {n} must be >= v = {v}")
    char = _char(side)
    eps = kronecker(char * j, p)
    base = form(D, required_input_prec(window, p, n + 1))
    images = hecke_images(base, _spec(side, p, n + 1), n + 1)
    diff = (images[n + 1] - images[n].truncate(images[n + 1].prec) * eps).truncate(window)
    if diff.prec < window:
        raise PrecisionError(f"difference known below q^{diff.prec}, window asks for q^{window}")
    rep = CongruenceReport(f"successive-{side}", {"D": D, "p": p, "n": n, "v": v, "j": j, "eps": eps})
    modexp = modulus_exponent(base, p)
    rep.valuation_of_series(diff, n - v + 1, p, min(diff.val, window), window, modexp)

    upper = hecke_g_combination(D, p, n + 1, char)
    lower = hecke_g_combination(D, p, n, char)
    combo = dict(upper)
    for idx, c in lower.items():
        combo[idx] = combo.get(idx, 0) - eps * c
    combo = {idx: c for idx, c in combo.items() if c}
    rep.params["exact_form"] = {str(k): c for k, c in sorted(combo.items())}
    # every coefficient of the closed form is itself divisible by p^{n-v+1}
    for idx, c in combo.items():
        rep.add_valuation(("combination", idx), c, n - v + 1, p)
    rhs = None
    for idx, c in sorted(combo.items()):
        term = form(idx, window) * c
        rhs = term if rhs is None else rhs + term
    if rhs is None:
        rhs = Series.zero(window, base.modulus)
    rep.compare_series(diff, rhs)
    return rep


# ---------------------------------------------------------------------- coefficient lemmas
def verify_bp_lemma(side: str, form: FormSource, D: int, ds: Iterable[int], p: int, n: int) -> CongruenceReport:
    """b_{p^n}(D,d) - eps b_{p^{n-1}}(D,d) vanishes mod p^{n-v} for every d in ``ds``."""
    v, j = split_square(D, p)
    if n < max(v, 1):
        raise ValueError(f"n = {n} must be >= max(v, 1) = {max(v, 1)}")
    ds = sorted(ds)
    eps = kronecker(_char(side) * j, p)
    base = form(D, required_input_prec(ds[-1] + 1, p, n))
    images = hecke_images(base, _spec(side, p, n), n)
    rep = CongruenceReport(f"bp-lemma-{side}", {"D": D, "p": p, "n": n, "v": v, "eps": eps})
    modexp = modulus_exponent(base, p)
    for d in ds:
        value = images[n].coeff(d) - eps * images[n - 1].coeff(d)
        if modexp is not None:
            value %= base.modulus
        rep.add_valuation(d, value, n - v, p, modexp)
    return rep


def ap_closed_form(coeff: Callable[[int], object], d: int, p: int, n: int, char: int = 1):
    """a_{p^n}(D, d) from the untransformed column ``coeff(index) = a(D, index)``.

    d = p^{2u} i with p^2 not dividing i and n >= u.
    """
    if d <= 0:
        raise ValueError("d = p^{2u} i needs i > 0")
    u, i = split_square(d, p)
    if n < u:
        raise ValueError(f"n = {n} must be >= u = {u}")
    eps = kronecker(-char * i, p)
    total = 0
    for t in range(n - u + 1):
        total += _pow0(eps, n - u - t) * p**u * coeff(p ** (2 * t) * i)
    for t in range(1, u + 1):
        total += p ** (u - t) * coeff(p ** (2 * n - 2 * u + 4 * t) * i)
    return total


def verify_ap_lemma(side: str, form: FormSource, Ds: Iterable[int], d: int, p: int, n: int) -> CongruenceReport:
    """Coefficients of f_d|T(p^{2n}) at q^D against the closed form in the grid column."""
    Ds = sorted(Ds)
    char = _char(side)
    img = hecke_images(form(d, required_input_prec(Ds[-1] + 1, p, n)), _spec(side, p, n, 0), n)[-1]
    rep = CongruenceReport(f"ap-lemma-{side}", {"d": d, "p": p, "n": n, "u": split_square(d, p)[0]})
    cache: dict[int, Series] = {}

    def column(D):
        def coeff(index):
            if index not in cache:
                cache[index] = form(index, Ds[-1] + 1)
            return cache[index].coeff(D)
        return coeff

    for D in Ds:
        rep.add_equality(D, img.coeff(D), ap_closed_form(column(D), d, p, n, char))
    return rep


def verify_coefficient_lemmas(
    side: str,
    g_form: FormSource,
    f_form: FormSource,
    D: int,
    ds: Iterable[int],
    p: int,
    n: int,
) -> CongruenceReport:
    """Both coefficient lemmas: the b_{p^n} congruence on g_D over ``ds``, and the closed form
    for a_{p^n}(D, d) for every admissible d in ``ds`` with n >= u."""
    ds = sorted(ds)
    rep = CongruenceReport(f"coefficient-lemmas-{side}", {"D": D, "p": p, "n": n, "ds": ds})
    rep.merge(verify_bp_lemma(side, g_form, D, ds, p, n))
    exists = is_f_index if side == "zagier" else (lambda x: x > 0 and x % 24 == 1)
    for d in ds:
        if d > 0 and exists(d) and n >= split_square(d, p)[0]:
            rep.merge(verify_ap_lemma(side, f_form, [D], d, p, n))
    return rep


# ---------------------------------------------------------------------- vanishing coefficients
def verify_thm_today(
    side: str,
    coeff: Callable[[int, int], object],
    p: int,
    v: int,
    s: int,
    js: Iterable[int],
    is_: Iterable[int],
    modulus_exp: int | None = None,
    exists: Callable[[int], bool] | None = None,
) -> CongruenceReport:
    """p^s divides the coefficient at q^{p^{2v+2s} i} of the form of index p^{2v} j,
    for all j (p^2 not dividing j) and i with (-i/p) = (j/p).

    ``coeff(D, d)`` returns b(D,d) (or B(D,d)); pairs whose form does not exist are
    skipped and counted in params. Zero coefficients are vacuous passes.
    """
    if exists is None:
        exists = is_g_index if side == "zagier" else (lambda D: D > 0 and D % 24 == 23)
    rep = CongruenceReport(f"thm-today-{side}", {"p": p, "v": v, "s": s})
    skipped = 0
    pairs = 0
    for j in js:
        if j <= 0 or j % (p * p) == 0:
            continue
        D = p ** (2 * v) * j
        for i in is_:
            if kronecker(-i, p) != kronecker(j, p):
                continue
            if not exists(D):
                skipped += 1
                continue
            pairs += 1
            d = p ** (2 * v + 2 * s) * i
            rep.add_valuation((D, d), coeff(D, d), s, p, modulus_exp)
    rep.params.update({"pairs": pairs, "skipped_missing_form": skipped})
    return rep


# ---------------------------------------------------------------------- worked example
def verify_worked_example() -> CongruenceReport:
    """g_4 | T(9) and g_4 | T(3^6) mod 3^9 against the published lines, and the minimum
    3-adic valuation of their difference below the published window (exactly 2)."""
    from .zagier import build_g_basis, load_fixture

    ex = load_fixture()["example"]
    p, D, M, prec = ex["p"], ex["index"], ex["modulus"], ex["prec"]
    k = modulus_exponent(Series.zero(1, M), p)
    window = ex["valuation_window"]
    need = max(required_input_prec(window, p, 3), required_input_prec(prec, p, 3))
    g = build_g_basis(D, need, M)[D]
    images = hecke_images(g, zagier_spec(p, 3), 3)
    rep = CongruenceReport("worked-example", {"p": p, "D": D, "modulus": M, "window": window})
    for key, n in (("T2", 1), ("T6", 3)):
        published = Series.from_dict({int(e): c for e, c in ex[key].items()}, prec, M)
        rep.compare_series(images[n].truncate(prec), published)
    diff = images[3] - images[1].truncate(images[3].prec)
    local = rep.valuation_of_series(diff, 1, p, diff.val, window, k)
    rep.add_equality("min-valuation", local, ex["min_valuation"])
    return rep
