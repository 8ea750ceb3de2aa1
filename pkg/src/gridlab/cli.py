"""Command line front end: ``gridlab build|series|hecke|verify|cache``.

Exit codes: 0 success, 1 a checked property failed, 2 usage error, 3 construction failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .etabuilder import ConstructionFailure
from .folsomono import FOBuilder, is_F_index, is_G_index, verify_fo_duality, verify_fo_hecke_duality
from .operators import fo_spec, hecke_images, required_input_prec, zagier_spec
from .padic import (
    verify_coefficient_lemmas,
    verify_successive_congruence,
    verify_thm_hecke,
    verify_thm_today,
    verify_worked_example,
)
from .qlaurent import PrecisionError, Series
from .report import CongruenceReport
from .zagier import (
    ZagierGrid,
    build_f_basis,
    build_g_basis,
    fixture_terms,
    is_f_index,
    is_g_index,
    verify_divisor_recursion,
    verify_duality_zagier,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_CONSTRUCTION = 0, 1, 2, 3
CACHE_SCHEMA = "gridlab.basis.v1"
FAMILIES = ("zagier-f", "zagier-g", "fo-g")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------- parsing helpers
def parse_modulus(text: str | None) -> int | None:
    """'19683', '3^9' or '3**9'."""
    if text is None:
        return None
    m = re.fullmatch(r"\s*(\d+)\s*(?:(?:\^|\*\*)\s*(\d+))?\s*", text)
    if not m:
        raise UsageError(f"cannot read modulus {text!r}")
    value = int(m.group(1)) ** int(m.group(2) or 1)
    if value < 2:
        raise UsageError("modulus must be at least 2")
    return value


def largest_prime_power(p: int) -> int:
    """Largest p^k that fits the residue arithmetic (at most 2^31)."""
    q = p
    while q * p <= 2**31:
        q *= p
    return q


def parse_range(text: str | None, default: list[int] | None = None) -> list[int]:
    """'3', '1..4' or '1,2,5'."""
    if text is None:
        if default is None:
            raise UsageError("missing range")
        return default
    out: list[int] = []
    for part in text.split(","):
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


@dataclass(frozen=True)
class FormRef:
    side: str  # zagier | fo
    family: str  # f, g, F, G
    index: int

    @classmethod
    def parse(cls, text: str) -> "FormRef":
        m = re.fullmatch(r"([fgFG]):(\d+)", text.strip())
        if not m:
            raise UsageError(f"form must look like g:4, f:0, G:23 or F:25 (got {text!r})")
        fam, idx = m.group(1), int(m.group(2))
        side = "zagier" if fam.islower() else "fo"
        ok = {"f": is_f_index, "g": is_g_index, "F": is_F_index, "G": is_G_index}[fam](idx)
        if not ok:
            raise UsageError(f"{fam}_{idx} does not exist")
        return cls(side, fam, idx)


def resolve_form(ref: FormRef, prec: int, modulus: int | None) -> Series:
    if ref.family == "g":
        return build_g_basis(ref.index, prec, modulus)[ref.index]
    if ref.family == "f":
        return build_f_basis(ref.index, prec, modulus)[ref.index]
    builder = FOBuilder(modulus)
    if ref.family == "G":
        return builder.G(ref.index, prec)
    return builder.F(ref.index, prec)


# ---------------------------------------------------------------------- output
def format_series(s: Series, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(s.to_json(), sort_keys=True)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["exponent", "coefficient"])
        for e, c in s.items():
            w.writerow([e, c])
        return buf.getvalue().rstrip("\n")
    parts = []
    for e, c in s.items():
        c = str(c)
        if e == 0:
            parts.append(c)
        else:
            mono = "q" if e == 1 else f"q^{e}"
            parts.append(mono if c == "1" else f"-{mono}" if c == "-1" else f"{c}{mono}")
    body = " + ".join(parts).replace("+ -", "- ") if parts else "0"
    tail = f" + O(q^{s.prec})"
    if s.modulus is not None:
        tail += f" (mod {s.modulus})"
    return body + tail


def emit_report(rep: CongruenceReport, fmt: str) -> None:
    if fmt == "json":
        print(rep.dumps())
    elif fmt == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        d = rep.to_json()
        w.writerow([d["statement"], d["pass"], d["required"], d["observed"], d["checked"], d["substantive"], d["vacuous"], d["failures"]])
    else:
        print(rep.summary())


# ---------------------------------------------------------------------- cache
def cache_dir(arg: str | None) -> Path:
    if arg:
        return Path(arg)
    env = os.environ.get("GRIDLAB_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "gridlab"


def cache_key(family: str, max_index: int, prec: int, modulus: int | None) -> str:
    mod = "exact" if modulus is None else f"mod{modulus}"
    level = "N144" if family.startswith("fo") else "N4"
    return f"{CACHE_SCHEMA}-{family}-{level}-max{max_index}-prec{prec}-{mod}.json"


def build_document(family: str, max_index: int, prec: int, modulus: int | None) -> dict:
    if family == "zagier-f":
        return build_f_basis(max_index, prec, modulus).to_json()
    if family == "zagier-g":
        return build_g_basis(max_index, prec, modulus).to_json()
    builder = FOBuilder(modulus)
    forms = {str(D): builder.G(D, prec).to_json() for D in range(23, max_index + 1, 24)}
    if not forms:
        raise UsageError("fo-g needs --index >= 23")
    return {
        "schema": CACHE_SCHEMA,
        "family": family,
        "prec": prec,
        "modulus": modulus,
        "forms": forms,
        "provenance": {
            "ladder": builder.ladder_candidate.terms,
            "anchor": builder.anchor.terms,
            "mirror": builder.mirror_candidate.terms,
        },
    }


def _dump(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, default=str)


# ---------------------------------------------------------------------- commands
def cmd_build(args) -> int:
    modulus = parse_modulus(args.mod)
    minimum = 2 if args.family == "fo-g" else args.index + 1
    if args.prec < minimum:
        raise UsageError(f"--prec {args.prec} is too small for {args.family} up to {args.index}; need --prec >= {minimum}")
    directory = cache_dir(args.cache_dir)
    path = directory / cache_key(args.family, args.index, args.prec, modulus)
    if path.exists():
        doc = json.loads(path.read_text())
        status = "cache-hit"
    else:
        doc = build_document(args.family, args.index, args.prec, modulus)
        directory.mkdir(parents=True, exist_ok=True)
        path.write_text(_dump(doc))
        status = "built"
    if args.format == "json":
        print(json.dumps({"status": status, "path": str(path), "forms": sorted(map(int, doc["forms"]))}))
    else:
        print(f"{status}: {path}")
        for idx in sorted(doc["forms"], key=int):
            s = Series.from_json(doc["forms"][idx])
            print(f"{args.family}[{idx}] = {format_series(s.truncate(min(s.prec, args.show)), 'text')}")
    return EXIT_OK


def cmd_series(args) -> int:
    ref = FormRef.parse(args.form)
    s = resolve_form(ref, args.prec, parse_modulus(args.mod))
    print(format_series(s.truncate(args.prec), args.format))
    return EXIT_OK


def cmd_hecke(args) -> int:
    ref = FormRef.parse(args.form)
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    modulus = parse_modulus(args.mod)
    need = required_input_prec(args.prec, args.p, args.n)
    base = resolve_form(ref, need, modulus)
    weight_class = 1 if ref.family in "gG" else 0
    try:
        spec = (zagier_spec if ref.side == "zagier" else fo_spec)(args.p, args.n, weight_class)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    image = hecke_images(base, spec)[-1]
    print(format_series(image.truncate(args.prec), args.format))
    return EXIT_OK


def _zagier_grid(max_index: int, prec: int, modulus: int | None = None) -> ZagierGrid:
    return ZagierGrid.build(max_index, max_index, prec, modulus=modulus)


def _form_source(side: str, modulus: int | None, top: int, prec: int):
    """(g_form, f_form) callables for the verifiers."""
    if side == "zagier":
        grid = _zagier_grid(top, prec, modulus)
        return grid.g_form, grid.f_form
    builder = FOBuilder(modulus)
    return builder.G, builder.F


def _verify_reports(args) -> list[CongruenceReport]:
    st = args.statement
    modulus = parse_modulus(args.mod)
    if st == "example-1-3":
        return [verify_worked_example()]
    if st == "zagier-regression":
        grid = _zagier_grid(8, 40)
        rep = CongruenceReport("zagier-regression")
        for fam, basis in (("f", grid.f), ("g", grid.g)):
            for idx in ((0, 3, 4) if fam == "f" else (1, 4, 5)):
                terms, prec = fixture_terms(fam, idx)
                rep.compare_series(basis[idx].truncate(prec), Series.from_dict(terms, prec))
        return [rep]
    if st == "fo-regression":
        from .folsomono import load_fixture

        b = FOBuilder()
        data = load_fixture()
        rep = CongruenceReport("fo-regression")
        for D, terms in data["G"].items():
            s = b.G(int(D), max(map(int, terms)) + 1)
            for e, c in terms.items():
                rep.add_equality(("G", D, e), s.coeff(int(e)), c)
        for d, terms in data["F"].items():
            s = b.F(int(d), max(map(int, terms)) + 1, route="duality") if d != "1" else b.F1(max(map(int, terms)) + 1)
            for e, c in terms.items():
                rep.add_equality(("F", d, e), s.coeff(int(e)), c)
        return [rep]
    if st == "duality":
        top = args.max or 100
        if args.side == "fo":
            return [verify_fo_duality(FOBuilder(), top, top + 2)]
        grid = _zagier_grid(top, max(top + 1, 3 * 3 * 100 + 1))
        return [verify_duality_zagier(grid, top, top, parse_range(args.m, [3, 5]), window=args.window or 10)]
    if st == "fo-hecke-duality":
        b = FOBuilder()
        return [verify_fo_hecke_duality(b, p, [23, 47, 71, 95], [1, 25, 49]) for p in parse_range(args.p, [5, 7])]
    if st == "divisor-recursion":
        grid = _zagier_grid(args.max or 20, 400)
        return [verify_divisor_recursion(grid, m, args.max or 20) for m in parse_range(args.m, [3, 5, 9, 15])]
    ref = FormRef.parse(args.form) if args.form else None
    p = parse_range(args.p, [3])[0]
    ns = parse_range(args.n, [1])
    if st == "thm-hecke":
        if ref is None:
            raise UsageError("thm-hecke needs --form")
        # the T(p^{2n+4}) chain needs input far beyond the window; default to residues
        window = args.window or 10
        if modulus is None:
            modulus = largest_prime_power(p)
        g = resolve_form(ref, required_input_prec(window, p, max(ns) + 2), modulus)
        reports = []
        for n in ns:
            rep = verify_thm_hecke(ref.side, g, p, n, window)
            rep.params["modulus"] = modulus
            reports.append(rep)
        return reports
    if st in ("successive", "lemmas"):
        if ref is None:
            raise UsageError(f"{st} needs --form")
        window = args.window or 20
        top = max(ref.index, window)
        need = required_input_prec(window, p, max(ns) + 1)
        g_form, f_form = _form_source(ref.side, modulus, top, need)
        if st == "successive":
            return [verify_successive_congruence(ref.side, g_form, ref.index, p, n, window) for n in ns]
        return [verify_coefficient_lemmas(ref.side, g_form, f_form, ref.index, range(1, window), p, n) for n in ns]
    if st == "today":
        side = args.side or "zagier"
        vs, ss = parse_range(args.v, [0, 1]), parse_range(args.s, [1, 2])
        js, is_ = parse_range(args.j, list(range(1, 26))), parse_range(args.i, list(range(1, 31)))
        k = 8
        M = modulus or p**k
        top_D = p ** (2 * max(vs)) * max(js)
        top_d = p ** (2 * max(vs) + 2 * max(ss)) * max(is_)
        if side == "zagier":
            g = build_g_basis(top_D, top_d + 1, M)
            coeff = lambda D, d: g[D].coeff(d)  # noqa: E731
        else:
            b = FOBuilder(M)
            coeff = lambda D, d: b.G(D, d + 1).coeff(d)  # noqa: E731
        from .padic import modulus_exponent

        modexp = modulus_exponent(Series.zero(1, M), p)
        return [verify_thm_today(side, coeff, p, v, s, js, is_, modexp) for v in vs for s in ss]
    raise UsageError(f"unknown statement {st!r}")


def cmd_verify(args) -> int:
    reports = _verify_reports(args)
    for rep in reports:
        emit_report(rep, args.format)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VIOLATION


def cmd_cache(args) -> int:
    directory = cache_dir(args.cache_dir)
    files = sorted(directory.glob(f"{CACHE_SCHEMA}-*.json")) if directory.exists() else []
    if args.action == "list":
        for f in files:
            print(f"{f.name}\t{f.stat().st_size}")
    elif args.action == "clear":
        for f in files:
            f.unlink()
        print(f"removed {len(files)} file(s) from {directory}")
    elif args.action == "path":
        print(directory)
    return EXIT_OK


# ---------------------------------------------------------------------- entry point
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gridlab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--cache-dir", default=None, help="default: $GRIDLAB_CACHE or ~/.cache/gridlab")
    common.add_argument("--mod", default=None, help="reduce modulo M, e.g. 3^9")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="build a basis and cache it")
    b.add_argument("--family", choices=FAMILIES, required=True)
    b.add_argument("--index", type=int, required=True, help="largest index")
    b.add_argument("--prec", type=int, required=True)
    b.add_argument("--show", type=int, default=20, help="terms shown per form")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("series", parents=[common], help="print one form")
    s.add_argument("--form", required=True, help="g:4, f:0, G:23 or F:25")
    s.add_argument("--prec", type=int, default=20)
    s.set_defaults(func=cmd_series)

    h = sub.add_parser("hecke", parents=[common], help="apply T(p^{2n})")
    h.add_argument("--form", required=True)
    h.add_argument("--p", type=int, required=True)
    h.add_argument("--n", type=int, default=1)
    h.add_argument("--prec", type=int, default=20, help="output precision")
    h.set_defaults(func=cmd_hecke)

    v = sub.add_parser("verify", parents=[common], help="run a verifier")
    v.add_argument(
        "statement",
        choices=(
            "example-1-3", "zagier-regression", "fo-regression", "thm-hecke", "duality",
            "fo-hecke-duality", "divisor-recursion", "successive", "lemmas", "today",
        ),
    )
    v.add_argument("--side", choices=("zagier", "fo"), default=None)
    v.add_argument("--form", default=None)
    v.add_argument("--p", default=None)
    v.add_argument("--n", default=None, help="e.g. 1..4")
    v.add_argument("--m", default=None, help="Hecke indices m, e.g. 3,5")
    v.add_argument("--v", default=None)
    v.add_argument("--s", default=None)
    v.add_argument("--j", default=None)
    v.add_argument("--i", default=None)
    v.add_argument("--max", type=int, default=None)
    v.add_argument("--window", type=int, default=None)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("cache", parents=[common], help="inspect the cache")
    c.add_argument("action", choices=("list", "clear", "path"))
    c.set_defaults(func=cmd_cache)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConstructionFailure,) as exc:
        print(f"construction failure: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except (ValueError, KeyError, PrecisionError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
