#!/usr/bin/env python3
"""Rebuild every form listed in the bundled fixtures and diff it against the stored terms.

Exit status 0 when all stored coefficients are reproduced, 1 otherwise.
"""

import sys

from gridlab import folsomono, zagier
from gridlab.padic import verify_worked_example


def diff(tag, stored, series):
    bad = [(e, c, series.coeff(e)) for e, c in stored.items() if series.coeff(e) != c]
    print(f"{tag:>8}: {len(stored)} terms, {len(bad)} mismatches" + (f" {bad[:5]}" if bad else ""))
    return not bad


def main() -> int:
    ok = True
    zf = zagier.load_fixture()
    for family, build in (("f", zagier.build_f_basis), ("g", zagier.build_g_basis)):
        rows = {int(k): zagier.fixture_terms(family, int(k))[0] for k in zf[family]}
        prec = max(max(r) for r in rows.values()) + 1
        basis = build(max(rows), prec)
        for idx, terms in rows.items():
            ok &= diff(f"{family}{idx}", terms, basis[idx])

    ff = folsomono.load_fixture()
    b = folsomono.FOBuilder()
    for D, v in ff["G"].items():
        terms = {int(e): c for e, c in v.items()}
        ok &= diff(f"G{D}", terms, b.G(int(D), max(terms) + 1))
    for d, v in ff["F"].items():
        terms = {int(e): c for e, c in v.items()}
        ok &= diff(f"F{d}", terms, b.F(int(d), max(terms) + 1, route="duality"))
    for key, make in (("B1", folsomono.b1_theta), ("B2", folsomono.b2_theta)):
        terms = {int(e): c for e, c in ff[key].items()}
        ok &= diff(key, terms, make(max(terms) + 1))

    rep = verify_worked_example()
    print(rep.summary())
    ok &= rep.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
