#!/usr/bin/env python3
"""Print one PASS/FAIL line per acceptance criterion.

    python3 scripts/run_acceptance.py          # all criteria
    python3 scripts/run_acceptance.py 3 5 9    # a subset
"""

import runpy
import sys
from pathlib import Path

if __name__ == "__main__":
    target = Path(__file__).resolve().parents[1] / "tests" / "test_acceptance.py"
    sys.argv = [str(target), *sys.argv[1:]]
    runpy.run_path(str(target), run_name="__main__")
