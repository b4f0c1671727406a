"""Run every verification suite and print the merged report.

Equivalent to `sftlab verify --suite all`; kept as a script for quick
experiment loops with non-default bounds.

    python scripts/run_full_verification.py --max-cover 4 --samples 200
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sftlab.report import merge_reports  # noqa: E402
from sftlab.suites import (  # noqa: E402
    algebra_suite, cylhom_suite, divisor_suite, gw_suite, hierarchy_suite,
)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-cover", type=int, default=6)
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--max-points", type=int, default=8)
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--timings", action="store_true")
    args = ap.parse_args()
    reports = [
        algebra_suite(samples=args.samples),
        hierarchy_suite(cover_bound=args.max_cover, max_level=args.levels),
        gw_suite(max_points=args.max_points),
        cylhom_suite(),
        divisor_suite(),
    ]
    merged = merge_reports(reports)
    print(merged.render_text(args.timings), end="")
    return merged.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
