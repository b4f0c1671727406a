"""Descendant reconstruction on the point target, against the oracle.

    python scripts/run_reconstruction_demo.py --max-points 8
"""

import argparse
import sys
from itertools import combinations_with_replacement
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sftlab.gw import Bounds, reconstruct  # noqa: E402
from sftlab.gw_oracle import point_correlator  # noqa: E402
from sftlab.models import point_model  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-points", type=int, default=8)
    ap.add_argument("--max-level", type=int, default=5)
    args = ap.parse_args()
    model = point_model()
    table = reconstruct(model, Bounds(args.max_points, args.max_level))
    mismatches = 0
    print(f"{'levels':<24} {'reconstructed':>14} {'oracle':>10}")
    for n in range(3, args.max_points + 1):
        for levels in combinations_with_replacement(range(args.max_level + 1), n):
            want = point_correlator(tuple(levels))
            got = table.get(model.key([("e", a) for a in levels]))
            if want or got:
                mark = "" if got == want else "   <-- MISMATCH"
                print(f"{str(levels):<24} {str(got):>14} {str(want):>10}{mark}")
            if got != want:
                mismatches += 1
    print("exact agreement" if not mismatches else f"{mismatches} mismatches")
    return 0 if not mismatches else 1


if __name__ == "__main__":
    raise SystemExit(main())
