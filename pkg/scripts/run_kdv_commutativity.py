"""Brute-force commutativity of the circle descendant Hamiltonians.

Builds g_0..g_L on the extended cover lattice, evaluates every pairwise
bracket on the exact cover-K window, and prints the residual table.

    python scripts/run_kdv_commutativity.py --max-cover 6 --levels 3
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sftlab.hierarchy import commutator_residuals  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-cover", type=int, default=6)
    ap.add_argument("--levels", type=int, default=3)
    args = ap.parse_args()
    levels = list(range(args.levels + 1))
    t0 = time.monotonic()
    residuals, hams = commutator_residuals(levels, args.max_cover)
    dt = time.monotonic() - t0
    print(f"cover bound {args.max_cover}, levels {levels}  [{dt:.1f}s]")
    for j, h in zip(levels, hams):
        print(f"  g_{j}: {len(h.terms)} monomials")
    bad = 0
    for i in levels:
        for j in levels:
            r = residuals[i][j]
            status = "0" if r.is_zero() else f"NONZERO ({len(r.terms)} terms)"
            if not r.is_zero():
                bad += 1
            print(f"  {{g_{i}, g_{j}}} = {status}")
    print("all brackets vanish" if not bad else f"{bad} nonzero brackets")
    return 0 if not bad else 1


if __name__ == "__main__":
    raise SystemExit(main())
