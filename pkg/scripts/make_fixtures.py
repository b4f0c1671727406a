"""Regenerate the JSON fixtures shipped inside the package.

Run from the repository root:

    python scripts/make_fixtures.py
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sftlab import io as sio  # noqa: E402
from sftlab.models import point_model, projective_line_model, two_point_model  # noqa: E402
from sftlab.suites import build_cylhom_fixtures, builtin_m05_ledger  # noqa: E402

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "sftlab" / "fixtures"


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    sio.save_model(point_model(), FIXTURES / "point.model.json")
    sio.save_model(two_point_model(), FIXTURES / "twopoint.model.json")
    sio.save_model(projective_line_model(), FIXTURES / "p1.model.json")

    datasets = build_cylhom_fixtures()
    names = {
        "(2,0)": "floer_point_20.counts.json",
        "(1,1)": "floer_point_11.counts.json",
        "(0,2)": "floer_point_02.counts.json",
        "noncontact": "floer_twopoint.counts.json",
        "generic": "generic.counts.json",
        "generic-fault": "generic_fault.counts.json",
    }
    for key, fname in names.items():
        sio.save_counts(datasets[key], FIXTURES / fname)

    ledger = {"schema": sio.LEDGER_SCHEMA, **builtin_m05_ledger()}
    (FIXTURES / "m05_ledger.json").write_text(sio.dumps_canonical(ledger))

    circle = {
        "schema": sio.PROFILES_SCHEMA,
        "name": "circle",
        "half_dim": 1,
        "cover_bound": 6,
        "q_degrees": None,
        "signs": None,
    }
    (FIXTURES / "circle.profiles.json").write_text(sio.dumps_canonical(circle))
    geodesic = {
        "schema": sio.PROFILES_SCHEMA,
        "name": "maximal-grading-demo",
        "half_dim": 5,
        "cover_bound": 3,
        "q_degrees": {str(n): 2 for n in range(1, 4)},
        "signs": {"bad_covers": [], "explicit": []},
    }
    (FIXTURES / "geodesic.profiles.json").write_text(sio.dumps_canonical(geodesic))
    print(f"wrote fixtures to {FIXTURES}")


if __name__ == "__main__":
    main()
