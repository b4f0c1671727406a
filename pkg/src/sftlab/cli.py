"""Command-line interface: verification suites, reconstruction, exports.

Exit codes: 0 all checks pass, 1 some check failed, 2 bad input.  Reports
are deterministic byte-for-byte unless --timings is given.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import cylhom, divisors, gw, hierarchy, io as sio
from .errors import SftlabError, ValidationError
from .models import BUILTIN_MODELS
from .report import VerificationReport, merge_reports
from .suites import SUITES


def _load_model_arg(spec: str):
    if spec in BUILTIN_MODELS:
        return BUILTIN_MODELS[spec]()
    return sio.load_model(spec)


def _emit(args, text: str):
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    if args.suite == "all" and args.jobs > 1 and not args.counts:
        from concurrent.futures import ThreadPoolExecutor

        def run_one(name):
            ns = argparse.Namespace(**vars(args))
            ns.suite = name
            ns.jobs = 1
            return _suite_report(ns, name)
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(run_one, names))
        report = merge_reports(reports)
        text = (report.render_machine(args.timings) if args.format == "machine"
                else report.render_text(args.timings))
        _emit(args, text)
        return report.exit_code
    reports = [_suite_report(args, name) for name in names]
    report = reports[0] if len(reports) == 1 else merge_reports(reports)
    text = (report.render_machine(args.timings) if args.format == "machine"
            else report.render_text(args.timings))
    _emit(args, text)
    return report.exit_code


def _suite_report(args, name) -> VerificationReport:
    if name == "algebra":
        return SUITES[name](samples=args.samples, seed=args.seed, jobs=args.jobs)
    if name == "hierarchy":
        return SUITES[name](cover_bound=args.max_cover, max_level=args.levels,
                            jobs=args.jobs)
    if name == "gw":
        return SUITES[name](max_points=args.max_points,
                            max_level=min(args.levels + 1, args.max_points - 3),
                            window=args.trunc_t, jobs=args.jobs)
    if name == "cylhom":
        if args.counts:
            return _single_counts_report(sio.load_counts(args.counts))
        return SUITES[name](jobs=args.jobs)
    if name == "divisor":
        ledger = sio.load_json(args.ledger) if args.ledger else None
        return SUITES[name](ledger=ledger, jobs=args.jobs)
    raise SftlabError(f"unknown suite {name!r}")


def _single_counts_report(data) -> VerificationReport:
    """Checks applicable to one loaded count-data file."""
    from .report import CheckRecord, FAIL, PASS
    rep = VerificationReport(f"cylhom:{data.name}")
    r, off = cylhom.d_squared_residual(data)
    rep.add(CheckRecord("differential.squared", "d . d = 0",
                        PASS if r.is_zero() else FAIL,
                        "0" if r.is_zero() else str(off)))
    if not data.orbits.equivariant:
        plain = cylhom.build_differential(data).plain
        offd = plain.block("check", "hat")
        rep.add(CheckRecord("differential.off-diagonal",
                            "hat-to-check plain block is zero",
                            PASS if not offd else FAIL))
        label = data.counts.section_choice
        variant = "(2,0)" if label == "generic" else label
        try:
            reports = cylhom.noneq_trr_residuals(data, variant, max_arg_order=1)
            ok = all(x.zero for x in reports)
            rep.add(CheckRecord(f"trr.{variant}",
                                f"recursion {variant} residuals (as labeled)",
                                PASS if ok else FAIL,
                                "; ".join(x.summary() for x in reports
                                          if not x.zero) or "0"))
        except SftlabError as exc:
            rep.add(CheckRecord("trr.label", str(exc), FAIL))
    if r.is_zero():
        h = cylhom.compute_homology(data)
        rep.add(CheckRecord("homology.betti",
                            f"betti numbers {dict(sorted(h.betti.items()))}",
                            PASS))
    return rep.finalize()


def cmd_reconstruct(args) -> int:
    model = _load_model_arg(args.model)
    bounds = gw.Bounds(max_points=args.max_points, max_level=args.levels,
                       max_degree=args.max_degree)
    table = gw.reconstruct(model, bounds)
    _emit(args, sio.dumps_canonical(sio.table_to_dict(table)))
    return 0


def cmd_hierarchy(args) -> int:
    levels = [int(x) for x in args.levels.split(",")] if isinstance(args.levels, str) \
        else list(range(args.levels + 1))
    if args.profiles:
        prof = sio.load_profiles(args.profiles)
        lattice = hierarchy.OrbitLattice(
            args.max_cover, half_dim=prof["half_dim"],
            q_degree=(prof["grading"].q_degree if prof["grading"] else None))
        table = lattice.table()
        hams = {
            j: hierarchy.geodesic_hamiltonian(
                lattice, j, prof["grading"], prof["signs"], table=table)
            for j in levels
        } if prof["grading"] else {
            j: hierarchy.circle_hamiltonian(lattice, j, table=table)
            for j in levels}
    else:
        lattice = hierarchy.OrbitLattice(args.max_cover)
        table = lattice.table()
        hams = {j: hierarchy.circle_hamiltonian(lattice, j, table=table)
                for j in levels}
    out = {
        "schema": "sftlab-hamiltonians/1",
        "cover_bound": args.max_cover,
        "hamiltonians": {str(j): sio.series_to_dict(h) for j, h in hams.items()},
    }
    _emit(args, sio.dumps_canonical(out))
    return 0


def cmd_homology(args) -> int:
    data = sio.load_counts(args.counts)
    h = cylhom.compute_homology(data)
    out = {
        "schema": "sftlab-homology/1",
        "name": data.name,
        "betti": {str(k): v for k, v in sorted(h.betti.items())},
        "representatives": {
            str(k): [{g: sorted((list(d), sio.encode_rational(c))
                                for d, c in poly.items())
                      for g, poly in rep.items()} for rep in reps]
            for k, reps in sorted(h.representatives.items())},
    }
    _emit(args, sio.dumps_canonical(out))
    return 0


def cmd_divisor(args) -> int:
    out = {"schema": "sftlab-divisor/1"}
    expr = divisors.averaged_psi(args.points, args.index)
    out["averaged_psi"] = {
        "points": args.points, "index": args.index,
        "coefficients": [[str(s), sio.encode_rational(c)]
                         for s, c in expr.items_sorted()],
    }
    if args.points == 5 and args.index == 1:
        out["self_pairing"] = sio.encode_rational(
            divisors.m05_intersection(expr, expr))
    if args.r is not None:
        exprs = [divisors.map_zero_locus(args.r, args.pos, args.neg, v)
                 for v in "ABC"]
        out["zero_loci"] = {
            v: {"lhs_factor": sio.encode_rational(lhs),
                "coefficients": [[str(s), sio.encode_rational(c)]
                                 for s, c in e.items_sorted()]}
            for v, (lhs, e) in zip("ABC", exprs)}
        out["combinations"] = {
            target: divisors.solve_combination(
                exprs, target, args.r, args.pos + args.neg).describe()
            for target in divisors.TARGET_RULES}
    _emit(args, sio.dumps_canonical(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sftlab",
        description="exact-arithmetic verification of graded-algebra, "
                    "recursion and chain-complex identities")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("text", "machine"), default="text")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--out", help="write output to a file instead of stdout")
        p.add_argument("--timings", action="store_true",
                       help="include runtimes (makes reports nondeterministic)")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", choices=tuple(SUITES) + ("all",), default="all")
    v.add_argument("--trunc-t", type=int, default=5, dest="trunc_t",
                   help="t-order window for series residuals")
    v.add_argument("--max-cover", type=int, default=6)
    v.add_argument("--max-degree", type=int, default=2)
    v.add_argument("--max-points", type=int, default=8)
    v.add_argument("--levels", type=int, default=3)
    v.add_argument("--samples", type=int, default=1000)
    v.add_argument("--seed", type=int, default=20240)
    v.add_argument("--model", help="model file (reconstruction commands)")
    v.add_argument("--counts", help="count-data file for the cylhom suite")
    v.add_argument("--ledger", help="intersection-ledger file for the divisor suite")
    common(v)
    v.set_defaults(fn=cmd_verify)

    r = sub.add_parser("reconstruct", help="emit a correlator table")
    r.add_argument("--model", default="point",
                   help="builtin name (point, twopoint, p1) or a model file")
    r.add_argument("--max-points", type=int, default=8)
    r.add_argument("--levels", type=int, default=4)
    r.add_argument("--max-degree", type=int, default=0)
    common(r)
    r.set_defaults(fn=cmd_reconstruct)

    h = sub.add_parser("hierarchy", help="emit descendant Hamiltonians")
    h.add_argument("--max-cover", type=int, default=3)
    h.add_argument("--levels", default="0,1,2,3")
    h.add_argument("--profiles", help="grading/sign profile file")
    common(h)
    h.set_defaults(fn=cmd_hierarchy)

    ho = sub.add_parser("homology", help="emit a Betti table for count data")
    ho.add_argument("--counts", required=True)
    common(ho)
    ho.set_defaults(fn=cmd_homology)

    d = sub.add_parser("divisor", help="emit averaged loci and combinations")
    d.add_argument("--points", "--n", type=int, default=5, dest="points")
    d.add_argument("--index", type=int, default=1)
    d.add_argument("--r", type=int, help="marked points for the map loci")
    d.add_argument("--pos", type=int, default=1)
    d.add_argument("--neg", type=int, default=1)
    common(d)
    d.set_defaults(fn=cmd_divisor)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValidationError, SftlabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
