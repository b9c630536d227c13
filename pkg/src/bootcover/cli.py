"""Command-line interface: coverage curves, tables, calibration and validation as CSV.

Every file written with ``--out`` gets a ``<out>.manifest.json`` companion
recording the argument vector, parameters, seeds, version, tolerances and
wall time.  ``bootcover replay <manifest>`` re-runs it.  Exit codes: 0 on
success, 1 when validation fails, 2 on usage or domain errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import sys
import time
from importlib import metadata

import numpy as np

from . import binom_one, binom_two, nonparam, normal
from .binom_one import IntervalTable, OneSampleDesign
from .binom_two import TwoSampleDesign
from .percentile import make_plan
from .stats import DEFAULT_QUAD
from .streams import McConfig
from .validate import FULL, QUICK, Z_MAX, ENUM_TOL, run_suite, uncovered

DEFAULT_SEED = 20191215
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def fmt(x) -> str:
    """Round-trip formatting for numbers; other values pass through ``str``."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return "" if x is None else str(x)


class Output:
    """Collects CSV rows, then writes them with the manifest (or to stdout)."""

    def __init__(self, args, header):
        self.args = args
        self.header = list(header)
        self.rows = []

    def add(self, *row):
        self.rows.append(row)

    def text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()

    def close(self, started: float, extra=None):
        if self.args.out is None:
            sys.stdout.write(self.text())
            return
        with open(self.args.out, "w", newline="") as fh:
            fh.write(self.text())
        write_manifest(self.args, started, extra)


def write_manifest(args, started: float, extra=None):
    params = {k: v for k, v in vars(args).items() if k not in ("func", "argv")}
    manifest = {
        "command": args.command,
        "argv": args.argv,
        "parameters": params,
        "seeds": [args.seed] if getattr(args, "seed", None) is not None else [],
        "version": _version(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "tolerances": {
            "quad_abs": DEFAULT_QUAD.abs_tol,
            "quad_rel": DEFAULT_QUAD.rel_tol,
            "tail_cutoff": DEFAULT_QUAD.tail_cutoff,
            "enum_tol": ENUM_TOL,
            "z_max": Z_MAX,
        },
        "wall_time_s": time.perf_counter() - started,
    }
    if extra:
        manifest.update(extra)
    with open(f"{args.out}.manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------- commands


def _one_sample_curve(design_name, n, m, alpha):
    if design_name in ("wald", "wilson"):
        d = OneSampleDesign.build(n, m, alpha, design_name)
        return d.coverage, d.expected_length, d.breakpoints()
    t = binom_one.TABLE_BUILDERS[design_name.removeprefix("table-")](n, alpha)
    return t.coverage, t.expected_length, t.breakpoints()


def cmd_coverage_curve(args) -> int:
    started = time.perf_counter()
    if args.table_file:
        t = IntervalTable.read_csv(args.table_file)
        cov, el, bps = t.coverage, t.expected_length, t.breakpoints()
    else:
        cov, el, bps = _one_sample_curve(args.design, args.n, args.m, args.alpha)
    ps = set(np.linspace(0.0, 1.0, args.grid).tolist())
    ps.update(args.extra_p)
    if args.refine:
        for b in bps:
            ps.update(x for x in (b - 1e-9, b, b + 1e-9) if 0.0 <= x <= 1.0)
    out = Output(args, ["p", "coverage", "el"])
    for p in sorted(ps):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p={p} outside [0, 1]")
        out.add(p, cov(p), el(p))
    out.close(started)
    return EXIT_OK


def _area(interval, n, m, alpha):
    if interval in ("wald", "wilson") and m is not None:
        return binom_one.area_exact(OneSampleDesign.build(n, m, alpha, interval))
    return binom_one.area_exact(binom_one.TABLE_BUILDERS[interval.removeprefix("table-")](n, alpha))


def cmd_table_areas(args) -> int:
    started = time.perf_counter()
    levels = [1.0 - a for a in args.alpha_list]
    out = Output(args, ["n", "m", *[repr(round(lv, 12)) for lv in levels]])
    for n in args.n_list:
        for m in args.m_list:
            out.add(n, m, *[_area(args.interval, n, m, a) for a in args.alpha_list])
    out.close(started)
    return EXIT_OK


NORMAL_INTERVALS = ("C_N", "C_pN", "C_Nu", "C_NM", "C_pM", "z", "t")


def cmd_table_normal(args) -> int:
    started = time.perf_counter()
    out = Output(args, ["n", "m", "alpha", "interval", "cp", "el", "cp_se", "el_se", "method"])
    for n in args.n_list:
        for m in args.m_list:
            for a in args.alpha_list:
                plan = make_plan(m, a)
                for name in args.intervals:
                    if name in ("C_NM", "C_pM") and n % 2 == 0:
                        continue
                    if name == "C_N":
                        out.add(n, m, a, name, float(normal.coverage_cq(plan)), normal.el_cn(n, m, a),
                                0.0, 0.0, "exact")
                    elif name == "C_NM":
                        out.add(n, m, a, name, float(normal.coverage_cq(plan)), normal.el_cnm(n, m, a),
                                0.0, 0.0, "exact")
                    elif name == "C_Nu":
                        out.add(n, m, a, name, normal.coverage_cnu(n, m, a), normal.el_cnu(n, m, a),
                                0.0, 0.0, "exact")
                    elif name == "C_pM":
                        out.add(n, m, a, name, nonparam.coverage_cpm(n, m, a), nonparam.el_cpm(n, m, a),
                                0.0, 0.0, "exact")
                    elif name == "C_pN":
                        mode = nonparam.RAO_BLACKWELL if n <= nonparam.ENUM_CAP else nonparam.FULL_MC
                        cfg = McConfig(args.reps, args.seed, args.streams)
                        r = nonparam.cpn_eval(n, m, a, 1.0, mode, cfg)
                        out.add(n, m, a, name, r.coverage, r.el, r.coverage_se, r.el_se, mode)
                    elif name == "z":
                        out.add(n, m, a, name, 1.0 - a, normal.z_interval_el(n, a), 0.0, 0.0, "exact")
                    elif name == "t":
                        out.add(n, m, a, name, 1.0 - a, normal.t_interval_el(n, a), 0.0, 0.0, "exact")
    out.close(started)
    return EXIT_OK


def cmd_compare_area(args) -> int:
    started = time.perf_counter()
    n, m = args.n, args.m
    ref = OneSampleDesign.build(n, m, args.alpha_ref, "wilson")
    target = binom_one.area_exact(ref)
    out = Output(args, ["interval", "alpha", "level", "area", "residual", "flagged",
                        "min_coverage", "el_area"])

    def summarize(name, alpha, area, flagged, obj):
        low = binom_one.icp(obj.coverage, obj.breakpoints(), grid=args.icp_grid)
        out.add(name, alpha, 1.0 - alpha if alpha is not None else None, area, area - target, flagged,
                low.value, binom_one.el_area_exact(obj))

    summarize("C_wi", args.alpha_ref, target, False, ref)
    for name in args.intervals:
        if name == "C_wi":
            continue
        if name == "C_wa":
            build = lambda a: OneSampleDesign.build(n, m, a, "wald")  # noqa: E731
        elif name in binom_one.TABLE_BUILDERS:
            build = lambda a, b=binom_one.TABLE_BUILDERS[name]: b(n, a)  # noqa: E731
        else:
            raise ValueError(f"unknown interval {name!r}")
        cal = binom_one.calibrate_alpha(lambda a: binom_one.area_exact(build(a)), target, tol=args.tol)
        summarize(name, cal.alpha, cal.area, cal.flagged, build(cal.alpha))
    for path in args.table_files:
        t = IntervalTable.read_csv(path)
        if t.n != n:
            raise ValueError(f"{path}: table has n={t.n}, expected {n}")
        area = binom_one.area_exact(t)
        summarize(t.name, t.alpha, area, abs(area - target) > args.tol, t)
    out.close(started, {"reference_area": target})
    return EXIT_OK


def cmd_compare_cc(args) -> int:
    started = time.perf_counter()
    out = Output(args, ["n", "m", "alpha", "cp", "cp_se", "el_cpn", "el_cpn_se", "el_zstar", "el_z"])
    for n in args.n:
        mode = nonparam.RAO_BLACKWELL if n <= nonparam.ENUM_CAP else nonparam.FULL_MC
        r = nonparam.cpn_eval(n, args.m, args.alpha, 1.0, mode, McConfig(args.reps, args.seed, args.streams))
        cp = min(max(r.coverage, 1e-12), 1 - 1e-12)
        out.add(n, args.m, args.alpha, r.coverage, r.coverage_se, r.el, r.el_se,
                normal.z_star_el(cp, n), normal.z_interval_el(n, args.alpha))
    out.close(started)
    return EXIT_OK


def cmd_surface(args) -> int:
    started = time.perf_counter()
    d = TwoSampleDesign.build(args.n1, args.n2, args.m, args.alpha)
    g = binom_two.surface_grid(d, args.which, n_axis1=args.grid_axis1, n_p2=args.grid,
                               theta_range=tuple(args.theta_range), with_el=not args.no_el)
    out = Output(args, ["axis1", "p2", "coverage", "el"])
    for row in zip(g.axis1, g.p2, g.coverage, g.el):
        out.add(*row)
    summary = {"min_coverage": g.min_coverage, "fraction_below_level": g.fraction_below,
               "level": g.level, "points": len(g)}
    out.close(started, {"summary": summary})
    print(f"surface {args.which}: points={len(g)} min_coverage={g.min_coverage:.4f} "
          f"fraction_below_{g.level:g}={g.fraction_below:.4f}", file=sys.stderr if args.out is None else sys.stdout)
    return EXIT_OK


def cmd_validate(args) -> int:
    report = run_suite(args.suite, args.seed, args.module)
    for c in report.checks:
        tag = "PASS" if c.passed else "FAIL"
        stat = f"|diff|={c.score:.3g}" if c.kind == "enum" else f"z={c.score:+.3f}"
        print(f"{tag} [{c.pair}] {c.label}: {stat}")
    missing = uncovered()
    for mod, op in missing:
        print(f"FAIL [registry] {mod}.{op} has no oracle pairing")
    fails = report.failures()
    print(f"{len(report.checks) - len(fails)}/{len(report.checks)} checks passed "
          f"({args.suite} suite, seed {args.seed}, {report.seconds:.1f} s)")
    if fails or missing:
        print("failed: " + "; ".join(f"{c.pair}: {c.label}" for c in fails), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_replay(args) -> int:
    with open(args.manifest) as fh:
        argv = json.load(fh)["argv"]
    return main(argv)


# ---------------------------------------------------------------- parser


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _mc_flags(p):
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--streams", type=int, default=8)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bootcover", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=_version())
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coverage-curve", help="coverage and expected length over p (one sample)")
    p.add_argument("--design", default="wald",
                   choices=["wald", "wilson", *[f"table-{k}" for k in binom_one.TABLE_BUILDERS]],
                   help="wald/wilson: bootstrap C_wa/C_wi; table-*: deterministic intervals")
    p.add_argument("--table-file", help="IntervalTable CSV (y,lower,upper) instead of --design")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--grid", type=int, default=501)
    p.add_argument("--extra-p", type=float, nargs="*", default=[], help="additional p values")
    p.add_argument("--refine", action="store_true", help="add points either side of every jump")
    p.add_argument("--out")
    p.set_defaults(func=cmd_coverage_curve)

    p = sub.add_parser("table-areas", help="areas under coverage curves, rows (n, m), columns 1-alpha")
    p.add_argument("--n-list", type=int, nargs="+", required=True)
    p.add_argument("--m-list", type=int, nargs="+", required=True)
    p.add_argument("--alpha-list", type=float, nargs="+", required=True)
    p.add_argument("--interval", default="wilson",
                   choices=["wald", "wilson", *[f"table-{k}" for k in binom_one.TABLE_BUILDERS]])
    p.add_argument("--out")
    p.set_defaults(func=cmd_table_areas)

    p = sub.add_parser("table-normal", help="(CP, EL) for normal-mean intervals")
    p.add_argument("--n-list", type=int, nargs="+", required=True)
    p.add_argument("--m-list", type=int, nargs="+", required=True)
    p.add_argument("--alpha-list", type=float, nargs="+", required=True)
    p.add_argument("--intervals", nargs="+", default=list(NORMAL_INTERVALS), choices=NORMAL_INTERVALS)
    _mc_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_table_normal)

    p = sub.add_parser("compare-area", help="calibrate intervals to the area of C_wi")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--alpha-ref", type=float, default=0.1)
    p.add_argument("--intervals", nargs="*", default=["wald", "C_wa", "wilson"])
    p.add_argument("--table-files", nargs="*", default=[])
    p.add_argument("--tol", type=float, default=0.005, help="flag calibrations with larger area residual")
    p.add_argument("--icp-grid", type=int, default=2000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare_area)

    p = sub.add_parser("compare-cc", help="C_pN against z-intervals at its confidence coefficient")
    p.add_argument("--n", type=int, nargs="+", default=[5])
    p.add_argument("--m", type=int, default=5000)
    p.add_argument("--alpha", type=float, default=0.01)
    _mc_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare_cc)

    p = sub.add_parser("surface", help="two-sample coverage surface")
    p.add_argument("--which", choices=["d", "theta"], required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--grid", type=int, default=101, help="points along p2")
    p.add_argument("--grid-axis1", type=int, default=None, help="points along d or theta")
    p.add_argument("--theta-range", type=float, nargs=2, default=[1.0, 100.0])
    p.add_argument("--no-el", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("validate", help="run exact-vs-oracle pairings")
    p.add_argument("--suite", choices=[QUICK, FULL], default=QUICK)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--module", default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"bootcover {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
