"""Command line front end.

Subcommands mirror the library layers: validate a config, dump stopping
cylinders, run the separation scan, estimate dimensions, build a
tangent witness, or emit the combined report.  Output is deterministic:
floats go through one format, tables end every line with a bare
newline, and reruns produce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

from . import dimension as dim
from . import separation as sep
from . import tangents as tg
from .budget import DEFAULT_WORD_BUDGET, ENV_VAR
from .cylinders import scale_grid, stopping_records, word_str
from .errors import ConformalDimError
from .system import load_system_file

FLOAT_FMT = "%.12g"


def _fmt(x):
    if isinstance(x, float):
        if x == 0.0:
            x = 0.0  # collapse negative zero
        return FLOAT_FMT % x
    return str(x)


def _kv(key, value):
    return f"{key}={_fmt(value)}"


class _Out:
    """Accumulates lines and CSV tables into one deterministic blob."""

    def __init__(self):
        self.buf = io.StringIO()

    def line(self, text=""):
        self.buf.write(text + "\n")

    def kv(self, key, value):
        self.line(_kv(key, value))

    def table(self, header, rows):
        writer = csv.writer(self.buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(c) for c in row])

    def text(self):
        return self.buf.getvalue()


def build_parser():
    parser = argparse.ArgumentParser(
        prog="conformal-dim",
        description="Overlap diagnostics and dimension estimates for "
                    "one-dimensional conformal iterated function systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True,
                       help="system config file (interval/map lines)")
        p.add_argument("--output", default=None,
                       help="write here instead of stdout")
        p.add_argument("--format", choices=("csv", "record"), default="csv")
        p.add_argument("--depth", type=int, default=None,
                       help="scan depth on the geometric scale grid")
        p.add_argument("--budget", type=int, default=None,
                       help=f"word enumeration cap (default {ENV_VAR} "
                            f"or {DEFAULT_WORD_BUDGET})")
        p.add_argument("--threads", type=int, default=1,
                       help="accepted for interface stability; "
                            "execution is serial")
        p.add_argument("--seed", type=int, default=0,
                       help="accepted for interface stability; every "
                            "estimator is deterministic")

    p = sub.add_parser("validate", help="parse, normalize, and summarize")
    common(p)

    p = sub.add_parser("cylinders", help="stopping-set cylinders at a scale")
    common(p)
    p.add_argument("--scale", type=float, default=None,
                   help="stopping scale b in (0, 1]; default from --depth")

    p = sub.add_parser("separation", help="multiplicity and identity-limit scan")
    common(p)
    p.add_argument("--theta-fail", type=float, default=sep.THETA_FAIL)
    p.add_argument("--theta-hold", type=float, default=sep.THETA_HOLD)

    p = sub.add_parser("dimension", help="box / pressure / two-scale estimates")
    common(p)
    p.add_argument("--method", choices=("box", "bowen", "assouad", "all"),
                   default="all")
    p.add_argument("--decades", type=int, nargs=2, default=(2, 3),
                   metavar=("WINDOW", "RATIO"),
                   help="window and ratio decade counts for the "
                        "two-scale estimator")

    p = sub.add_parser("tangent", help="zoom-ladder pseudo-tangent witness")
    common(p)
    p.add_argument("--i", type=int, default=3, help="window parameter")
    p.add_argument("--m-max", type=int, default=200)
    p.add_argument("--window-lo", type=float, default=tg.WINDOW_LO_FACTOR)
    p.add_argument("--force", action="store_true",
                   help="build even when the separation verdict is not "
                        "WSP_FAILING")

    p = sub.add_parser("report", help="combined dichotomy report")
    common(p)
    return parser


def _cmd_validate(system, args, out):
    v = system.validation
    out.kv("maps", system.alphabet_size)
    out.kv("hull_lo", v.hull_before.lo)
    out.kv("hull_hi", v.hull_before.hi)
    out.kv("x0", system.x0)
    out.kv("x1", system.x1)
    out.kv("f1_index", system.f1_index)
    out.kv("diam_ratio", system.diam_ratio)
    out.kv("c_min", system.c_min)
    for i, c in enumerate(v.contraction_constants):
        out.kv(f"contraction_{i}", c)
    for i, o in enumerate(v.orientation):
        out.kv(f"orientation_{i}", o)
    out.kv("warnings", ";".join(v.warnings) if v.warnings else "none")


def _cmd_cylinders(system, args, out):
    b = args.scale
    if b is None:
        depth = args.depth if args.depth is not None else 4
        b = scale_grid(system, depth)[-1]
    records = stopping_records(system, b, args.budget)
    rows = [(word_str(r.word), r.image.lo, r.image.hi, r.diam,
             r.deriv_lo, r.deriv_hi) for r in records]
    if args.format == "csv":
        out.table(("word", "lo", "hi", "diam", "deriv_lo", "deriv_hi"), rows)
        out.line(_kv("scale", b) + " " + _kv("count", len(rows)))
    else:
        out.kv("scale", b)
        out.kv("count", len(rows))
        for row in rows:
            out.line(" ".join(_fmt(c) for c in row))


def _separation_rows(report):
    rows = []
    for scan, decay in zip(report.scans, report.ilc_decay):
        if scan.pairs:
            p = scan.pairs[0]
            v, w = word_str(p.v), word_str(p.w)
        else:
            v = w = ""
        rows.append((scan.b, scan.multiplicity, scan.witness_x,
                     decay if decay != float("inf") else "", v, w))
    return rows


def _separation_summary(report, out):
    out.line(_kv("verdict", report.verdict)
             + " " + _kv("gamma_observed", report.gamma_observed)
             + " " + _kv("scales", len(report.b_grid)))


def _cmd_separation(system, args, out):
    report = sep.separation_verdict(
        system, depth=args.depth, theta_fail=args.theta_fail,
        theta_hold=args.theta_hold, budget=args.budget)
    if args.format == "csv":
        out.table(("b", "multiplicity", "witness_x", "min_ilc_distance",
                   "pair_v", "pair_w"), _separation_rows(report))
    else:
        for row in _separation_rows(report):
            out.line(" ".join(_fmt(c) for c in row))
    _separation_summary(report, out)


def _dimension_estimates(system, args):
    limit = args.budget
    out = {}
    if args.method in ("box", "all"):
        out["box"] = dim.box_dimension(system, budget=limit)
    if args.method in ("bowen", "all"):
        depth = args.depth if args.depth is not None else \
            dim._default_bowen_depth(system, limit or DEFAULT_WORD_BUDGET)
        out["bowen"] = dim.bowen_dimension(system, depth, budget=limit)
    if args.method in ("assouad", "all"):
        out["assouad"] = dim.assouad_estimate(
            system, window_decades=args.decades[0],
            ratio_decades=args.decades[1], budget=limit)
    return out


def _emit_estimate(name, est, args, out):
    if args.format == "csv":
        out.table((f"{name}_x", f"{name}_y"), est.fit_points)
    out.line(_kv("method", name) + " " + _kv("value", est.value)
             + " " + _kv("residual", est.residual)
             + f" scales='{est.scales_used}'")


def _cmd_dimension(system, args, out):
    for name, est in _dimension_estimates(system, args).items():
        _emit_estimate(name, est, args, out)


def _cmd_tangent(system, args, out):
    pairs = tg.select_tangent_pairs(system, depth=args.depth,
                                    force=args.force, budget=args.budget)
    witness = tg.build_tangent_witness(
        system, pairs, args.i, window_lo_factor=args.window_lo,
        m_max=args.m_max, budget=args.budget)
    rows = [(s.n, s.k, s.m, s.point, s.increment) for s in witness.steps]
    if args.format == "csv":
        out.table(("n", "k_n", "m_n", "point", "increment"), rows)
    else:
        out.kv("T_word", word_str(witness.T_word))
        out.line("points=" + ",".join(_fmt(p) for p in witness.points))
        for row in rows:
            out.line(" ".join(_fmt(c) for c in row))
    covers = "yes" if witness.left_gap <= witness.epsilon else "no"
    out.line(_kv("i", witness.i) + " " + _kv("epsilon", witness.epsilon)
             + " " + _kv("left_gap", witness.left_gap)
             + " " + _kv("alpha", witness.alpha)
             + " " + _kv("kappa", witness.kappa)
             + " " + _kv("drift", witness.recheck_drift)
             + " " + _kv("stop_reason", witness.stop_reason)
             + " " + _kv("covers_window", covers))


def _cmd_report(system, args, out):
    report = dim.dichotomy_report(system, budget=args.budget,
                                  separation_depth=args.depth)
    out.kv("branch", report.branch)
    out.kv("hausdorff", report.hausdorff.value)
    out.kv("hausdorff_method", report.hausdorff.method)
    out.kv("hausdorff_residual", report.hausdorff.residual)
    out.kv("bowen", report.bowen.value)
    out.kv("box", report.box.value)
    out.kv("assouad", report.assouad.value)
    out.kv("assouad_residual", report.assouad.residual)
    out.kv("verdict", report.separation.verdict)
    out.kv("gamma_observed", report.separation.gamma_observed)
    out.kv("full_hausdorff_caveat",
           1 if report.full_hausdorff_caveat else 0)
    out.line()
    out.table(("b", "multiplicity", "witness_x", "min_ilc_distance",
               "pair_v", "pair_w"), _separation_rows(report.separation))
    for name in ("bowen", "box", "assouad"):
        est = getattr(report, name)
        out.line()
        out.table((f"{name}_x", f"{name}_y"), est.fit_points)


_COMMANDS = {
    "validate": _cmd_validate,
    "cylinders": _cmd_cylinders,
    "separation": _cmd_separation,
    "dimension": _cmd_dimension,
    "tangent": _cmd_tangent,
    "report": _cmd_report,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = _Out()
    try:
        system = load_system_file(args.config)
        _COMMANDS[args.command](system, args, out)
    except ConformalDimError as e:
        sys.stderr.write(e.record() + "\n")
        return e.exit_code
    except OSError as e:
        sys.stderr.write(f"error=io detail='{e}'\n")
        return 2
    except Exception as e:  # noqa: BLE001 - structured last resort
        sys.stderr.write(f"error=internal detail='{type(e).__name__}: {e}'\n")
        return 1
    text = out.text()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
