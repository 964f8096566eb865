"""Command-line entry point: ``freudspline <subcommand> [--config FILE] [flags]``."""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .analysis import weighted_lq_norm, weighted_sobolev_norm
from .bench import emit_report, load_config, run_convergence
from .quadrature import build_rule, export_rule
from .spline_space import ensemble_report, fooling_m, fooling_spline, write_ensemble_csv
from .weight import rate_exponent


def _common(parser, default_out):
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--lambda", dest="lam", type=float, help="weight exponent")
    parser.add_argument("--a", type=float, help="weight scale")
    parser.add_argument("--b", type=float, help="weight shift")
    parser.add_argument("--ell", type=int, help="half the B-spline order")
    parser.add_argument("--p", help="smoothness norm exponent (number or inf)")
    parser.add_argument("--q", help="error norm exponent (number or inf)")
    parser.add_argument("--r", type=int, help="smoothness order")
    parser.add_argument("--rho", type=float, help="truncation factor (default: derived bound)")
    parser.add_argument("--d", type=int, help="dimension (1..3)")
    parser.add_argument("--op", choices=["Q", "P", "Qbar", "Pbar"], help="operator")
    parser.add_argument("--nmin", type=int, help="smallest sample budget")
    parser.add_argument("--nmax", type=int, help="largest sample budget")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--function", help="corpus id (gauss, oscil, kink_NU, heavy_BETA, poly_K) or witness")
    parser.add_argument("--out", help=f"output path (default {default_out})")
    parser.set_defaults(default_out=default_out)


def _config(args, op=None):
    over = {k: getattr(args, k, None) for k in
            ("lam", "a", "b", "ell", "p", "q", "r", "rho", "d", "nmin", "nmax", "seed", "function",
             "out")}
    over["op"] = op or getattr(args, "op", None)
    cfg = load_config(args.config, **over)
    if args.out is None and args.config is None:
        cfg.out = args.default_out
    return cfg


def _print_summary(report, paths):
    s = report.summary()
    slope = "exact" if s["fitted_slope"] is None and report.status == "exact" else s["fitted_slope"]
    print(f"predicted exponent: {s['predicted_exponent']:.4f}")
    print(f"fitted slope:       {slope if isinstance(slope, str) else f'{slope:.4f}'}")
    print(f"status: {s['status']}  passed: {s['passed']}")
    for key, path in paths.items():
        print(f"wrote {key}: {path}")


def cmd_recover(args):
    config = _config(args)
    report = run_convergence(config)
    _print_summary(report, emit_report(report, config.out))
    return 0 if report.passed else 1


def cmd_integrate(args):
    config = _config(args, op="quad-" + (args.op or "Q").replace("bar", ""))
    report = run_convergence(config)
    _print_summary(report, emit_report(report, config.out))
    return 0 if report.passed else 1


def _ms(args):
    return [int(v) for v in args.ms.split(",")] if args.ms else [16, 32, 64, 128, 256]


def cmd_inequalities(args):
    config = _config(args)
    cfg = config.recovery_config()
    ms = _ms(args)
    p, q = config.p, config.q
    rows, out = [], []
    jobs = [("node", None, 0), ("coeff", None, 0)]
    if p != q:
        jobs.append(("nikolskii", q, 0))
    jobs += [("bernstein", None, r) for r in range(1, min(config.r, 2 * config.ell - 1) + 1)]
    for kind, qq, r in jobs:
        rep = ensemble_report(kind, ms, cfg, p, qq, r, size=args.size, seed=config.seed)
        rows.extend(rep["rows"])
        out.append((kind, r, rep))
        print(f"{kind:10s} r={r} profile={rep['profile']:14s} max/min={rep['spread']:.3f} "
              f"drift={rep['drift']:+.3f}")
    write_ensemble_csv(rows, config.out)
    print(f"wrote {config.out}")
    return 0


def cmd_fooling(args):
    config = _config(args)
    cfg = config.recovery_config()
    ns = [int(v) for v in args.ns.split(",")] if args.ns else [8, 16, 32]
    p, q, r = config.p, config.q, config.r
    expo = rate_exponent(r, p, q, config.lam)
    rng = np.random.default_rng(config.seed)
    with open(config.out, "w", newline="", encoding="utf-8") as fh:
        w_csv = csv.writer(fh, lineterminator="\n")
        w_csv.writerow(["n", "m", "max_abs_at_points", "sobolev_norm", "lq_norm", "normalized"])
        for n in ns:
            m = fooling_m(n, cfg, p <= q)
            bound = cfg.grid(m).bound
            pts = rng.uniform(-bound, bound, n)
            phi = fooling_spline(pts, n, r, p, q, cfg, m)
            z = float(np.max(np.abs(phi(pts))))
            s = weighted_sobolev_norm(phi, r, p, cfg.weight)
            lq = weighted_lq_norm(phi, q, cfg.weight)
            norm = lq / n ** (-expo)
            w_csv.writerow([n, m, f"{z:.17g}", f"{s:.17g}", f"{lq:.17g}", f"{norm:.17g}"])
            print(f"n={n:4d} m={m:4d} |phi(points)|={z:.2e} sobolev={s:.12f} normalized={norm:.6g}")
    print(f"wrote {config.out}")
    return 0


def cmd_rule(args):
    if args.action != "export":
        raise SystemExit(f"unknown rule action {args.action!r}")
    config = _config(args)
    cfg = config.recovery_config()
    kind = args.op or "Q"
    rule = build_rule(kind, args.m, cfg)
    export_rule(rule, config.out)
    print(f"wrote {len(rule)} nodes to {config.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="freudspline",
                                     description="Freud-weighted spline recovery and quadrature")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("recover", help="recovery convergence sweep")
    _common(p, "recover.csv")
    p.set_defaults(func=cmd_recover)
    p = sub.add_parser("integrate", help="quadrature convergence sweep")
    _common(p, "integrate.csv")
    p.set_defaults(func=cmd_integrate)
    p = sub.add_parser("inequalities", help="spline inequality ensembles")
    _common(p, "inequalities.csv")
    p.add_argument("--ms", help="comma-separated m values")
    p.add_argument("--size", type=int, default=64, help="splines per ensemble")
    p.set_defaults(func=cmd_inequalities)
    p = sub.add_parser("fooling", help="lower-bound witness splines")
    _common(p, "fooling.csv")
    p.add_argument("--ns", help="comma-separated point counts")
    p.set_defaults(func=cmd_fooling)
    p = sub.add_parser("rule", help="quadrature rule tools")
    p.add_argument("action", choices=["export"])
    _common(p, "rule.csv")
    p.add_argument("--m", type=int, default=32, help="grid parameter")
    p.set_defaults(func=cmd_rule)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
