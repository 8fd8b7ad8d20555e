"""Command-line entry point.

Arm indices on the command line are 1-based; the library is 0-based.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import bounds, harness
from .allocation import gna_target_weights
from .selftest import run_selftest


def _floats(text: str) -> list:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _fmt(values) -> str:
    return " ".join(f"{v:.6f}" for v in values)


def cmd_run(args) -> int:
    config = harness.read_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, master_seed=args.seed)
    out = Path(args.output or config.output or Path(args.config).with_suffix(".results.csv"))
    summary = harness.run_experiment(config, workers=args.workers)
    harness.write_results(summary, out)
    if args.json:
        harness.write_cell_json(summary, args.json)
    print(f"wrote {out}")
    return 0


def cmd_weights(args) -> int:
    best = args.best - 1
    if not 0 <= best < len(args.sigmas):
        raise ValueError(f"--best must be between 1 and {len(args.sigmas)}")
    print(_fmt(gna_target_weights(best, args.sigmas)))
    return 0


def cmd_bounds(args) -> int:
    if args.family == "gaussian":
        if args.sigmas is None:
            raise ValueError("--sigmas is required for the gaussian family")
        sig = np.asarray(args.sigmas)
        for a in range(sig.size):
            print(f"V({a + 1}) = {bounds.rate_V(a, sig):.6f}")
        report = bounds.v_star(lambda mu: sig, bounds.ThetaGrid(0.0, 0.0), sig.size)
        print(f"V* = {report.v_star:.6f} (arm {report.arm + 1})")
        print(f"weights = {_fmt(report.weights)}")
        return 0
    if args.k is None:
        raise ValueError("--k is required for the bernoulli family")
    lo, hi = args.theta
    cf = bounds.bernoulli_closed_forms(args.k, bounds.ThetaGrid(lo, hi, args.step))
    print(f"w_best={cf.w_best:.6f}")
    print(f"w_other={cf.w_other:.6f}")
    print(f"V*_printed={cf.v_star_printed:.6f}")
    print(f"V*_derived={cf.v_star_derived:.6f}")
    print(f"mu_dagger={cf.mu_dagger:.6f}")
    return 0


def cmd_decay(args) -> int:
    path = Path(args.results)
    if not path.is_file():
        raise FileNotFoundError(f"results not found: {path}")
    rows = harness.read_results(path)
    for name in sorted({r["algorithm"] for r in rows}):
        points = [(r["T"], r["p_hat"]) for r in rows if r["algorithm"] == name]
        try:
            fit = harness.fit_decay(points)
        except ValueError as exc:
            print(f"{name}: {exc}")
            continue
        print(f"{name}: slope={fit.slope:.6f} intercept={fit.intercept:.6f} "
              f"r2={fit.r_squared:.6f} slope_se={fit.slope_se:.6f} points={fit.n_points}")
    return 0


def cmd_selftest(args) -> int:
    return 0 if run_selftest() else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gnabai", description="Fixed-budget best-arm identification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a Monte Carlo experiment from a JSON config")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--seed", type=int, default=None, help="override master_seed")
    p.add_argument("--output", default=None, help="results CSV (default: config 'output')")
    p.add_argument("--json", default=None, help="also write per-cell JSON here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("weights", help="print generalized Neyman weights")
    p.add_argument("--sigmas", type=_floats, required=True)
    p.add_argument("--best", type=int, required=True, help="1-based best arm")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("bounds", help="print rate constants")
    p.add_argument("--family", choices=("gaussian", "bernoulli"), required=True)
    p.add_argument("--sigmas", type=_floats)
    p.add_argument("--k", type=int)
    p.add_argument("--theta", type=_floats, default=[0.1, 0.9], help="lower,upper of the mean grid")
    p.add_argument("--step", type=float, default=1e-3)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("decay", help="fit log error rate against T per algorithm")
    p.add_argument("results")
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("selftest", help="run the fast invariant checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
