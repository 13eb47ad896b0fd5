"""Command-line front end: ``welrci fit``, ``welrci simulate``, ``welrci npmle``."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .calibration import DEFAULT_B, calibrate
from .censoring import SampleError, Scheme, parse_sample
from .intervals import DegenerateError, feasible_range, welrci
from .npmle import ENGINES, ConvergenceError, fit_npmle
from .simulation import PRESET_DEFAULTS, StudyConfig, load_config, with_overrides

EXIT_INPUT = 2
EXIT_DEGENERATE = 3

FIT_FIELDS = ["q", "alpha", "k", "c_n", "rho_hat", "theta_hat", "x_l", "x_u", "n_b",
              "feasible_lo", "feasible_hi"]


def _levels(text: str) -> tuple:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}") from None
    if not values or not all(0 < v < 1 for v in values):
        raise argparse.ArgumentTypeError("levels must lie in (0, 1)")
    return values


def _order(text: str):
    if text == "auto":
        return None
    if text.isdigit() and 0 <= int(text) <= 4:
        return int(text)
    raise argparse.ArgumentTypeError("k must be 'auto' or an integer in 0..4")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _finite(x):
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _fit_record(sample, dist, q, args) -> dict:
    cal = calibrate(sample, q, args.alpha, args.k, args.boot_reps, args.grid_step,
                    seed=args.seed, smoothed=args.smooth, dist=dist, tol=args.tol,
                    max_iter=args.max_iter, engine=args.engine)
    ci = welrci(dist, q, cal.c_n, args.smooth, args.alpha, cal.k)
    lo, hi = feasible_range(dist, q, args.smooth)
    diag = {
        "scheme": sample.scheme.value,
        "n": sample.n,
        "m": dist.m,
        "smoothed": args.smooth,
        "engine": args.engine,
        "boot_reps": args.boot_reps,
        "degenerate_replicates": cal.degenerate,
        "left_boundary": ci.diagnostics.get("left_boundary"),
        "right_boundary": ci.diagnostics.get("right_boundary"),
        "evaluations": ci.diagnostics.get("evaluations"),
    }
    if cal.n_b is not None:
        diag["grid"] = list(cal.grid)
        diag["xi"] = [_finite(v) for v in cal.xi]
    return {
        "q": q, "alpha": args.alpha, "k": cal.k, "c_n": cal.c_n, "rho_hat": cal.rho_hat,
        "theta_hat": cal.theta_hat, "x_l": ci.x_l, "x_u": ci.x_u, "n_b": cal.n_b,
        "feasible_range": [lo, hi], "diagnostics": diag,
    }


def cmd_fit(args) -> int:
    sample = parse_sample(_read(args.input), args.scheme)
    dist = fit_npmle(sample, args.tol, args.max_iter, args.engine)[0]
    records = [_fit_record(sample, dist, q, args) for q in args.q]
    if args.format == "json":
        payload = records[0] if len(records) == 1 else records
        json.dump(payload, sys.stdout, indent=2, default=_finite)
        sys.stdout.write("\n")
    else:
        writer = csv.DictWriter(sys.stdout, FIT_FIELDS, lineterminator="\n")
        writer.writeheader()
        for r in records:
            row = {k: r[k] for k in FIT_FIELDS if k in r}
            row["feasible_lo"], row["feasible_hi"] = r["feasible_range"]
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return 0


def cmd_npmle(args) -> int:
    sample = parse_sample(_read(args.input), args.scheme)
    dist, report = fit_npmle(sample, args.tol, args.max_iter, args.engine)
    if args.format == "json":
        payload = dist.to_dict()
        payload["iterations"] = report.iterations
        payload["final_sup_change"] = report.final_sup_change
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(dist.to_csv())
    return 0


def cmd_simulate(args) -> int:
    overrides = dict(n=args.n, reps=args.reps, B=args.boot_reps, seed=args.seed,
                     methods=args.methods, q=args.q, alpha=args.alpha, d=args.grid_step,
                     workers=args.workers, tol=args.tol, max_iter=args.max_iter,
                     engine=args.engine)
    name = args.preset.lower()
    if name in PRESET_DEFAULTS:
        if args.n is None:
            raise SystemExit("simulate: --n is required with a preset")
        config = StudyConfig.from_preset(name, args.n)
        config = with_overrides(config, **{k: v for k, v in overrides.items() if k != "n"})
    else:
        config = load_config(args.preset, **overrides)

    def progress(done, total):
        if args.verbose:
            print(f"\r{done}/{total} trials", end="", file=sys.stderr, flush=True)

    from .simulation import run_study

    report = run_study(config, progress)
    if args.verbose:
        print(file=sys.stderr)
    print(report.format())
    if report.flagged:
        print("warning: more than 10% of trials were degenerate for some rows",
              file=sys.stderr)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        report.write_csv(out.with_suffix(".csv"))
        report.write_json(out.with_suffix(".json"))
    return 0


def _common(p: argparse.ArgumentParser, engine_default="auto"):
    p.add_argument("--tol", type=float, default=1e-3, help="EM stopping tolerance")
    p.add_argument("--max-iter", type=int, default=10000, help="EM iteration cap")
    p.add_argument("--engine", choices=ENGINES, default=engine_default,
                   help="'auto' uses closed forms where they exist, 'em' forces EM")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="welrci",
        description="Weighted empirical likelihood confidence intervals for quantiles "
                    "under censoring.")
    sub = parser.add_subparsers(dest="command", required=True)
    schemes = [s.value for s in Scheme]

    fit = sub.add_parser("fit", help="interval for one dataset")
    fit.add_argument("--scheme", required=True, choices=schemes)
    fit.add_argument("--input", required=True, help="CSV file, or - for stdin")
    fit.add_argument("--q", type=_levels, default=(0.5,), help="level(s), comma separated")
    fit.add_argument("--alpha", type=float, default=0.10)
    fit.add_argument("--k", type=_order, default=None, help="expansion order: auto or 0..4")
    fit.add_argument("--no-smooth", dest="smooth", action="store_false",
                     help="use the step d.f. (WELRCI0)")
    fit.add_argument("--boot-reps", type=int, default=DEFAULT_B)
    fit.add_argument("--grid-step", type=int, default=None,
                     help="m-out-of-n grid step d (default n // 10)")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--format", choices=("json", "csv"), default="json")
    _common(fit)
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", help="Monte Carlo coverage study")
    sim.add_argument("--preset", required=True,
                     help="table1..table5 or a key = value config file")
    sim.add_argument("--n", type=int, default=None)
    sim.add_argument("--reps", type=int, default=None)
    sim.add_argument("--boot-reps", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--methods", type=lambda s: tuple(s.split(",")), default=None,
                     help="e.g. 1-WELRCI,auto-WELRCI,WELRCI0,SQBPCI,QBPCI")
    sim.add_argument("--q", type=_levels, default=None)
    sim.add_argument("--alpha", type=float, default=None)
    sim.add_argument("--grid-step", type=int, default=None)
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument("--out", default=None, help="writes <out>.csv and <out>.json")
    sim.add_argument("-v", "--verbose", action="store_true")
    sim.add_argument("--tol", type=float, default=None)
    sim.add_argument("--max-iter", type=int, default=None)
    sim.add_argument("--engine", choices=ENGINES, default=None)
    sim.set_defaults(func=cmd_simulate)

    np_ = sub.add_parser("npmle", help="print the NPMLE as w,p rows")
    np_.add_argument("--scheme", required=True, choices=schemes)
    np_.add_argument("--input", required=True, help="CSV file, or - for stdin")
    np_.add_argument("--format", choices=("csv", "json"), default="csv")
    _common(np_)
    np_.set_defaults(func=cmd_npmle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SampleError, FileNotFoundError) as exc:
        print(f"welrci: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DegenerateError, ConvergenceError) as exc:
        print(f"welrci: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"welrci: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
