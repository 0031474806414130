"""Command-line front end: ``optensor {run,compare,verify,fit-slope}``.

Exit codes: 0 success, 2 configuration or input error, 3 solver error,
4 verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .errors import ConfigError, SolverError
from .harness.config import load_config
from .harness.runner import OUTPUT_ENV, compare, format_summary, run
from .harness.slopes import fit_slope
from .harness.traceio import read_trace_csv
from .harness.verify import SUITES, run_suites

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected k_lo:k_hi, got {text!r}") from None
    return lo, hi


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    res = run(cfg)
    tr = res.trace
    print(f"{cfg.method} on {cfg.problem.kind} d={cfg.problem.dim}: K={tr.K}, "
          f"oracle calls={res.metadata['oracle_calls']}, final gap={tr.gaps[-1]:.3e}")
    print(f"trace: {res.csv_path}")
    print(f"metadata: {res.meta_path}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    configs = [load_config(p) for p in args.configs]
    summary = compare(configs, jobs=args.jobs, out=args.out)
    print(json.dumps(summary, indent=2) if args.json else format_summary(summary))
    return EXIT_OK


def _cmd_verify(args) -> int:
    reports = run_suites(args.suite)
    for rep in reports:
        for check in rep.checks:
            if args.verbose or not check.passed:
                print(check.line())
        print(rep.summary())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def _cmd_fit_slope(args) -> int:
    path = Path(args.csv)
    try:
        trace = read_trace_csv(path)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read trace: {exc.strerror}") from exc
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed trace: {exc}") from exc
    lo, hi = args.range
    try:
        fit = fit_slope(trace, lo, hi, args.floor)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(json.dumps(asdict(fit)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optensor", description="Run, compare and verify second-order tensor methods.",
        epilog=f"Set {OUTPUT_ENV} to redirect all output directories.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configured experiment and write its trace")
    p.add_argument("config", help="JSON experiment config")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("compare", help="run several methods on one problem and tabulate costs")
    p.add_argument("configs", nargs="+", help="two or more JSON configs sharing a problem")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--out", type=Path, default=None, help="write the summary as JSON here")
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("verify", help="run a bound-verification suite")
    p.add_argument("suite", choices=list(SUITES) + ["all"])
    p.add_argument("-v", "--verbose", action="store_true", help="print passing checks too")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("fit-slope", help="fit log(gap) against log(k) on a trace CSV")
    p.add_argument("csv", help="trace CSV written by 'run'")
    p.add_argument("--range", type=_parse_range, required=True, metavar="K_LO:K_HI")
    p.add_argument("--floor", type=float, default=1e-11, help="ignore gaps at or below this")
    p.set_defaults(func=_cmd_fit_slope)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
