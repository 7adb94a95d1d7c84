"""Command line entry point: ``qjp-lab run`` and ``qjp-lab acceptance``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import ParseError, ValidationError
from .runner import DEFAULT_SEED, run_scenario
from .scenario import load_scenario

log = logging.getLogger("qjplab")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qjp-lab", description="Quasi-joint-probability and weak-measurement lab")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario JSON file")
    run.add_argument("scenario", type=Path)
    run.add_argument("--out", type=Path, default=None, help="output directory (QJPLAB_OUT overrides)")
    run.add_argument("--jobs", type=int, default=1, help="concurrent sweep points")
    run.add_argument("--seed", type=int, default=None, help=f"random seed (default: scenario seed, else {DEFAULT_SEED})")
    run.add_argument("--plot", action="store_true", help="render figures (PNG) and gnuplot scripts")

    acc = sub.add_parser("acceptance", help="run the full acceptance suite")
    acc.add_argument("--out", type=Path, default=None, help="output directory (QJPLAB_OUT overrides)")
    acc.add_argument("--jobs", type=int, default=1)
    acc.add_argument("--seed", type=int, default=DEFAULT_SEED)
    acc.add_argument("--plot", action="store_true")
    return parser


def output_dir(cli_value, scenario_value=None, default="qjplab-out") -> Path:
    env = os.environ.get("QJPLAB_OUT")
    if env:
        return Path(env)
    if cli_value is not None:
        return Path(cli_value)
    if scenario_value:
        return Path(scenario_value)
    return Path(default)


def _emit(bundle, out: Path, plot: bool) -> int:
    files = bundle.write(out)
    if plot:
        from .plots import write_plots

        files += write_plots(bundle, out)
    for check in bundle.checks:
        if not check.passed:
            print(f"FAIL {check.name}: measured {check.measured:.3e} (tolerance {check.tolerance:.1e})", file=sys.stderr)
    for err in bundle.errors:
        print(f"ERROR {err['stage']}: {err['type']}: {err['message']}", file=sys.stderr)
    n_fail = sum(1 for c in bundle.checks if not c.passed)
    status = "PASS" if bundle.passed else "FAIL"
    print(f"{status} {bundle.name}: {len(bundle.checks) - n_fail}/{len(bundle.checks)} checks passed, "
          f"{len(bundle.errors)} errors; {len(files)} files in {out}")
    return 0 if bundle.passed else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.jobs < 1:
        print("--jobs must be at least 1", file=sys.stderr)
        return 2

    if args.command == "acceptance":
        from .acceptance import run_acceptance

        bundle = run_acceptance(seed=args.seed, jobs=args.jobs)
        return _emit(bundle, output_dir(args.out, default="qjplab-acceptance"), args.plot)

    try:
        scenario = load_scenario(args.scenario)
    except OSError as exc:
        print(f"cannot read {args.scenario}: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"{args.scenario}: parse error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        for path, reason in exc.issues:
            print(f"{args.scenario}: {path}: {reason}", file=sys.stderr)
        return 2
    log.info("running %s scenario %r", scenario.kind, scenario.name)
    bundle = run_scenario(scenario, seed=args.seed, jobs=args.jobs)
    plot = args.plot or scenario.output.plot
    return _emit(bundle, output_dir(args.out, scenario.output.dir), plot)


if __name__ == "__main__":
    sys.exit(main())
