"""Command-line interface: run scenario files, execute the experiment
suites, and verify design identities.

Exit codes: 0 success, 2 usage error, 3 failed verification.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments.config import load_scenario_file
from .experiments.runner import run_suite, run_sweep
from .experiments.suites import UnknownSuite, list_suites, load_suite
from .lti import InvalidInput
from .verification import run_all_checks

USAGE_ERROR = 2
VERIFY_ERROR = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adrc-lab",
        description="Design, simulate and benchmark linear active "
                    "disturbance rejection controllers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario (or sweep) file")
    p_run.add_argument("scenario_file", type=Path)
    p_run.add_argument("--out", type=Path, required=True,
                       help="output directory for CSVs and the figure")
    p_run.add_argument("--workers", type=int, default=None)

    p_suite = sub.add_parser("suite", help="run one of the built-in experiment suites")
    p_suite.add_argument("suite_id")
    p_suite.add_argument("--out", type=Path, required=True)
    p_suite.add_argument("--workers", type=int, default=None)

    sub.add_parser("list-suites", help="list available suite ids")

    p_verify = sub.add_parser(
        "verify", help="check pole placement and the state-space equivalence")
    p_verify.add_argument("--seed", type=int, default=2023)
    return parser


def _cmd_run(args) -> int:
    scenario, sweep = load_scenario_file(args.scenario_file)
    run_sweep(scenario, sweep, args.out, workers=args.workers,
              name=args.scenario_file.stem)
    print(f"wrote results to {args.out}")
    return 0


def _cmd_suite(args) -> int:
    suite = load_suite(args.suite_id)
    suite_dir = run_suite(suite, args.out, workers=args.workers)
    print(f"suite {suite.suite_id}: wrote {suite_dir}")
    return 0


def _cmd_list(_args) -> int:
    for suite_id in list_suites():
        print(suite_id)
    return 0


def _cmd_verify(args) -> int:
    results = run_all_checks(seed=args.seed)
    width = max(len(r.name) for r in results)
    all_passed = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        all_passed &= r.passed
        print(f"{r.name:<{width}}  n={r.samples:<4d} "
              f"max dev {r.max_deviation:9.3e} (tol {r.tolerance:g})  {status}")
    if not all_passed:
        print("verification FAILED")
        return VERIFY_ERROR
    print("all checks passed")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "suite": _cmd_suite,
        "list-suites": _cmd_list,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except UnknownSuite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (InvalidInput, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
