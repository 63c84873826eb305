"""Command-line planner: analytic sweeps, simulation cross-checks, self-checks.

Exit codes: 0 success, 2 scenario parse error, 3 validation/unit error (also
failed self-checks), 4 infeasible provisioning, 5 simulated blocking
disagrees with the analytic target beyond tolerance.
"""

from __future__ import annotations

import argparse
import sys

from .scenario import (
    ScenarioParseError,
    ScenarioValidationError,
    bundled_scenarios,
    load_scenario,
    scenario_to_toml,
)
from .selfcheck import run_checks
from .sweep import any_infeasible, any_sim_disagreement, emit_csv, emit_report, run_sweep
from .units import UnitError

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_INFEASIBLE = 4
EXIT_SIM_DISAGREE = 5


def _write_output(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def _add_scenario_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--scenario", "-s", required=True,
        help="scenario file path or bundled name (see `vodplan validate --list-bundled`)",
    )
    parser.add_argument("--out", "-o", default="-", help="output path, '-' for stdout")
    parser.add_argument(
        "--format", "-f", choices=("csv", "report"), default="csv", help="output format"
    )


def _run_plan(args: argparse.Namespace, with_sim: bool) -> int:
    scenario = load_scenario(args.scenario)
    result = run_sweep(
        scenario,
        with_sim=with_sim,
        seed=getattr(args, "seed", None),
        replications=getattr(args, "replications", 1),
        workers=getattr(args, "workers", 1),
    )
    text = emit_csv(result) if args.format == "csv" else emit_report(result)
    _write_output(text, args.out)
    if any_infeasible(result):
        print("error: some rows are infeasible at the configured port cap", file=sys.stderr)
        return EXIT_INFEASIBLE
    if with_sim and any_sim_disagreement(result):
        print(
            "error: measured blocking exceeds the target beyond 3 standard errors "
            "on some rows",
            file=sys.stderr,
        )
        return EXIT_SIM_DISAGREE
    return EXIT_OK


def _run_validate(args: argparse.Namespace) -> int:
    if args.list_bundled:
        for name in bundled_scenarios():
            print(name)
        return EXIT_OK
    if args.scenario is not None:
        scenario = load_scenario(args.scenario)
        print(f"scenario {scenario.name!r} loads and validates")
        if args.echo:
            print(scenario_to_toml(scenario), end="")
    results, profile_lines = run_checks(quick=args.quick)
    for line in profile_lines:
        print(line)
    failed = 0
    for check in results:
        verdict = "pass" if check.ok else "FAIL"
        print(f"[{verdict}] {check.name}: {check.detail}")
        failed += 0 if check.ok else 1
    if failed:
        print(f"{failed} self-check(s) failed", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"all {len(results)} self-checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vodplan",
        description="Capacity planner for video-on-demand networks: "
        "Erlang-B port dimensioning, popularity-split proxy layouts, and a "
        "cross-validating loss-system simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="analytic dimensioning sweep")
    _add_scenario_args(plan)

    simulate = sub.add_parser("simulate", help="analytic sweep plus simulation cross-check")
    _add_scenario_args(simulate)
    simulate.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    simulate.add_argument(
        "--replications", "-r", type=int, default=1, help="independent runs per sweep point"
    )
    simulate.add_argument(
        "--workers", "-w", type=int, default=1, help="parallel worker processes for sweep points"
    )

    validate = sub.add_parser("validate", help="run the built-in invariant and oracle suite")
    validate.add_argument(
        "--scenario", "-s", default=None, help="also load and validate this scenario"
    )
    validate.add_argument("--echo", action="store_true", help="print the canonical scenario echo")
    validate.add_argument("--quick", action="store_true", help="smaller random grids")
    validate.add_argument(
        "--list-bundled", action="store_true", help="list bundled scenario names and exit"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plan":
            return _run_plan(args, with_sim=False)
        if args.command == "simulate":
            return _run_plan(args, with_sim=True)
        return _run_validate(args)
    except ScenarioParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (ScenarioValidationError, UnitError) as e:
        print(f"validation error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
