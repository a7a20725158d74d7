"""Command-line interface.

Verbs: analyze, simulate, optimize, ingest, compare, report.
Exit codes: 0 success, 1 validation error, 2 runtime/unstable error or an SLA
violation under --strict-sla.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ScenarioError, TraceFormatError, UnstableSystemError
from .reporting import (
    compare_policies,
    optimize_report,
    render_text,
    report_to_json,
    run_analysis,
    run_report,
    run_simulation_summary,
)
from .scenario import load_scenario
from .trace import ingest_trace


def _add_common(parser: argparse.ArgumentParser, scenario: bool = True) -> None:
    if scenario:
        parser.add_argument("--scenario", required=True, help="path to a scenario JSON file")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--out", help="write the report to this path instead of stdout")


def _add_sim_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    parser.add_argument(
        "--replications", type=int, default=None, help="override the replication count"
    )
    parser.add_argument(
        "--horizon-min", type=float, default=None, help="override the horizon (minutes)"
    )
    parser.add_argument(
        "--strict-sla",
        action="store_true",
        help="exit with code 2 when the simulated mean wait violates the SLA",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fleetq",
        description="Capacity planning, cost optimization, and simulation for CI/CD runner fleets.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("analyze", help="closed-form analysis only")
    _add_common(p)

    p = sub.add_parser("simulate", help="run the discrete-event simulation")
    _add_common(p)
    _add_sim_flags(p)

    p = sub.add_parser("optimize", help="cost/SLA-optimal runner count")
    _add_common(p)

    p = sub.add_parser("ingest", help="turn a job trace into a scenario fragment")
    p.add_argument("--trace", required=True, help="path to a trace CSV file")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write the fragment to this path instead of stdout")

    p = sub.add_parser("compare", help="compare scheduling/scaling variants")
    _add_common(p)
    p.add_argument(
        "--variants",
        required=True,
        help="path to a JSON list of variants, e.g. [{\"name\": \"spt\", \"discipline\": \"spt\"}]",
    )
    _add_sim_flags(p)

    p = sub.add_parser("report", help="full analytic-vs-simulated report")
    _add_common(p)
    _add_sim_flags(p)

    return parser


def _emit(args, report: dict) -> None:
    if args.format == "json":
        text = report_to_json(report) + "\n"
    else:
        text = render_text(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _sla_violated(report: dict) -> bool:
    sla = report.get("sla") or {}
    return sla.get("simulated_pass") is False


def _run(args) -> int:
    if args.verb == "ingest":
        result = ingest_trace(args.trace)
        fragment = {
            "arrivals": {
                "kind": "trace",
                "timestamps_minutes": list(result.arrivals.timestamps),
            },
            "service": {"kind": "empirical", "samples_minutes": list(result.service.samples)},
            "estimates": {
                "records": result.records,
                "arrival_rate_per_min": result.arrival_rate,
                "arrival_rate_per_hour": result.arrival_rate * 60.0,
                "ca2": result.ca2,
                "mean_duration_minutes": result.mean_duration,
                "cs2": result.cs2,
            },
        }
        if args.format == "text":
            text = (
                f"ingested {result.records} records\n"
                f"  arrival rate: {result.arrival_rate:.4f}/min"
                f" ({result.arrival_rate * 60.0:.2f}/hour), Ca^2 = {result.ca2:.4f}\n"
                f"  mean duration: {result.mean_duration:.4f} min, Cs^2 = {result.cs2:.4f}\n"
            )
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
        else:
            _emit(args, fragment)
        return 0

    scenario = load_scenario(args.scenario)
    if args.verb == "analyze":
        _emit(args, run_analysis(scenario))
        return 0
    if args.verb == "optimize":
        _emit(args, optimize_report(scenario))
        return 0
    if args.verb == "simulate":
        report = run_simulation_summary(
            scenario,
            seed=args.seed,
            replications=args.replications,
            horizon_minutes=args.horizon_min,
        )
        _emit(args, report)
        return 2 if args.strict_sla and _sla_violated(report) else 0
    if args.verb == "report":
        report = run_report(
            scenario,
            seed=args.seed,
            replications=args.replications,
            horizon_minutes=args.horizon_min,
        )
        _emit(args, report)
        return 2 if args.strict_sla and _sla_violated(report) else 0
    if args.verb == "compare":
        try:
            variants = json.loads(Path(args.variants).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ScenarioError(f"cannot read variants file {args.variants}: {exc}") from exc
        if not isinstance(variants, list):
            raise ScenarioError("variants file must contain a JSON list")
        report = compare_policies(
            scenario,
            variants,
            seed=args.seed,
            replications=args.replications,
            horizon_minutes=args.horizon_min,
        )
        _emit(args, report)
        return 2 if args.strict_sla and _sla_violated(report) else 0
    raise RuntimeError(f"unhandled verb {args.verb}")  # pragma: no cover


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except UnstableSystemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ScenarioError, TraceFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
