"""Command-line entry point.

Subcommands:
  run       solve a scenario and write the result bundle
  demand    build and summarise both demand variants without solving
  validate  parse the scenario, load all inputs, and report problems

Exit codes: 0 on success, 2 when a solve ends infeasible (or otherwise
non-optimal), 3 on input or configuration errors. Set HEATPLAN_LOG to a
logging level name to change verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, reporting
from .mps import write_mps
from .scenario import (PreparedScenario, ScenarioError, SolveFailed,
                       load_scenario, prepare, run_one, run_pair)
from .seriesio import InputError

log = logging.getLogger("heatplan")

_MODES = {
    "homo": "homogeneous",
    "homogeneous": "homogeneous",
    "het": "heterogeneous",
    "heterogeneous": "heterogeneous",
    "pair": "pair",
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatplan",
        description="Electric-heating demand synthesis and expansion planning",
    )
    parser.add_argument("--version", action="version", version=f"heatplan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve a scenario and write result tables")
    run.add_argument("scenario", help="scenario TOML file")
    run.add_argument("output_dir", help="directory for the output bundle")
    run.add_argument("--mode", default="pair", choices=sorted(_MODES),
                     help="demand variant to solve (default: pair)")
    run.add_argument("--budget", default=None, metavar="LABEL",
                     help="budget label from the scenario file")
    run.add_argument("--tau", default=None, type=float, metavar="HOURS",
                     help="override the model step length")
    run.add_argument("--export-mps", action="store_true",
                     help="also write the assembled problem in fixed MPS format")

    demand = sub.add_parser("demand", help="write demand series and summaries")
    demand.add_argument("scenario")
    demand.add_argument("output_dir")
    demand.add_argument("--tau", default=None, type=float, metavar="HOURS")

    validate = sub.add_parser("validate", help="check a scenario and its data files")
    validate.add_argument("scenario")
    validate.add_argument("--budget", default=None, metavar="LABEL")
    return parser


def _prepare(args) -> PreparedScenario:
    config = load_scenario(
        args.scenario,
        budget_label=getattr(args, "budget", None),
        tau_hours=getattr(args, "tau", None),
    )
    return prepare(config)


def _solver_stats(result) -> dict:
    return {
        "status": result.lp_solution.status.value,
        "iterations": result.lp_solution.iterations,
        "seconds": round(result.timing_seconds, 6),
        "variables": result.problem.lp.num_variables,
        "rows": result.problem.lp.num_rows,
        "objective": result.lp_solution.objective_value,
        "audit_max_residual": result.audit.max_residual,
    }


def _cmd_run(args) -> int:
    started_wall = time.perf_counter()
    started_at = datetime.now(timezone.utc).isoformat()
    prepared = _prepare(args)
    mode = _MODES[args.mode]
    out = Path(args.output_dir)

    results = {}
    if mode == "pair":
        homo, het, diff = run_pair(prepared)
        results["homogeneous"] = homo
        results["heterogeneous"] = het
        out.mkdir(parents=True, exist_ok=True)
        (out / "diff.json").write_text(
            json.dumps(reporting.diff_payload(diff), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    else:
        results[mode] = run_one(prepared, mode)

    wall = time.perf_counter() - started_wall
    for variant, result in results.items():
        manifest = reporting.build_manifest(
            command=sys.argv, prepared=prepared,
            solver_stats={variant: _solver_stats(result)},
            wall_clock_seconds=round(wall, 6), started_at=started_at,
        )
        target = out / variant if mode == "pair" else out
        reporting.write_solution_bundle(target, result, manifest)
        if args.export_mps:
            write_mps(result.problem.lp, target / "model.mps",
                      name=prepared.config.name.upper()[:8] or "HEATPLAN")
        log.info("%s: objective %.6g, %d iterations, %.2fs", variant,
                 result.lp_solution.objective_value,
                 result.lp_solution.iterations, result.timing_seconds)
    print(f"wrote {mode} results to {out}")
    return 0


def _cmd_demand(args) -> int:
    prepared = _prepare(args)
    written = reporting.write_demand_outputs(args.output_dir, prepared)
    manifest = reporting.build_manifest(
        command=sys.argv, prepared=prepared, solver_stats={},
        wall_clock_seconds=0.0, started_at=datetime.now(timezone.utc).isoformat(),
    )
    reporting.write_manifest(Path(args.output_dir) / "manifest.json", manifest)
    print(f"wrote {len(written) + 1} demand files to {args.output_dir}")
    return 0


def _cmd_validate(args) -> int:
    prepared = _prepare(args)
    config = prepared.config
    grid = prepared.model_grid
    print(f"scenario {config.name!r} OK")
    print(f"  network: {len(prepared.network_model.buses)} buses, "
          f"{len(prepared.network_model.lines)} lines")
    print(f"  model grid: {grid.num_steps} steps of {grid.step_hours} h "
          f"in {grid.num_weeks} weeks")
    print(f"  budgets: {', '.join(sorted(config.budgets))} "
          f"(selected: {config.budget_label})")
    for record in reporting.week_records(prepared):
        extreme = record["net_demand_min_gw"]
        detail = "" if extreme is None else (
            f" net-demand min {extreme:.3f} GW"
            f" (demand-minus-wind max {record['demand_minus_wind_max_gw']:.3f} GW)"
        )
        flag = " [wrapped at data edge]" if record["wrapped"] else ""
        print(f"  week {record['month']}: stress hour {record['stress_timestamp']}"
              f"{detail}{flag}")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("HEATPLAN_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "demand":
            return _cmd_demand(args)
        return _cmd_validate(args)
    except SolveFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InputError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
