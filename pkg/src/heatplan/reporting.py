"""Result serialization: CSV tables, audit JSON, and the run manifest.

CSV bodies are byte-stable across reruns with identical inputs: floats are
written in shortest round-trip form and row order is fixed by the model's
own ordering. The manifest carries everything needed to reproduce a run
(command line, config and input digests, toolkit version, solver
statistics) and is the only file with wall-clock content.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .scenario import DiffReport, PreparedScenario, ScenarioResult
from .seriesio import format_float, write_csv


def file_digest(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def input_digests(prepared: PreparedScenario) -> dict:
    config = prepared.config
    paths = [config.path, config.network_path, config.base_demand_csv]
    paths += list(config.temp_area_csv.values())
    paths += list(config.temp_local_csv.values())
    seen = {}
    for p in paths:
        seen[str(p)] = file_digest(p)
    # network-referenced series files
    for rel in sorted(config.network_path.parent.glob("*.csv")):
        seen.setdefault(str(rel), file_digest(rel))
    return dict(sorted(seen.items()))


def week_records(prepared: PreparedScenario) -> list[dict]:
    records = []
    source_ts = prepared.source_grid.timestamps
    for week in prepared.weeks:
        net_min = week.net_min_gw
        records.append({
            "month": week.month,
            "stress_timestamp": str(source_ts[week.stress_index]),
            "net_demand_min_gw": None if np.isnan(net_min) else net_min,
            # same extreme under the opposite sign convention
            "demand_minus_wind_max_gw": None if np.isnan(net_min) else -net_min,
            "wrapped": week.wrapped,
            "steps": int(week.indices.size),
        })
    return records


def build_manifest(command: list[str], prepared: PreparedScenario,
                   solver_stats: dict, wall_clock_seconds: float,
                   started_at: str) -> dict:
    return {
        "command": command,
        "scenario": str(prepared.config.path),
        "scenario_name": prepared.config.name,
        "budget_label": prepared.config.budget_label,
        "toolkit_version": __version__,
        "inputs_sha256": input_digests(prepared),
        "weeks": week_records(prepared),
        "solver": solver_stats,
        "started_at": started_at,
        "wall_clock_seconds": wall_clock_seconds,
    }


def write_manifest(path, manifest: dict) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def write_solution_bundle(out_dir, result: ScenarioResult, manifest: dict) -> list[Path]:
    """The per-variant output files; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    solution = result.solution
    problem = result.problem
    grid = solution.grid
    timestamps = [str(t) for t in grid.timestamps]
    written = []

    rows = []
    for g, tech in enumerate(solution.tech_names):
        for k, bus in enumerate(solution.bus_ids):
            existing = problem.network.bus(bus).existing_capacity.get(tech, 0.0)
            rows.append((bus, tech, float(existing), float(solution.new_capacity[g, k])))
    path = out / "capacity_expansion.csv"
    write_csv(path, ["bus", "tech", "existing_gw", "new_gw"], rows)
    written.append(path)

    duration = solution.storage_duration_hours()
    rows = []
    for k, bus in enumerate(solution.bus_ids):
        rows.append((
            bus,
            float(solution.storage_energy[k]),
            float(solution.storage_power[k]),
            "" if np.isnan(duration[k]) else format_float(float(duration[k])),
        ))
    path = out / "storage.csv"
    write_csv(path, ["bus", "energy_gwh", "power_gw", "duration_h"], rows)
    written.append(path)

    path = out / "costs.csv"
    write_csv(path, ["component", "usd"], [
        ("capital", solution.capital_cost),
        ("dispatch", solution.dispatch_cost),
        ("fixed_injection_dispatch", solution.fixed_injection_cost),
        ("total", solution.total_cost),
    ])
    written.append(path)

    rows = []

    def series(variable: str, entity: str, values) -> None:
        for t, value in enumerate(np.asarray(values)):
            rows.append((variable, entity, t, timestamps[t], float(value)))

    for g, tech in enumerate(solution.tech_names):
        for k, bus in enumerate(solution.bus_ids):
            series("dispatch", f"{tech}@{bus}", solution.dispatch[g, k])
    for k, bus in enumerate(solution.bus_ids):
        series("soc", bus, solution.soc[k])
        series("angle", bus, solution.angles[k])
        series("net_injection", bus, solution.net_injection[k])
        for name in sorted(solution.splits):
            series(name, bus, solution.splits[name][k])
    for l, line in enumerate(solution.line_ids):
        series("flow_forward", line, solution.flow_forward[l])
        series("flow_reverse", line, solution.flow_reverse[l])
    for k, bus in enumerate(solution.bus_ids):
        for w, (w_start, _) in enumerate(grid.week_bounds):
            rows.append(("soc_initial", bus, w, timestamps[w_start],
                         float(solution.soc_initial[k, w])))
        for g, tech in enumerate(solution.tech_names):
            rows.append(("new_capacity", f"{tech}@{bus}", "", "",
                         float(solution.new_capacity[g, k])))
        rows.append(("storage_energy", bus, "", "", float(solution.storage_energy[k])))
        rows.append(("storage_power", bus, "", "", float(solution.storage_power[k])))
    path = out / "dispatch.csv"
    write_csv(path, ["variable", "entity", "step", "timestamp", "value"], rows)
    written.append(path)

    path = out / "audit.json"
    payload = {
        "tolerance": result.audit.tolerance,
        "max_residual": result.audit.max_residual,
        "ok": result.audit.ok,
        "residuals": dict(sorted(result.audit.residuals.items())),
        "objective_value": solution.objective_value,
        "lp_objective": result.lp_solution.objective_value,
        "metrics": result.metrics,
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    written.append(path)

    path = out / "manifest.json"
    write_manifest(path, manifest)
    written.append(path)
    return written


def write_demand_outputs(out_dir, prepared: PreparedScenario) -> list[Path]:
    """Model-grid demand series and peak/average summaries, no solving."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = prepared.model_grid
    timestamps = [str(t) for t in grid.timestamps]
    written = []
    for mode, profile in prepared.demand_by_mode.items():
        buses = sorted(profile.per_bus)
        rows = []
        for t in range(grid.num_steps):
            rows.append((timestamps[t], *(float(profile.per_bus[b][t]) for b in buses)))
        path = out / f"demand_{mode}.csv"
        write_csv(path, ["timestamp", *buses], rows)
        written.append(path)

    rows = []
    for mode in ("homogeneous", "heterogeneous"):
        profile = prepared.demand_by_mode[mode]
        for bus in sorted(profile.per_bus):
            rows.append((mode, bus, profile.peak_gw(bus), profile.average_gw(bus)))
    path = out / "demand_summary.csv"
    write_csv(path, ["mode", "bus", "peak_gw", "average_gw"], rows)
    written.append(path)
    return written


def diff_payload(diff: DiffReport) -> dict:
    return {
        "capacity_delta_gw": diff.capacity_delta_gw,
        "storage_energy_delta_gwh": diff.storage_energy_delta_gwh,
        "storage_power_delta_gw": diff.storage_power_delta_gw,
        "total_storage_energy_delta_gwh": diff.total_storage_energy_delta_gwh,
        "total_storage_power_delta_gw": diff.total_storage_power_delta_gw,
        "storage_duration_h": diff.storage_duration_h,
        "capital_cost_ratio": diff.capital_cost_ratio,
        "dispatch_cost_ratio": diff.dispatch_cost_ratio,
        "total_cost_ratio": diff.total_cost_ratio,
    }
