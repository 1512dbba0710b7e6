"""Scenario orchestration: representative weeks, budgets, and paired runs.

A scenario file names the network, the source data series, the heating
model parameters, the cost tables, and one or more labelled emission
budgets. The engine synthesizes both demand variants on the source grid,
picks one stress week per listed month (the hour of minimum wind-minus-
demand, its calendar day, the four days before and the following days to
complete seven), resamples everything onto the model grid, and runs the
expansion problem once per demand variant.
"""

from __future__ import annotations

import calendar
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import demand as dm
from . import expansion as xp
from . import lp
from .network import Bus, FixedInjection, NetworkSpec, load_network
from .seriesio import (InputError, read_daily_series, read_shape_table,
                       read_time_series)


class ScenarioError(Exception):
    pass


class IncompleteMonth(ScenarioError):
    pass


class EdgeOfSeries(ScenarioError):
    pass


class OutOfRange(ScenarioError):
    pass


class SolveFailed(ScenarioError):
    """An expansion solve ended non-optimal; carries the LP status and diagnostics."""

    def __init__(self, mode: str, status: lp.Status, violated: list[tuple[str, float]]):
        self.mode = mode
        self.status = status
        self.violated = violated
        detail = ""
        if violated:
            rows = ", ".join(f"{name} (by {amount:.4g})" for name, amount in violated[:5])
            detail = f"; most violated rows: {rows}"
        super().__init__(f"{mode} solve ended {status.value}{detail}")


def scale_budget(national_budget_t: float, population_fraction: float,
                 period_fraction: float) -> float:
    """Portion of an annual national emissions budget for a case study.

    Multiplies the budget by the modeled population share and the modeled
    fraction of the year; the two fractions may also be passed pre-combined
    (for example a single 0.10 factor with the other set to 1).
    """
    if national_budget_t < 0:
        raise OutOfRange(f"budget {national_budget_t} must be non-negative")
    for label, value in (("population", population_fraction),
                         ("period", period_fraction)):
        if not 0.0 < value <= 1.0:
            raise OutOfRange(f"{label} fraction {value} outside (0, 1]")
    return national_budget_t * population_fraction * period_fraction


@dataclass(frozen=True)
class WeekChoice:
    """One selected representative week of source steps."""

    month: str
    indices: np.ndarray        # ascending source-step indices, 7 days' worth
    stress_index: int          # source step of the minimum net-demand hour
    net_min_gw: float          # wind minus demand there (its negation is the
                               # demand-minus-wind maximum for the month)
    wrapped: bool              # window left the data range and was padded

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int64)
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)


def select_weeks(timestamps, wind_gw, demand_gw, months) -> list[WeekChoice]:
    """One stress week per month: the minimum net-demand (wind - demand) hour,
    the four days before its day, and the following days to complete seven.

    Ties break to the earliest step. If the window runs off the data range
    it is clamped and padded with days wrapped from the opposite edge of the
    stress month, flagged via ``wrapped``.
    """
    ts = np.asarray(timestamps).astype("datetime64[s]")
    wind = np.asarray(wind_gw, dtype=np.float64)
    load = np.asarray(demand_gw, dtype=np.float64)
    if wind.shape != ts.shape or load.shape != ts.shape:
        raise dm.LengthMismatch(
            f"series lengths differ: {ts.shape[0]} timestamps, "
            f"{wind.shape[0]} wind, {load.shape[0]} demand"
        )
    if ts.size < 2:
        raise IncompleteMonth("series too short for week selection")
    steps = np.diff(ts).astype("timedelta64[s]").astype(np.int64)
    if (steps != steps[0]).any():
        raise ScenarioError("week selection needs a uniform-step series")
    step_h = steps[0] / 3600.0
    per_day = 24.0 / step_h
    if abs(per_day - round(per_day)) > 1e-9:
        raise ScenarioError(f"step of {step_h} h does not divide a day")
    per_day = int(round(per_day))

    days = ts.astype("datetime64[D]")
    day_values, day_counts = np.unique(days, return_counts=True)
    usable_days = day_values[day_counts == per_day]

    def usable(day) -> bool:
        return bool(np.isin(day, usable_days))

    net = wind - load
    chosen: list[WeekChoice] = []
    for month in months:
        month_m = np.datetime64(str(month), "M")
        in_month = days.astype("datetime64[M]") == month_m
        month_positions = np.nonzero(in_month)[0]
        if month_positions.size == 0:
            raise IncompleteMonth(f"no data for month {month_m}")
        year = month_m.astype("datetime64[Y]").astype(int) + 1970
        month_no = int((month_m - month_m.astype("datetime64[Y]")).astype(int)) + 1
        n_days = calendar.monthrange(year, month_no)[1]
        month_days = month_m.astype("datetime64[D]") + np.arange(n_days)
        if not np.isin(month_days, usable_days).all():
            raise IncompleteMonth(f"month {month_m} is not fully covered")

        local_min = int(np.argmin(net[month_positions]))
        stress = int(month_positions[local_min])
        stress_day = days[stress]

        window = stress_day + np.arange(-4, 3)
        present = [d for d in window if usable(d)]
        wrapped = len(present) < 7
        if wrapped:
            head_missing = sum(1 for d in window if not usable(d) and d < stress_day)
            tail_missing = sum(1 for d in window if not usable(d) and d > stress_day)
            pool_desc = [d for d in month_days[::-1] if usable(d) and d not in present]
            pool_asc = [d for d in month_days if usable(d) and d not in present]
            for _ in range(head_missing):
                if not pool_desc:
                    raise EdgeOfSeries(f"cannot assemble 7 days for {month_m}")
                d = pool_desc.pop(0)
                present.append(d)
                if d in pool_asc:
                    pool_asc.remove(d)
            for _ in range(tail_missing):
                if not pool_asc:
                    raise EdgeOfSeries(f"cannot assemble 7 days for {month_m}")
                present.append(pool_asc.pop(0))
        chosen_days = np.sort(np.array(present, dtype="datetime64[D]"))
        indices = np.nonzero(np.isin(days, chosen_days))[0]
        chosen.append(WeekChoice(
            month=str(month_m),
            indices=indices,
            stress_index=stress,
            net_min_gw=float(net[stress]),
            wrapped=wrapped,
        ))
    return chosen


def resample_mean(values: np.ndarray, factor: int) -> np.ndarray:
    """Mean over consecutive blocks; energy-preserving for power series."""
    values = np.asarray(values, dtype=np.float64)
    if factor == 1:
        return values.copy()
    if values.size % factor:
        raise ScenarioError(f"cannot resample {values.size} steps by {factor}")
    return values.reshape(-1, factor).mean(axis=1)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    path: Path
    network_path: Path
    tau_hours: float
    periods_per_year: float
    base_demand_csv: Path
    week_mode: str                       # "min_net_demand" | "explicit"
    months: tuple[str, ...]
    wind_techs: tuple[str, ...]
    explicit_start_days: tuple[str, ...]
    temp_area_csv: Mapping[str, Path]
    temp_area_weights: Mapping[str, float]
    temp_local_csv: Mapping[str, Path]
    households_total: float
    households: Mapping[str, float]
    penetration: float
    curve: dm.DegreeDayCurve
    storage: xp.StorageSpec
    techs: tuple[xp.GeneratorTech, ...]
    budgets: Mapping[str, float]
    budget_label: str
    carbon_scope: str = "horizon"       # or "week": even split over the weeks
    demand_mode: str | None = None

    @property
    def budget(self) -> xp.CarbonBudget:
        return xp.CarbonBudget(self.budgets[self.budget_label], self.budget_label)


def load_scenario(path, budget_label: str | None = None,
                  tau_hours: float | None = None,
                  demand_mode: str | None = None) -> ScenarioConfig:
    """Parse and validate a scenario file; all referenced files must exist."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise InputError(f"cannot open scenario file: {exc.strerror}", path) from exc
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"invalid TOML: {exc}", path) from exc

    base_dir = path.parent

    def need(table: dict, key: str, where: str):
        if key not in table:
            raise InputError(f"missing key {key!r} in [{where}]", path)
        return table[key]

    def resolve(rel) -> Path:
        p = base_dir / rel
        if not p.exists():
            raise InputError(f"referenced file does not exist: {p}", path)
        return p

    scen = raw.get("scenario", {})
    data = raw.get("data", {})
    weeks = raw.get("weeks", {})
    temperature = raw.get("temperature", {})
    heating = raw.get("heating", {})

    week_mode = weeks.get("mode", "min_net_demand")
    if week_mode not in ("min_net_demand", "explicit"):
        raise InputError(f"unknown week selection mode {week_mode!r}", path)
    if week_mode == "explicit" and not weeks.get("explicit_start_days"):
        raise InputError("explicit week selection needs explicit_start_days", path)

    shape_csv = heating.get("shape_csv")
    curve = dm.DegreeDayCurve(
        reference_temp_c=float(heating.get("reference_temperature_c", 15.5)),
        slope_air_kwh=float(heating.get("slope_air_kwh", 2.4)),
        slope_ground_kwh=float(heating.get("slope_ground_kwh", 1.8)),
        air_share=float(heating.get("air_source_share", 0.75)),
        ground_share=float(heating.get("ground_source_share", 0.25)),
        shape48=read_shape_table(resolve(shape_csv)) if shape_csv
        else dm.default_shape_table(),
    )

    storage_raw = raw.get("storage", {})
    storage = xp.StorageSpec(
        energy_capital_cost_per_gwh=float(need(storage_raw, "energy_capital_cost_per_gwh", "storage")),
        power_capital_cost_per_gw=float(need(storage_raw, "power_capital_cost_per_gw", "storage")),
        efficiency=float(storage_raw.get("efficiency", 0.9)),
        ratio_min_hours=float(storage_raw.get("ratio_min_hours", 1.0)),
        ratio_max_hours=float(storage_raw.get("ratio_max_hours", 4.0)),
        lifetime_years=float(storage_raw.get("lifetime_years", 10.0)),
    )

    techs = tuple(
        xp.GeneratorTech(
            name=need(g, "name", "generators"),
            dispatch_cost_per_gwh=float(need(g, "dispatch_cost_per_gwh", "generators")),
            capital_cost_per_gw=float(need(g, "capital_cost_per_gw", "generators")),
            emission_intensity_t_per_gwh=float(g.get("emission_intensity_t_per_gwh", 0.0)),
            lifetime_years=float(g.get("lifetime_years", 25.0)),
            expandable=bool(g.get("expandable", True)),
        )
        for g in raw.get("generators", [])
    )
    if not techs:
        raise InputError("no [[generators]] defined", path)

    budgets_raw = raw.get("budgets", {})
    budget_values = {k: float(v) for k, v in budgets_raw.get("values", {}).items()}
    if not budget_values:
        raise InputError("no [budgets] values defined", path)
    label = budget_label or budgets_raw.get("default") or next(iter(budget_values))
    if label not in budget_values:
        raise InputError(f"unknown budget label {label!r}; have {sorted(budget_values)}", path)

    if demand_mode is not None and demand_mode not in ("homogeneous", "heterogeneous"):
        raise InputError(f"unknown demand mode {demand_mode!r}", path)

    return ScenarioConfig(
        name=scen.get("name", path.stem),
        path=path,
        network_path=resolve(need(scen, "network", "scenario")),
        tau_hours=float(tau_hours if tau_hours is not None else scen.get("tau_hours", 1.0)),
        periods_per_year=float(scen.get("amortization_periods_per_year", 4.0)),
        base_demand_csv=resolve(need(data, "base_demand_csv", "data")),
        week_mode=week_mode,
        months=tuple(str(m) for m in weeks.get("months", [])),
        wind_techs=tuple(weeks.get("wind_techs", [])),
        explicit_start_days=tuple(str(d) for d in weeks.get("explicit_start_days", [])),
        temp_area_csv={k: resolve(v) for k, v in need(temperature, "areas", "temperature").items()},
        temp_area_weights={k: float(v) for k, v in need(temperature, "weights", "temperature").items()},
        temp_local_csv={k: resolve(v) for k, v in need(temperature, "local", "temperature").items()},
        households_total=float(need(heating, "households_total", "heating")),
        households={k: float(v) for k, v in need(heating, "households", "heating").items()},
        penetration=float(heating.get("penetration", 1.0)),
        curve=curve,
        storage=storage,
        techs=techs,
        budgets=budget_values,
        budget_label=label,
        demand_mode=demand_mode,
    )


# ---------------------------------------------------------------------------
# preparation pipeline


@dataclass(frozen=True)
class PreparedScenario:
    config: ScenarioConfig
    network_source: NetworkSpec
    source_grid: dm.TimeGrid
    base_source: np.ndarray
    national_temp_daily: np.ndarray
    local_temp_daily: Mapping[str, np.ndarray]
    temp_dates: np.ndarray
    heat_national_source: np.ndarray
    heat_local_source: Mapping[str, np.ndarray]
    homogeneous_source: dm.DemandProfile
    heterogeneous_source: dm.DemandProfile
    weeks: tuple[WeekChoice, ...]
    model_grid: dm.TimeGrid
    network_model: NetworkSpec
    demand_by_mode: Mapping[str, dm.DemandProfile]

    def demand_for(self, mode: str) -> dm.DemandProfile:
        return self.demand_by_mode[mode]


def _daily_slice(dates: np.ndarray, values: np.ndarray, wanted: np.ndarray) -> np.ndarray:
    index = {d: k for k, d in enumerate(dates)}
    try:
        picks = [index[d] for d in wanted]
    except KeyError as exc:
        raise ScenarioError(f"no temperature for day {exc.args[0]}") from None
    return values[picks]


def prepare(config: ScenarioConfig) -> PreparedScenario:
    """Load everything, synthesize both demand variants, and pick the weeks."""
    network = load_network(config.network_path)
    ts, base = read_time_series(config.base_demand_csv)
    if network.series_timestamps is not None and (
        network.series_timestamps.shape != ts.shape
        or (network.series_timestamps != ts).any()
    ):
        raise ScenarioError(
            "network series and base demand are on different timebases"
        )
    steps = np.diff(ts).astype("timedelta64[s]").astype(np.int64)
    if ts.size < 2 or (steps != steps[0]).any():
        raise ScenarioError("base demand must be a uniform-step series")
    source_step_h = steps[0] / 3600.0
    source_grid = dm.single_week_grid(source_step_h, ts)

    area_temps = {}
    temp_dates = None
    for area, csv_path in config.temp_area_csv.items():
        dates, temps = read_daily_series(csv_path)
        if temp_dates is None:
            temp_dates = dates
        elif dates.shape != temp_dates.shape or (dates != temp_dates).any():
            raise ScenarioError(f"temperature series {area} is on a different day axis")
        area_temps[area] = temps
    national_temp = dm.population_weighted_temperature(area_temps, config.temp_area_weights)

    local_temps = {}
    for bus_id, csv_path in config.temp_local_csv.items():
        dates, temps = read_daily_series(csv_path)
        if dates.shape != temp_dates.shape or (dates != temp_dates).any():
            raise ScenarioError(f"temperature series {bus_id} is on a different day axis")
        local_temps[bus_id] = temps

    shares = {bus.id: bus.population_share for bus in network.buses}
    for bus_id in shares:
        if bus_id not in local_temps:
            raise ScenarioError(f"no local temperature series for bus {bus_id}")
        if bus_id not in config.households:
            raise ScenarioError(f"no household count for bus {bus_id}")

    grid_days, _ = source_grid.day_groups()
    natl_daily = _daily_slice(temp_dates, national_temp, grid_days)
    heat_national = dm.synthesize_heat_series(
        config.curve, natl_daily,
        config.households_total * config.penetration, source_grid,
    )
    heat_local = {}
    local_daily = {}
    for bus_id, temps in local_temps.items():
        local_daily[bus_id] = _daily_slice(temp_dates, temps, grid_days)
        heat_local[bus_id] = dm.synthesize_heat_series(
            config.curve, local_daily[bus_id],
            config.households[bus_id] * config.penetration, source_grid,
        )

    homogeneous = dm.homogeneous_demand(source_grid, base, heat_national, shares)
    heterogeneous = dm.heterogeneous_demand(source_grid, base, heat_local, shares)

    if config.week_mode == "min_net_demand":
        wind = np.zeros(ts.size)
        for bus in network.buses:
            for tech in config.wind_techs:
                cap = bus.existing_capacity.get(tech, 0.0)
                if cap:
                    wind = wind + cap * bus.availability_for(tech, ts.size)
        weeks = select_weeks(ts, wind, heterogeneous.total(), config.months)
    else:
        weeks = _explicit_weeks(ts, config.explicit_start_days)

    model_grid, model_index = _build_model_grid(ts, source_step_h, weeks, config.tau_hours)
    factor = int(round(config.tau_hours / source_step_h))

    def onto_model(series: np.ndarray) -> np.ndarray:
        return resample_mean(series[model_index], factor)

    buses_model = tuple(
        Bus(
            id=bus.id,
            population_share=bus.population_share,
            existing_capacity=bus.existing_capacity,
            availability={t: onto_model(s) for t, s in bus.availability.items()},
            fixed_injections=tuple(
                FixedInjection(inj.name, onto_model(inj.series_gw), inj.price_per_gwh)
                for inj in bus.fixed_injections
            ),
        )
        for bus in network.buses
    )
    network_model = NetworkSpec(
        buses=buses_model, lines=network.lines, slack_bus=network.slack_bus,
        series_timestamps=model_grid.timestamps,
    )
    network_model.validate()

    demand_by_mode = {
        "homogeneous": dm.DemandProfile(
            model_grid,
            {b: onto_model(s) for b, s in homogeneous.per_bus.items()},
            dm.DemandKind.HOMOGENEOUS,
        ),
        "heterogeneous": dm.DemandProfile(
            model_grid,
            {b: onto_model(s) for b, s in heterogeneous.per_bus.items()},
            dm.DemandKind.HETEROGENEOUS,
        ),
    }

    return PreparedScenario(
        config=config,
        network_source=network,
        source_grid=source_grid,
        base_source=base,
        national_temp_daily=natl_daily,
        local_temp_daily=local_daily,
        temp_dates=grid_days,
        heat_national_source=heat_national,
        heat_local_source=heat_local,
        homogeneous_source=homogeneous,
        heterogeneous_source=heterogeneous,
        weeks=tuple(weeks),
        model_grid=model_grid,
        network_model=network_model,
        demand_by_mode=demand_by_mode,
    )


def _explicit_weeks(ts: np.ndarray, start_days) -> list[WeekChoice]:
    days = ts.astype("datetime64[D]")
    weeks = []
    for start in start_days:
        first = np.datetime64(str(start), "D")
        wanted = first + np.arange(7)
        indices = np.nonzero(np.isin(days, wanted))[0]
        month = str(first.astype("datetime64[M]"))
        if indices.size == 0:
            raise EdgeOfSeries(f"explicit week starting {start} is outside the data")
        weeks.append(WeekChoice(month=month, indices=indices, stress_index=int(indices[0]),
                                net_min_gw=float("nan"), wrapped=False))
    return weeks


def _build_model_grid(ts, source_step_h, weeks, tau_hours):
    """Concatenate the selected weeks and resample them to the model step."""
    if tau_hours + 1e-12 < source_step_h:
        raise ScenarioError(
            f"model step {tau_hours} h is finer than the source step {source_step_h} h"
        )
    factor = tau_hours / source_step_h
    if abs(factor - round(factor)) > 1e-9:
        raise ScenarioError(
            f"model step {tau_hours} h must be a multiple of the source step "
            f"{source_step_h} h"
        )
    factor = int(round(factor))
    pieces = []
    bounds = []
    cursor = 0
    model_index = []
    for week in weeks:
        idx = week.indices
        if idx.size % factor:
            raise ScenarioError("week length does not divide by the model step")
        block_starts = idx.reshape(-1, factor)[:, 0]
        pieces.append(ts[block_starts])
        model_index.append(idx)
        bounds.append((cursor, cursor + block_starts.size))
        cursor += block_starts.size
    grid = dm.TimeGrid(tau_hours, np.concatenate(pieces), tuple(bounds))
    return grid, np.concatenate(model_index)


# ---------------------------------------------------------------------------
# runs


@dataclass(frozen=True)
class ScenarioResult:
    mode: str
    budget: xp.CarbonBudget
    problem: xp.ExpansionProblem
    lp_solution: lp.LpSolution
    solution: xp.ExpansionSolution
    audit: xp.ConstraintReport
    timing_seconds: float
    metrics: dict

    @property
    def iterations(self) -> int:
        return self.lp_solution.iterations


def derive_metrics(solution: xp.ExpansionSolution, demand: dm.DemandProfile) -> dict:
    per_bus = {}
    for k, bus in enumerate(solution.bus_ids):
        duration = solution.storage_duration_hours()
        per_bus[bus] = {
            "peak_demand_gw": demand.peak_gw(bus),
            "average_demand_gw": demand.average_gw(bus),
            "storage_energy_gwh": float(solution.storage_energy[k]),
            "storage_power_gw": float(solution.storage_power[k]),
            "storage_duration_h": None if np.isnan(duration[k]) else float(duration[k]),
            "new_capacity_gw": {
                tech: float(solution.new_capacity[g, k])
                for g, tech in enumerate(solution.tech_names)
            },
        }
    return {
        "per_bus": per_bus,
        "total_storage_energy_gwh": float(solution.storage_energy.sum()),
        "total_storage_power_gw": float(solution.storage_power.sum()),
        "capital_cost": solution.capital_cost,
        "dispatch_cost": solution.dispatch_cost,
        "fixed_injection_cost": solution.fixed_injection_cost,
        "total_cost": solution.total_cost,
        "objective_value": solution.objective_value,
    }


def run_one(prepared: PreparedScenario, mode: str,
            budget: xp.CarbonBudget | None = None,
            options: lp.SolverOptions | None = None,
            audit_tol: float = 1e-6) -> ScenarioResult:
    config = prepared.config
    budget = budget or config.budget
    demand = prepared.demand_for(mode)
    problem = xp.build(
        prepared.network_model, demand, config.techs, config.storage,
        budget, prepared.model_grid, periods_per_year=config.periods_per_year,
    )
    started = time.perf_counter()
    lp_solution = lp.solve(problem.lp, options)
    elapsed = time.perf_counter() - started
    if lp_solution.status is not lp.Status.OPTIMAL:
        violated = lp.violated_rows(problem.lp, lp_solution.primal, 1e-6)
        raise SolveFailed(mode, lp_solution.status, violated)
    solution = xp.decode(problem, lp_solution)
    report = xp.audit_problem(problem, solution, audit_tol)
    return ScenarioResult(
        mode=mode,
        budget=budget,
        problem=problem,
        lp_solution=lp_solution,
        solution=solution,
        audit=report,
        timing_seconds=elapsed,
        metrics=derive_metrics(solution, demand),
    )


@dataclass(frozen=True)
class DiffReport:
    """Heterogeneous-minus-homogeneous deltas and cost ratios."""

    capacity_delta_gw: dict
    storage_energy_delta_gwh: dict
    storage_power_delta_gw: dict
    total_storage_energy_delta_gwh: float
    total_storage_power_delta_gw: float
    storage_duration_h: dict
    capital_cost_ratio: float
    dispatch_cost_ratio: float
    total_cost_ratio: float


def diff_results(homo: ScenarioResult, het: ScenarioResult) -> DiffReport:
    sol_h, sol_t = homo.solution, het.solution
    capacity = {
        tech: {
            bus: float(sol_t.new_capacity[g, k] - sol_h.new_capacity[g, k])
            for k, bus in enumerate(sol_h.bus_ids)
        }
        for g, tech in enumerate(sol_h.tech_names)
    }
    energy = {
        bus: float(sol_t.storage_energy[k] - sol_h.storage_energy[k])
        for k, bus in enumerate(sol_h.bus_ids)
    }
    power = {
        bus: float(sol_t.storage_power[k] - sol_h.storage_power[k])
        for k, bus in enumerate(sol_h.bus_ids)
    }
    dur_h = sol_h.storage_duration_hours()
    dur_t = sol_t.storage_duration_hours()
    duration = {
        bus: {
            "homogeneous": None if np.isnan(dur_h[k]) else float(dur_h[k]),
            "heterogeneous": None if np.isnan(dur_t[k]) else float(dur_t[k]),
        }
        for k, bus in enumerate(sol_h.bus_ids)
    }

    def ratio(a: float, b: float) -> float:
        return a / b if b else float("inf") if a else 1.0

    return DiffReport(
        capacity_delta_gw=capacity,
        storage_energy_delta_gwh=energy,
        storage_power_delta_gw=power,
        total_storage_energy_delta_gwh=float(sol_t.storage_energy.sum() - sol_h.storage_energy.sum()),
        total_storage_power_delta_gw=float(sol_t.storage_power.sum() - sol_h.storage_power.sum()),
        storage_duration_h=duration,
        capital_cost_ratio=ratio(sol_t.capital_cost, sol_h.capital_cost),
        dispatch_cost_ratio=ratio(sol_t.dispatch_cost + sol_t.fixed_injection_cost,
                                  sol_h.dispatch_cost + sol_h.fixed_injection_cost),
        total_cost_ratio=ratio(sol_t.total_cost, sol_h.total_cost),
    )


def run_pair(prepared: PreparedScenario,
             budget: xp.CarbonBudget | None = None,
             options: lp.SolverOptions | None = None,
             ) -> tuple[ScenarioResult, ScenarioResult, DiffReport]:
    """Solve both demand variants on identical networks, costs, and budget."""
    homo = run_one(prepared, "homogeneous", budget, options)
    het = run_one(prepared, "heterogeneous", budget, options)
    return homo, het, diff_results(homo, het)
