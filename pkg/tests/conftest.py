import dataclasses
from pathlib import Path

import numpy as np
import pytest

from heatplan.demand import DemandKind, DemandProfile, TimeGrid
from heatplan.expansion import CarbonBudget, GeneratorTech, StorageSpec
from heatplan.network import Bus, Line, NetworkSpec
from heatplan.scenario import load_scenario, prepare, run_pair

REPO = Path(__file__).resolve().parents[1]
SCENARIO = REPO / "scenarios" / "paper_baseline.toml"


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return REPO


@pytest.fixture(scope="session")
def baseline_prepared():
    return prepare(load_scenario(SCENARIO))


@pytest.fixture(scope="session")
def baseline_pair(baseline_prepared):
    """Both demand variants under the business-as-usual budget."""
    return run_pair(baseline_prepared)


@pytest.fixture(scope="session")
def lowcarbon_pair(baseline_prepared):
    budget = CarbonBudget(baseline_prepared.config.budgets["low_carbon"], "low_carbon")
    return run_pair(baseline_prepared, budget=budget)


def hourly_grid(start: str, days: int, step_hours: float = 1.0,
                weeks: tuple | None = None) -> TimeGrid:
    steps = int(days * 24 / step_hours)
    ts = np.arange(
        np.datetime64(start, "s"),
        np.datetime64(start, "s") + np.timedelta64(int(days * 24 * 3600), "s"),
        np.timedelta64(int(step_hours * 3600), "s"),
    )
    return TimeGrid(step_hours, ts, weeks or ((0, steps),))


def step_grid(steps: int, step_hours: float, weeks: tuple | None = None,
              start: str = "2019-01-01T00:00:00") -> TimeGrid:
    ts = np.arange(
        np.datetime64(start, "s"),
        np.datetime64(start, "s") + np.timedelta64(int(steps * step_hours * 3600), "s"),
        np.timedelta64(int(step_hours * 3600), "s"),
    )
    return TimeGrid(step_hours, ts, weeks or ((0, steps),))


def single_bus_system(demand_gw, step_hours: float = 6.0,
                      existing_ccgt: float = 1.0,
                      budget_t: float = 1e9,
                      weeks: tuple | None = None,
                      wind_availability=None):
    """Minimal one-bus system for expansion unit tests."""
    demand_gw = np.asarray(demand_gw, dtype=np.float64)
    grid = step_grid(demand_gw.size, step_hours, weeks)
    availability = {}
    if wind_availability is not None:
        availability["wind"] = np.asarray(wind_availability, dtype=np.float64)
    network = NetworkSpec(
        (Bus("solo", 0.5, {"ccgt": existing_ccgt}, availability),), (), "solo"
    )
    profile = DemandProfile(grid, {"solo": demand_gw}, DemandKind.HOMOGENEOUS)
    techs = (GeneratorTech("ccgt", 56000.0, 1.0e9, 365.0, 25.0),
             GeneratorTech("wind", 41000.0, 1.3e9, 0.0, 20.0))
    storage = StorageSpec(1.5e8, 10.0, 0.9, 1.0, 4.0, 10.0)
    return network, profile, techs, storage, CarbonBudget(budget_t, "test"), grid


def two_bus_system(step_hours: float = 6.0, line_limit: float = 5.0):
    """Cheap generation at one bus, all demand at the other."""
    grid = hourly_grid("2019-01-01T00:00:00", 1, step_hours)
    steps = grid.num_steps
    network = NetworkSpec(
        (
            Bus("gen", 0.5, {"ccgt": 10.0}),
            Bus("load", 0.5, {}),
        ),
        (Line("tie", "gen", "load", 0.05, line_limit),),
        "gen",
    )
    demand = DemandProfile(
        grid,
        {"gen": np.zeros(steps), "load": np.full(steps, 2.0)},
        DemandKind.HOMOGENEOUS,
    )
    techs = (GeneratorTech("ccgt", 56000.0, 1.0e9, 365.0, 25.0),)
    storage = StorageSpec(1.5e8, 10.0, 0.9, 1.0, 4.0, 10.0)
    return network, demand, techs, storage, CarbonBudget(1e9, "loose"), grid
