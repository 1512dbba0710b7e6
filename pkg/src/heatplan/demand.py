"""Per-bus demand synthesis under uniform vs. locally resolved heating.

Total demand at a bus is its population share of a national base series
plus an electric-heating component. The uniform variant allocates one
national heating series by population share; the local variant gives each
bus its own heating series synthesized from local temperature, so profile
shape and magnitude differ by location. Heating comes from a pluggable
temperature-response curve; the shipped default is a degree-day model
whose daily energy is spread over the day by a 48-slot shape table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Mapping, Protocol

import numpy as np


class DemandError(Exception):
    pass


class LengthMismatch(DemandError):
    pass


class WeightSumInvalid(DemandError):
    pass


class MissingBusSeries(DemandError):
    pass


class TemperatureOutOfDomain(DemandError):
    pass


class DemandKind(str, Enum):
    HOMOGENEOUS = "homogeneous"
    HETEROGENEOUS = "heterogeneous"


@dataclass(frozen=True)
class TimeGrid:
    """The modeled horizon: uniform steps grouped into representative weeks.

    week_bounds are half-open [start, stop) index ranges that partition the
    timestamps. Weeks are independent samples: timestamps must be strictly
    increasing within each week, but two selected weeks may overlap in
    source time, so no ordering is imposed across week boundaries.
    """

    step_hours: float
    timestamps: np.ndarray
    week_bounds: tuple[tuple[int, int], ...]

    def __post_init__(self):
        ts = np.ascontiguousarray(self.timestamps).astype("datetime64[s]")
        ts.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "week_bounds", tuple(tuple(w) for w in self.week_bounds))
        if not self.step_hours > 0:
            raise DemandError(f"step_hours {self.step_hours} must be positive")
        cursor = 0
        for start, stop in self.week_bounds:
            if start != cursor or stop <= start:
                raise DemandError("week bounds must be disjoint, ordered, and covering")
            if stop - start > 1 and not np.all(ts[start + 1:stop] > ts[start:stop - 1]):
                raise DemandError("timestamps must be strictly increasing within a week")
            cursor = stop
        if cursor != ts.size:
            raise DemandError("week bounds do not cover the timestamps")

    @property
    def num_steps(self) -> int:
        return self.timestamps.size

    @property
    def num_weeks(self) -> int:
        return len(self.week_bounds)

    @property
    def steps_per_day(self) -> int:
        per_day = 24.0 / self.step_hours
        if abs(per_day - round(per_day)) > 1e-9:
            raise DemandError(f"step of {self.step_hours} h does not divide a day")
        return int(round(per_day))

    def day_groups(self) -> tuple[np.ndarray, np.ndarray]:
        """(day of each group in order, group index of every step).

        Groups are consecutive runs of equal dates, so a date sampled by two
        overlapping weeks forms two groups. Requires every group to cover a
        full day starting at midnight, so a daily quantity maps cleanly
        onto steps.
        """
        days = self.timestamps.astype("datetime64[D]")
        new_group = np.ones(days.size, dtype=bool)
        new_group[1:] = days[1:] != days[:-1]
        for start, _ in self.week_bounds:  # weeks never share a day group
            new_group[start] = True
        group_of_step = np.cumsum(new_group) - 1
        group_days = days[new_group]
        per_day = self.steps_per_day
        counts = np.bincount(group_of_step)
        if (counts != per_day).any():
            raise DemandError("every day in the grid must be fully covered")
        tod = (self.timestamps - days).astype("timedelta64[s]").astype(np.float64) / 3600.0
        expected = np.tile(np.arange(per_day) * self.step_hours, group_days.size)
        if not np.allclose(tod, expected):
            raise DemandError("steps within each day must start at midnight")
        return group_days, group_of_step

    def same_axis(self, other: "TimeGrid") -> bool:
        return (
            self.step_hours == other.step_hours
            and self.timestamps.shape == other.timestamps.shape
            and bool((self.timestamps == other.timestamps).all())
            and self.week_bounds == other.week_bounds
        )


def single_week_grid(step_hours: float, timestamps) -> TimeGrid:
    """Grid treating the whole range as one week; fine for source-resolution data."""
    ts = np.asarray(timestamps)
    return TimeGrid(step_hours, ts, ((0, ts.size),))


@dataclass(frozen=True)
class DemandProfile:
    grid: TimeGrid
    per_bus: Mapping[str, np.ndarray]
    kind: DemandKind

    def __post_init__(self):
        series = {}
        for bus, values in self.per_bus.items():
            arr = np.ascontiguousarray(values, dtype=np.float64)
            if arr.shape != (self.grid.num_steps,):
                raise LengthMismatch(
                    f"bus {bus}: series length {arr.shape[0]} != grid {self.grid.num_steps}"
                )
            if arr.size and arr.min() < 0:
                raise DemandError(f"bus {bus}: negative demand")
            arr.setflags(write=False)
            series[bus] = arr
        object.__setattr__(self, "per_bus", series)

    def total(self) -> np.ndarray:
        out = np.zeros(self.grid.num_steps)
        for series in self.per_bus.values():
            out = out + series
        return out

    def peak_gw(self, bus: str) -> float:
        return float(self.per_bus[bus].max())

    def average_gw(self, bus: str) -> float:
        return float(self.per_bus[bus].mean())


class HeatResponseCurve(Protocol):
    """Maps mean daily temperature and household count to daily heating demand."""

    name: str
    temp_domain: tuple[float, float]

    def daily_energy_gwh(self, temp_c: np.ndarray, households: float) -> np.ndarray:
        ...

    def intraday_shape(self, steps_per_day: int) -> np.ndarray:
        ...


def default_shape_table() -> np.ndarray:
    text = resources.files("heatplan.data").joinpath("heat_shape_48.csv").read_text()
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    shape = np.array([float(frac) for _, frac in rows])
    return shape / shape.sum()


@dataclass(frozen=True)
class DegreeDayCurve:
    """Degree-day heating response, linear in households.

    Daily energy is households * slope * max(0, reference - T), where the
    slope blends air- and ground-source units by their shares (ground
    units draw less electricity per degree-day). The shape table spreads
    that energy over 48 half-hour slots.
    """

    name: str = "degree-day"
    reference_temp_c: float = 15.5
    slope_air_kwh: float = 2.4      # kWh per household per degree-day
    slope_ground_kwh: float = 1.8
    air_share: float = 0.75
    ground_share: float = 0.25
    temp_domain: tuple[float, float] = (-30.0, 45.0)
    shape48: np.ndarray = field(default_factory=default_shape_table)

    def __post_init__(self):
        shape = np.ascontiguousarray(self.shape48, dtype=np.float64)
        shape.setflags(write=False)
        object.__setattr__(self, "shape48", shape)
        if abs(self.air_share + self.ground_share - 1.0) > 1e-9:
            raise DemandError("air and ground source shares must sum to 1")
        if self.slope_air_kwh < 0 or self.slope_ground_kwh < 0:
            raise DemandError("slopes must be non-negative")
        if shape.shape != (48,) or shape.min() < 0 or abs(shape.sum() - 1.0) > 1e-9:
            raise DemandError("shape table must be 48 non-negative fractions summing to 1")

    @property
    def slope_kwh(self) -> float:
        return self.air_share * self.slope_air_kwh + self.ground_share * self.slope_ground_kwh

    def daily_energy_gwh(self, temp_c, households: float) -> np.ndarray:
        temp = np.asarray(temp_c, dtype=np.float64)
        degree_days = np.maximum(0.0, self.reference_temp_c - temp)
        return households * self.slope_kwh * degree_days * 1e-6  # kWh -> GWh

    def intraday_shape(self, steps_per_day: int) -> np.ndarray:
        if 48 % steps_per_day != 0:
            raise DemandError(
                f"{steps_per_day} steps per day does not align with the 48-slot table"
            )
        return self.shape48.reshape(steps_per_day, 48 // steps_per_day).sum(axis=1)


def population_weighted_temperature(
    local_temps: Mapping[str, np.ndarray], weights: Mapping[str, float]
) -> np.ndarray:
    """Weighted mean daily temperature across areas; weights must sum to 1."""
    if not local_temps:
        raise WeightSumInvalid("no areas given")
    missing = [area for area in local_temps if area not in weights]
    if missing:
        raise WeightSumInvalid(f"no weight for areas: {missing}")
    used = {area: float(weights[area]) for area in local_temps}
    if any(w < 0 for w in used.values()):
        raise WeightSumInvalid("weights must be non-negative")
    total = sum(used.values())
    if abs(total - 1.0) > 1e-9:
        raise WeightSumInvalid(f"weights sum to {total}, expected 1")
    lengths = {series.__len__() for series in local_temps.values()}
    if len(lengths) != 1:
        raise LengthMismatch(f"temperature series lengths differ: {sorted(lengths)}")
    out = np.zeros(lengths.pop())
    for area, series in local_temps.items():
        out = out + used[area] * np.asarray(series, dtype=np.float64)
    return out


def synthesize_heat_series(
    curve: HeatResponseCurve,
    daily_temps_c,
    households: float,
    grid: TimeGrid,
) -> np.ndarray:
    """Heating power per grid step from daily temperatures.

    Each day's total energy comes from the curve at that day's mean
    temperature; the curve's intraday shape splits it across the day's
    steps, and power is energy per step divided by the step length.
    """
    if households < 0:
        raise DemandError(f"households {households} must be non-negative")
    temps = np.asarray(daily_temps_c, dtype=np.float64)
    days, day_of_step = grid.day_groups()
    if temps.shape != (days.size,):
        raise LengthMismatch(
            f"{temps.shape[0]} daily temperatures for {days.size} grid days"
        )
    low, high = curve.temp_domain
    if temps.size and (temps.min() < low or temps.max() > high):
        bad = float(temps.min() if temps.min() < low else temps.max())
        raise TemperatureOutOfDomain(
            f"temperature {bad} outside curve domain [{low}, {high}]"
        )
    energy_gwh = curve.daily_energy_gwh(temps, households)
    shape = curve.intraday_shape(grid.steps_per_day)
    per_step_share = np.tile(shape, days.size)
    return energy_gwh[day_of_step] * per_step_share / grid.step_hours


def _check_series(grid: TimeGrid, name: str, series) -> np.ndarray:
    arr = np.asarray(series, dtype=np.float64)
    if arr.shape != (grid.num_steps,):
        raise LengthMismatch(
            f"{name} has length {arr.shape[0]}, grid has {grid.num_steps} steps"
        )
    return arr


def homogeneous_demand(
    grid: TimeGrid,
    base_national_gw,
    heat_national_gw,
    shares: Mapping[str, float],
) -> DemandProfile:
    """Allocate national base and national heating to buses by population share."""
    base = _check_series(grid, "base demand", base_national_gw)
    heat = _check_series(grid, "national heating", heat_national_gw)
    per_bus = {
        bus: share * base + share * heat for bus, share in shares.items()
    }
    return DemandProfile(grid, per_bus, DemandKind.HOMOGENEOUS)


def heterogeneous_demand(
    grid: TimeGrid,
    base_national_gw,
    local_heat_gw: Mapping[str, np.ndarray],
    shares: Mapping[str, float],
) -> DemandProfile:
    """Population share of national base plus each bus's own heating series."""
    base = _check_series(grid, "base demand", base_national_gw)
    per_bus = {}
    for bus, share in shares.items():
        if bus not in local_heat_gw:
            raise MissingBusSeries(f"no local heating series for bus {bus}")
        heat = _check_series(grid, f"heating at {bus}", local_heat_gw[bus])
        per_bus[bus] = share * base + heat
    return DemandProfile(grid, per_bus, DemandKind.HETEROGENEOUS)
