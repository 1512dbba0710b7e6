"""Buses, lines, and the DC-power-flow data consumed by the expansion model.

A NetworkSpec is immutable after loading and carries, per bus, the
population share used for demand allocation, existing capacity and
availability per technology, and any exogenous priced injections (for
example nuclear output held at historical levels). Line susceptance is
derived from per-unit reactance, optionally built from line length at a
configured percent-per-km rate. The per-unit base is 1 GW, angles are in
radians, so susceptance times an angle difference is directly a GW flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import tomlout
from .seriesio import InputError, read_time_series, write_time_series


class NetworkError(Exception):
    """Base class for network construction/validation failures."""


class DanglingEndpoint(NetworkError):
    pass


class NonPositiveReactance(NetworkError):
    pass


class NonPositiveInput(NetworkError):
    pass


class DisconnectedNetwork(NetworkError):
    pass


# tolerance for population shares summing slightly above 1 from rounding
_SHARE_SLACK = 1e-9


@dataclass(frozen=True)
class FixedInjection:
    """Exogenous generation at a bus: dispatched as given, priced per GWh."""

    name: str
    series_gw: np.ndarray
    price_per_gwh: float

    def __post_init__(self):
        object.__setattr__(
            self, "series_gw", np.ascontiguousarray(self.series_gw, dtype=np.float64)
        )
        self.series_gw.setflags(write=False)


@dataclass(frozen=True)
class Bus:
    id: str
    population_share: float
    existing_capacity: Mapping[str, float] = field(default_factory=dict)
    availability: Mapping[str, np.ndarray] = field(default_factory=dict)
    fixed_injections: tuple[FixedInjection, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "existing_capacity", dict(self.existing_capacity))
        avail = {
            tech: np.ascontiguousarray(series, dtype=np.float64)
            for tech, series in self.availability.items()
        }
        for series in avail.values():
            series.setflags(write=False)
        object.__setattr__(self, "availability", avail)
        object.__setattr__(self, "fixed_injections", tuple(self.fixed_injections))

    def validate(self) -> None:
        if not 0.0 <= self.population_share <= 1.0:
            raise NetworkError(
                f"bus {self.id}: population share {self.population_share} outside [0, 1]"
            )
        for tech, cap in self.existing_capacity.items():
            if cap < 0:
                raise NetworkError(f"bus {self.id}: negative capacity for {tech}")
        for tech, series in self.availability.items():
            if series.size and (series.min() < 0.0 or series.max() > 1.0):
                raise NetworkError(
                    f"bus {self.id}: availability for {tech} outside [0, 1]"
                )
        for inj in self.fixed_injections:
            if inj.series_gw.size and inj.series_gw.min() < 0:
                raise NetworkError(
                    f"bus {self.id}: fixed injection {inj.name} has negative power"
                )

    def availability_for(self, tech: str, num_steps: int) -> np.ndarray:
        """Availability series for a technology; identically 1 when none is given."""
        series = self.availability.get(tech)
        if series is None:
            return np.ones(num_steps)
        return series

    def total_fixed_injection(self, num_steps: int) -> np.ndarray:
        total = np.zeros(num_steps)
        for inj in self.fixed_injections:
            total = total + inj.series_gw
        return total


@dataclass(frozen=True)
class Line:
    id: str
    from_bus: str
    to_bus: str
    reactance_pu: float
    thermal_limit_gw: float
    length_km: float | None = None

    def validate(self) -> None:
        if self.from_bus == self.to_bus:
            raise NetworkError(f"line {self.id}: connects a bus to itself")
        if not self.reactance_pu > 0:
            raise NonPositiveReactance(
                f"line {self.id}: reactance {self.reactance_pu} must be positive"
            )
        if not self.thermal_limit_gw > 0:
            raise NetworkError(f"line {self.id}: thermal limit must be positive")


@dataclass(frozen=True)
class NetworkSpec:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    slack_bus: str
    # common timebase of the availability / fixed-injection series, when loaded
    series_timestamps: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "lines", tuple(self.lines))
        if self.series_timestamps is not None:
            ts = np.ascontiguousarray(self.series_timestamps).astype("datetime64[s]")
            ts.setflags(write=False)
            object.__setattr__(self, "series_timestamps", ts)

    @property
    def bus_ids(self) -> list[str]:
        return [b.id for b in self.buses]

    @property
    def line_ids(self) -> list[str]:
        return [l.id for l in self.lines]

    def bus(self, bus_id: str) -> Bus:
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise KeyError(bus_id)

    def validate(self) -> None:
        ids = self.bus_ids
        if len(set(ids)) != len(ids):
            raise NetworkError("duplicate bus ids")
        for bus in self.buses:
            bus.validate()
        total_share = sum(b.population_share for b in self.buses)
        if total_share > 1.0 + _SHARE_SLACK:
            raise NetworkError(f"population shares sum to {total_share} > 1")
        id_set = set(ids)
        for line in self.lines:
            line.validate()
            for end in (line.from_bus, line.to_bus):
                if end not in id_set:
                    raise DanglingEndpoint(f"line {line.id}: unknown bus {end!r}")
        if self.slack_bus not in id_set:
            raise NetworkError(f"slack bus {self.slack_bus!r} is not a bus")
        if len(ids) > 1 and not self._connected():
            raise DisconnectedNetwork("network is not connected")
        if self.series_timestamps is not None:
            n = len(self.series_timestamps)
            for bus in self.buses:
                for tech, series in bus.availability.items():
                    if series.shape != (n,):
                        raise NetworkError(
                            f"bus {bus.id}: availability for {tech} has length "
                            f"{series.shape[0]}, expected {n}"
                        )
                for inj in bus.fixed_injections:
                    if inj.series_gw.shape != (n,):
                        raise NetworkError(
                            f"bus {bus.id}: fixed injection {inj.name} has length "
                            f"{inj.series_gw.shape[0]}, expected {n}"
                        )

    def _connected(self) -> bool:
        adjacency: dict[str, set[str]] = {b.id: set() for b in self.buses}
        for line in self.lines:
            adjacency[line.from_bus].add(line.to_bus)
            adjacency[line.to_bus].add(line.from_bus)
        seen = {self.buses[0].id}
        stack = [self.buses[0].id]
        while stack:
            for neighbour in adjacency[stack.pop()]:
                if neighbour not in seen:
                    seen.add(neighbour)
                    stack.append(neighbour)
        return len(seen) == len(self.buses)


def reactance_from_length(length_km: float, per_km_percent: float) -> float:
    """Per-unit reactance of a line of the given length.

    per_km_percent is in percent-per-km, so the result is
    length * per_km_percent / 100.
    """
    if not length_km > 0:
        raise NonPositiveInput(f"length {length_km} km must be positive")
    if not per_km_percent > 0:
        raise NonPositiveInput(f"per-km reactance {per_km_percent} must be positive")
    return length_km * per_km_percent / 100.0


def susceptance(line: Line) -> float:
    """Per-unit susceptance, the reciprocal of line reactance."""
    if not line.reactance_pu > 0:
        raise NonPositiveReactance(
            f"line {line.id}: reactance {line.reactance_pu} must be positive"
        )
    return 1.0 / line.reactance_pu


def bus_line_matrix(network: NetworkSpec) -> np.ndarray:
    """Incidence matrix over (buses x lines): +1 at the origin bus, -1 at the end.

    Every column therefore sums to zero.
    """
    index = {bus_id: k for k, bus_id in enumerate(network.bus_ids)}
    matrix = np.zeros((len(network.buses), len(network.lines)))
    for l, line in enumerate(network.lines):
        try:
            matrix[index[line.from_bus], l] = 1.0
            matrix[index[line.to_bus], l] = -1.0
        except KeyError as exc:
            raise DanglingEndpoint(f"line {line.id}: unknown bus {exc}") from None
    return matrix


# ---------------------------------------------------------------------------
# configuration file round trip


def load_network(path) -> NetworkSpec:
    """Load a network TOML file; series CSV paths are resolved relative to it."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise InputError(f"cannot open network file: {exc.strerror}", path) from exc
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"invalid TOML: {exc}", path) from exc

    base = path.parent
    per_km = raw.get("reactance_per_km_percent")
    timestamps = None

    def load_series(rel):
        nonlocal timestamps
        ts, values = read_time_series(base / rel)
        if timestamps is None:
            timestamps = ts
        elif ts.shape != timestamps.shape or (ts != timestamps).any():
            raise InputError(
                "series timebase differs from the other network series", base / rel
            )
        return values

    buses = []
    for spec in raw.get("buses", []):
        availability = {
            tech: load_series(rel)
            for tech, rel in spec.get("availability_csv", {}).items()
        }
        injections = tuple(
            FixedInjection(
                name=inj["name"],
                series_gw=load_series(inj["series_csv"]),
                price_per_gwh=float(inj["price_per_gwh"]),
            )
            for inj in spec.get("fixed_injections", [])
        )
        try:
            buses.append(
                Bus(
                    id=spec["id"],
                    population_share=float(spec["population_share"]),
                    existing_capacity={
                        tech: float(v)
                        for tech, v in spec.get("existing_capacity_gw", {}).items()
                    },
                    availability=availability,
                    fixed_injections=injections,
                )
            )
        except KeyError as exc:
            raise InputError(f"bus entry missing key {exc}", path) from None

    lines = []
    for spec in raw.get("lines", []):
        try:
            length = spec.get("length_km")
            if "reactance_pu" in spec:
                reactance = float(spec["reactance_pu"])
            elif length is not None and per_km is not None:
                reactance = reactance_from_length(float(length), float(per_km))
            else:
                raise InputError(
                    f"line {spec.get('id', '?')}: give reactance_pu, or length_km "
                    "plus top-level reactance_per_km_percent",
                    path,
                )
            lines.append(
                Line(
                    id=spec["id"],
                    from_bus=spec["from_bus"],
                    to_bus=spec["to_bus"],
                    reactance_pu=reactance,
                    thermal_limit_gw=float(spec["thermal_limit_gw"]),
                    length_km=float(length) if length is not None else None,
                )
            )
        except KeyError as exc:
            raise InputError(f"line entry missing key {exc}", path) from None

    if "slack_bus" not in raw:
        raise InputError("missing slack_bus", path)
    network = NetworkSpec(
        buses=tuple(buses),
        lines=tuple(lines),
        slack_bus=raw["slack_bus"],
        series_timestamps=timestamps,
    )
    network.validate()
    return network


def save_network(network: NetworkSpec, path) -> None:
    """Write the network back to TOML plus one CSV per series, for round trips."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if network.series_timestamps is None and any(
        bus.availability or bus.fixed_injections for bus in network.buses
    ):
        raise NetworkError("cannot serialize series without a timebase")

    doc: dict = {"slack_bus": network.slack_bus}
    bus_entries = []
    for bus in network.buses:
        entry: dict = {"id": bus.id, "population_share": bus.population_share}
        if bus.existing_capacity:
            entry["existing_capacity_gw"] = dict(bus.existing_capacity)
        if bus.availability:
            refs = {}
            for tech, series in sorted(bus.availability.items()):
                rel = f"avail_{tech}_{bus.id}.csv"
                write_time_series(path.parent / rel, network.series_timestamps,
                                  series, "fraction")
                refs[tech] = rel
            entry["availability_csv"] = refs
        if bus.fixed_injections:
            entry["fixed_injections"] = []
            for inj in bus.fixed_injections:
                rel = f"fixed_{inj.name}_{bus.id}.csv"
                write_time_series(path.parent / rel, network.series_timestamps,
                                  inj.series_gw, "gw")
                entry["fixed_injections"].append(
                    {"name": inj.name, "series_csv": rel,
                     "price_per_gwh": inj.price_per_gwh}
                )
        bus_entries.append(entry)
    doc["buses"] = bus_entries
    doc["lines"] = [
        {
            "id": line.id,
            "from_bus": line.from_bus,
            "to_bus": line.to_bus,
            "reactance_pu": line.reactance_pu,
            "thermal_limit_gw": line.thermal_limit_gw,
            **({"length_km": line.length_km} if line.length_km is not None else {}),
        }
        for line in network.lines
    ]
    path.write_text(tomlout.dumps(doc), encoding="utf-8")


def networks_equal(a: NetworkSpec, b: NetworkSpec) -> bool:
    """Structural equality, comparing series contents elementwise."""
    if a.slack_bus != b.slack_bus or a.bus_ids != b.bus_ids or a.line_ids != b.line_ids:
        return False
    if (a.series_timestamps is None) != (b.series_timestamps is None):
        return False
    if a.series_timestamps is not None and (
        a.series_timestamps.shape != b.series_timestamps.shape
        or (a.series_timestamps != b.series_timestamps).any()
    ):
        return False
    for ba, bb in zip(a.buses, b.buses):
        if ba.population_share != bb.population_share:
            return False
        if ba.existing_capacity != bb.existing_capacity:
            return False
        if sorted(ba.availability) != sorted(bb.availability):
            return False
        if any((ba.availability[t] != bb.availability[t]).any() for t in ba.availability):
            return False
        if len(ba.fixed_injections) != len(bb.fixed_injections):
            return False
        for ia, ib in zip(ba.fixed_injections, bb.fixed_injections):
            if ia.name != ib.name or ia.price_per_gwh != ib.price_per_gwh:
                return False
            if (ia.series_gw != ib.series_gw).any():
                return False
    for la, lb in zip(a.lines, b.lines):
        if (la.id, la.from_bus, la.to_bus) != (lb.id, lb.from_bus, lb.to_bus):
            return False
        if la.reactance_pu != lb.reactance_pu or la.thermal_limit_gw != lb.thermal_limit_gw:
            return False
        if la.length_km != lb.length_km:
            return False
    return True
