"""Joint generation/storage expansion as a linear program over a TimeGrid.

The assembled problem minimises dispatch cost plus amortised capital for
new generation, storage energy, and storage power, subject to:

  * bus power balance against line flows (``bal`` rows) and the DC flow
    law tying flows to voltage-angle differences (``dcpf`` rows),
  * thermal line limits as a two-sided range on net flow (``flow``),
  * dispatch capped by availability times existing plus new capacity
    (``genlim``), with new capacity fixed at zero for non-expandable
    technologies,
  * one emissions budget row over the whole horizon (``carbon``),
  * the split of generator output into network/demand/storage shares
    (``gsplit``), the bus net-injection balance (``net``), and the
    demand-supply balance (``dem``), with discharge efficiency applied on
    the storage-to-network and storage-to-demand paths; the emissions
    budget can optionally be split evenly across weeks (``carbon[w]``
    rows) instead of the single joint row,
  * storage charge/discharge power caps (``chg``/``dis``), the state of
    charge box (``socub``), the per-week charge recursion (``soc``), the
    week-start anchor (``soc0``), cyclic state of charge per week
    (``cyc``), and the energy-to-power duration corridor
    (``epmin``/``epmax``).

Weeks are independent samples: the charge recursion never crosses a week
boundary, each week anchors its own initial state, and the cyclic row
closes each week onto its anchor including the final step's flows.

For variable and row counts as functions of buses I, lines L,
technologies G, steps T, and weeks W:

    variables = I*T*(G + 10) + 2*L*T + G*I + 2*I + I*W
    rows      = I*T*(G + 7)  + 2*L*T + I*(T - W) + 2*I*W + 2*I + 1
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .demand import DemandProfile, TimeGrid
from .lp import LpProblem, LpSolution, Status
from .network import NetworkSpec, bus_line_matrix, susceptance


class ExpansionError(Exception):
    pass


class GridMismatch(ExpansionError):
    pass


class UnknownTech(ExpansionError):
    pass


class NotOptimal(ExpansionError):
    pass


class ShapeMismatch(ExpansionError):
    pass


class NonPositiveLifetime(ExpansionError):
    pass


@dataclass(frozen=True)
class GeneratorTech:
    """A dispatchable or renewable technology with its cost and emissions data."""

    name: str
    dispatch_cost_per_gwh: float
    capital_cost_per_gw: float
    emission_intensity_t_per_gwh: float = 0.0
    lifetime_years: float = 25.0
    expandable: bool = True

    def validate(self) -> None:
        if self.dispatch_cost_per_gwh < 0 or self.capital_cost_per_gw < 0:
            raise ExpansionError(f"tech {self.name}: costs must be non-negative")
        if self.emission_intensity_t_per_gwh < 0:
            raise ExpansionError(f"tech {self.name}: emission intensity must be >= 0")
        if not self.lifetime_years > 0:
            raise NonPositiveLifetime(f"tech {self.name}: lifetime must be positive")


@dataclass(frozen=True)
class StorageSpec:
    energy_capital_cost_per_gwh: float
    power_capital_cost_per_gw: float
    efficiency: float = 0.9
    ratio_min_hours: float = 1.0
    ratio_max_hours: float = 4.0
    lifetime_years: float = 10.0

    def validate(self) -> None:
        if not 0.0 < self.efficiency <= 1.0:
            raise ExpansionError(f"storage efficiency {self.efficiency} outside (0, 1]")
        if not 0.0 < self.ratio_min_hours <= self.ratio_max_hours:
            raise ExpansionError("storage duration bounds must satisfy 0 < min <= max")
        if self.energy_capital_cost_per_gwh < 0 or self.power_capital_cost_per_gw < 0:
            raise ExpansionError("storage capital costs must be non-negative")
        if not self.lifetime_years > 0:
            raise NonPositiveLifetime("storage lifetime must be positive")


@dataclass(frozen=True)
class CarbonBudget:
    limit_t: float
    label: str = ""

    def validate(self) -> None:
        if self.limit_t < 0:
            raise ExpansionError(f"carbon budget {self.limit_t} must be non-negative")


def amortized_capital(cost_per_unit: float, lifetime_years: float,
                      periods_per_year: float = 4.0) -> float:
    """Capital cost per unit and reporting period, spread over asset lifetime."""
    if not lifetime_years > 0:
        raise NonPositiveLifetime(f"lifetime {lifetime_years} must be positive")
    if not periods_per_year > 0:
        raise ExpansionError(f"periods per year {periods_per_year} must be positive")
    return cost_per_unit / (lifetime_years * periods_per_year)


_SPLIT_NAMES = ("g2n", "g2d", "g2s", "n2s", "n2d", "s2n", "s2d")


@dataclass(frozen=True)
class VariableMap:
    """Offsets and shapes of every variable block in the flat LP vector."""

    blocks: Mapping[str, tuple[int, tuple[int, ...]]]
    num_variables: int

    def extract(self, name: str, x: np.ndarray) -> np.ndarray:
        offset, shape = self.blocks[name]
        size = int(np.prod(shape)) if shape else 1
        return np.asarray(x[offset:offset + size]).reshape(shape).copy()

    def indices(self, name: str) -> np.ndarray:
        offset, shape = self.blocks[name]
        size = int(np.prod(shape)) if shape else 1
        return (offset + np.arange(size)).reshape(shape)


@dataclass(frozen=True)
class ExpansionProblem:
    lp: LpProblem
    vmap: VariableMap
    network: NetworkSpec
    demand: DemandProfile
    techs: tuple[GeneratorTech, ...]
    storage: StorageSpec
    budget: CarbonBudget
    grid: TimeGrid
    periods_per_year: float
    fixed_injection_cost: float
    carbon_per_week: bool = False


@dataclass(frozen=True)
class ExpansionSolution:
    """Typed view of an optimal expansion plan."""

    bus_ids: tuple[str, ...]
    line_ids: tuple[str, ...]
    tech_names: tuple[str, ...]
    grid: TimeGrid
    dispatch: np.ndarray          # (G, I, T) GW
    new_capacity: np.ndarray      # (G, I) GW
    storage_energy: np.ndarray    # (I,) GWh
    storage_power: np.ndarray     # (I,) GW
    soc: np.ndarray               # (I, T) GWh
    soc_initial: np.ndarray       # (I, W) GWh
    flow_forward: np.ndarray      # (L, T) GW
    flow_reverse: np.ndarray      # (L, T) GW
    angles: np.ndarray            # (I, T) rad
    net_injection: np.ndarray     # (I, T) GW
    splits: Mapping[str, np.ndarray]  # each (I, T) GW
    capital_cost: float
    dispatch_cost: float
    fixed_injection_cost: float
    objective_value: float

    @property
    def total_cost(self) -> float:
        return self.capital_cost + self.dispatch_cost + self.fixed_injection_cost

    def storage_duration_hours(self, minimum_power_gw: float = 1e-6) -> np.ndarray:
        """Per-bus energy-to-power ratio; NaN where no meaningful power is built."""
        power = self.storage_power
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(power > minimum_power_gw, self.storage_energy / power, np.nan)
        return ratio


def _validated_inputs(network, demand, techs, storage, budget, grid):
    network.validate()
    storage.validate()
    budget.validate()
    names = [t.name for t in techs]
    if len(set(names)) != len(names):
        raise UnknownTech(f"duplicate technology names in {names}")
    for tech in techs:
        tech.validate()
    if not demand.grid.same_axis(grid):
        raise GridMismatch("demand profile grid differs from the model grid")
    known = set(names)
    for bus in network.buses:
        if bus.id not in demand.per_bus:
            raise GridMismatch(f"demand profile has no series for bus {bus.id}")
        for tech in bus.existing_capacity:
            if tech not in known:
                raise UnknownTech(f"bus {bus.id}: capacity for unknown tech {tech!r}")
        for tech, series in bus.availability.items():
            if tech not in known:
                raise UnknownTech(f"bus {bus.id}: availability for unknown tech {tech!r}")
            if series.shape != (grid.num_steps,):
                raise GridMismatch(
                    f"bus {bus.id}: availability for {tech} has length "
                    f"{series.shape[0]}, grid has {grid.num_steps}"
                )
        for inj in bus.fixed_injections:
            if inj.series_gw.shape != (grid.num_steps,):
                raise GridMismatch(
                    f"bus {bus.id}: fixed injection {inj.name} has length "
                    f"{inj.series_gw.shape[0]}, grid has {grid.num_steps}"
                )


class _Assembler:
    def __init__(self):
        self.rows: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []
        self.row_lower: list[np.ndarray] = []
        self.row_upper: list[np.ndarray] = []
        self.row_names: list[str] = []
        self.num_rows = 0

    def add_rows(self, names: list[str], lower, upper) -> np.ndarray:
        start = self.num_rows
        count = len(names)
        self.row_names.extend(names)
        self.row_lower.append(np.broadcast_to(np.asarray(lower, dtype=np.float64),
                                              (count,)).copy())
        self.row_upper.append(np.broadcast_to(np.asarray(upper, dtype=np.float64),
                                              (count,)).copy())
        self.num_rows += count
        return start + np.arange(count)

    def entries(self, rows, cols, vals) -> None:
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.float64).ravel()
        vals_b = np.broadcast_to(vals, rows.shape) if vals.size == 1 else vals
        keep = vals_b != 0.0
        self.rows.append(rows[keep])
        self.cols.append(cols[keep])
        self.vals.append(np.asarray(vals_b[keep]))


def build(
    network: NetworkSpec,
    demand: DemandProfile,
    techs: list[GeneratorTech] | tuple[GeneratorTech, ...],
    storage: StorageSpec,
    budget: CarbonBudget,
    grid: TimeGrid,
    periods_per_year: float = 4.0,
    carbon_per_week: bool = False,
) -> ExpansionProblem:
    """Assemble the expansion LP; see the module docstring for the row map.

    With carbon_per_week the budget is split evenly over the representative
    weeks, one row per week, instead of the single joint row.
    """
    techs = tuple(techs)
    _validated_inputs(network, demand, techs, storage, budget, grid)

    buses = network.bus_ids
    lines = network.line_ids
    I, L, G = len(buses), len(lines), len(techs)
    T, W = grid.num_steps, grid.num_weeks
    tau = grid.step_hours

    incidence = bus_line_matrix(network)
    b_line = np.array([susceptance(line) for line in network.lines])
    from_idx = np.array([buses.index(l.from_bus) for l in network.lines], dtype=np.int64)
    to_idx = np.array([buses.index(l.to_bus) for l in network.lines], dtype=np.int64)
    limit = np.array([l.thermal_limit_gw for l in network.lines])

    avail = np.ones((G, I, T))
    c_old = np.zeros((G, I))
    for i, bus_id in enumerate(buses):
        bus = network.bus(bus_id)
        for g, tech in enumerate(techs):
            avail[g, i] = bus.availability_for(tech.name, T)
            c_old[g, i] = bus.existing_capacity.get(tech.name, 0.0)
    fixed = np.zeros((I, T))
    fixed_cost = 0.0
    for i, bus_id in enumerate(buses):
        for inj in network.bus(bus_id).fixed_injections:
            fixed[i] += inj.series_gw
            fixed_cost += float(inj.series_gw.sum()) * tau * inj.price_per_gwh
    p_d = np.stack([demand.per_bus[b] for b in buses])

    # ---- variables -------------------------------------------------------
    blocks: dict[str, tuple[int, tuple[int, ...]]] = {}
    cursor = 0

    def block(name: str, *shape: int) -> np.ndarray:
        nonlocal cursor
        size = int(np.prod(shape)) if shape else 1
        blocks[name] = (cursor, shape)
        out = (cursor + np.arange(size)).reshape(shape)
        cursor += size
        return out

    v_p = block("p", G, I, T)
    v_cnew = block("cnew", G, I)
    v_socmax = block("socmax", I)
    v_psmax = block("psmax", I)
    v_soc = block("soc", I, T)
    v_soc0 = block("soc0", I, W)
    v_fp = block("fp", L, T)
    v_fm = block("fm", L, T)
    v_ang = block("ang", I, T)
    v_pnet = block("pnet", I, T)
    v_split = {name: block(name, I, T) for name in _SPLIT_NAMES}
    n_vars = cursor
    vmap = VariableMap(blocks, n_vars)

    lo = np.zeros(n_vars)
    up = np.full(n_vars, np.inf)
    for g, tech in enumerate(techs):
        if not tech.expandable:
            up[v_cnew[g]] = 0.0
    lo[v_ang] = -np.inf
    lo[v_pnet] = -np.inf
    slack_i = buses.index(network.slack_bus)
    lo[v_ang[slack_i]] = 0.0
    up[v_ang[slack_i]] = 0.0

    cost = np.zeros(n_vars)
    for g, tech in enumerate(techs):
        cost[v_p[g]] = tech.dispatch_cost_per_gwh * tau
        cost[v_cnew[g]] = amortized_capital(
            tech.capital_cost_per_gw, tech.lifetime_years, periods_per_year
        )
    cost[v_socmax] = amortized_capital(
        storage.energy_capital_cost_per_gwh, storage.lifetime_years, periods_per_year
    )
    cost[v_psmax] = amortized_capital(
        storage.power_capital_cost_per_gw, storage.lifetime_years, periods_per_year
    )

    var_names = [""] * n_vars
    steps = np.arange(T)
    for g, tech in enumerate(techs):
        for i, bus_id in enumerate(buses):
            for t in steps:
                var_names[v_p[g, i, t]] = f"p[{tech.name},{bus_id},{t}]"
            var_names[v_cnew[g, i]] = f"cnew[{tech.name},{bus_id}]"
    for i, bus_id in enumerate(buses):
        var_names[v_socmax[i]] = f"socmax[{bus_id}]"
        var_names[v_psmax[i]] = f"psmax[{bus_id}]"
        for t in steps:
            var_names[v_soc[i, t]] = f"soc[{bus_id},{t}]"
            var_names[v_ang[i, t]] = f"ang[{bus_id},{t}]"
            var_names[v_pnet[i, t]] = f"pnet[{bus_id},{t}]"
            for name in _SPLIT_NAMES:
                var_names[v_split[name][i, t]] = f"{name}[{bus_id},{t}]"
        for w in range(W):
            var_names[v_soc0[i, w]] = f"soc0[{bus_id},{w}]"
    for l, line_id in enumerate(lines):
        for t in steps:
            var_names[v_fp[l, t]] = f"fp[{line_id},{t}]"
            var_names[v_fm[l, t]] = f"fm[{line_id},{t}]"

    # ---- rows ------------------------------------------------------------
    asm = _Assembler()
    eta = storage.efficiency

    # bus power balance: pnet - sum_l L[i,l] (fp - fm) = 0
    r = asm.add_rows([f"bal[{b},{t}]" for b in buses for t in steps], 0.0, 0.0)
    r_bal = r.reshape(I, T)
    asm.entries(r_bal, v_pnet, 1.0)
    for i in range(I):
        for l in range(L):
            sign = incidence[i, l]
            if sign:
                asm.entries(r_bal[i], v_fp[l], -sign)
                asm.entries(r_bal[i], v_fm[l], sign)

    # DC flow: fp - fm - B (ang_from - ang_to) = 0
    r = asm.add_rows([f"dcpf[{l},{t}]" for l in lines for t in steps], 0.0, 0.0)
    r_dcpf = r.reshape(L, T)
    asm.entries(r_dcpf, v_fp, 1.0)
    asm.entries(r_dcpf, v_fm, -1.0)
    for l in range(L):
        asm.entries(r_dcpf[l], v_ang[from_idx[l]], -b_line[l])
        asm.entries(r_dcpf[l], v_ang[to_idx[l]], b_line[l])

    # thermal limits: -limit <= fp - fm <= limit
    r = asm.add_rows(
        [f"flow[{l},{t}]" for l in lines for t in steps],
        np.repeat(-limit, T), np.repeat(limit, T),
    )
    r_flow = r.reshape(L, T)
    asm.entries(r_flow, v_fp, 1.0)
    asm.entries(r_flow, v_fm, -1.0)

    # generation limits: p - A cnew <= A c_old
    r = asm.add_rows(
        [f"genlim[{t.name},{b},{s}]" for t in techs for b in buses for s in steps],
        -np.inf,
        (avail * c_old[:, :, None]).ravel(),
    )
    r_genlim = r.reshape(G, I, T)
    asm.entries(r_genlim, v_p, 1.0)
    for g in range(G):
        for i in range(I):
            asm.entries(r_genlim[g, i], np.full(T, v_cnew[g, i]), -avail[g, i])

    # generator output split: sum_g p + fixed = g2n + g2d + g2s
    r = asm.add_rows([f"gsplit[{b},{t}]" for b in buses for t in steps],
                     (-fixed).ravel(), (-fixed).ravel())
    r_gsplit = r.reshape(I, T)
    for g in range(G):
        asm.entries(r_gsplit, v_p[g], 1.0)
    for name, sign in (("g2n", -1.0), ("g2d", -1.0), ("g2s", -1.0)):
        asm.entries(r_gsplit, v_split[name], sign)

    # net injection balance: pnet - g2n - eta s2n + n2s + n2d = 0
    r = asm.add_rows([f"net[{b},{t}]" for b in buses for t in steps], 0.0, 0.0)
    r_net = r.reshape(I, T)
    asm.entries(r_net, v_pnet, 1.0)
    asm.entries(r_net, v_split["g2n"], -1.0)
    asm.entries(r_net, v_split["s2n"], -eta)
    asm.entries(r_net, v_split["n2s"], 1.0)
    asm.entries(r_net, v_split["n2d"], 1.0)

    # demand balance: g2d + eta s2d + n2d = demand
    r = asm.add_rows([f"dem[{b},{t}]" for b in buses for t in steps],
                     p_d.ravel(), p_d.ravel())
    r_dem = r.reshape(I, T)
    asm.entries(r_dem, v_split["g2d"], 1.0)
    asm.entries(r_dem, v_split["s2d"], eta)
    asm.entries(r_dem, v_split["n2d"], 1.0)

    # charge and discharge power caps
    r = asm.add_rows([f"chg[{b},{t}]" for b in buses for t in steps], -np.inf, 0.0)
    r_chg = r.reshape(I, T)
    asm.entries(r_chg, v_split["g2s"], 1.0)
    asm.entries(r_chg, v_split["n2s"], 1.0)
    for i in range(I):
        asm.entries(r_chg[i], np.full(T, v_psmax[i]), -1.0)

    r = asm.add_rows([f"dis[{b},{t}]" for b in buses for t in steps], -np.inf, 0.0)
    r_dis = r.reshape(I, T)
    asm.entries(r_dis, v_split["s2n"], 1.0)
    asm.entries(r_dis, v_split["s2d"], 1.0)
    for i in range(I):
        asm.entries(r_dis[i], np.full(T, v_psmax[i]), -1.0)

    # state of charge ceiling: soc - socmax <= 0
    r = asm.add_rows([f"socub[{b},{t}]" for b in buses for t in steps], -np.inf, 0.0)
    r_socub = r.reshape(I, T)
    asm.entries(r_socub, v_soc, 1.0)
    for i in range(I):
        asm.entries(r_socub[i], np.full(T, v_socmax[i]), -1.0)

    # charge recursion within each week, plus week-start anchor and cycle
    def charge_terms(row_ids, i, t, sign):
        asm.entries(row_ids, np.array([v_split["g2s"][i, t]]), sign * tau)
        asm.entries(row_ids, np.array([v_split["n2s"][i, t]]), sign * tau)
        asm.entries(row_ids, np.array([v_split["s2n"][i, t]]), -sign * tau)
        asm.entries(row_ids, np.array([v_split["s2d"][i, t]]), -sign * tau)

    for i, bus_id in enumerate(buses):
        for w, (w_start, w_stop) in enumerate(grid.week_bounds):
            for t in range(w_start + 1, w_stop):
                row = asm.add_rows([f"soc[{bus_id},{t}]"], 0.0, 0.0)
                asm.entries(row, np.array([v_soc[i, t]]), 1.0)
                asm.entries(row, np.array([v_soc[i, t - 1]]), -1.0)
                charge_terms(row, i, t - 1, -1.0)
            row = asm.add_rows([f"soc0[{bus_id},{w}]"], 0.0, 0.0)
            asm.entries(row, np.array([v_soc[i, w_start]]), 1.0)
            asm.entries(row, np.array([v_soc0[i, w]]), -1.0)
            row = asm.add_rows([f"cyc[{bus_id},{w}]"], 0.0, 0.0)
            asm.entries(row, np.array([v_soc[i, w_stop - 1]]), 1.0)
            charge_terms(row, i, w_stop - 1, 1.0)
            asm.entries(row, np.array([v_soc0[i, w]]), -1.0)

    # the emissions budget: one joint row, or an even per-week split
    if carbon_per_week:
        for w, (w_start, w_stop) in enumerate(grid.week_bounds):
            row = asm.add_rows([f"carbon[{w}]"], -np.inf, budget.limit_t / W)
            width = w_stop - w_start
            for g, tech in enumerate(techs):
                if tech.emission_intensity_t_per_gwh > 0:
                    asm.entries(
                        np.broadcast_to(row, (I * width,)),
                        v_p[g][:, w_start:w_stop],
                        tau * tech.emission_intensity_t_per_gwh,
                    )
    else:
        row = asm.add_rows(["carbon"], -np.inf, budget.limit_t)
        for g, tech in enumerate(techs):
            if tech.emission_intensity_t_per_gwh > 0:
                asm.entries(
                    np.broadcast_to(row, (I * T,)), v_p[g],
                    tau * tech.emission_intensity_t_per_gwh,
                )

    # storage duration corridor
    for i, bus_id in enumerate(buses):
        row = asm.add_rows([f"epmin[{bus_id}]"], -np.inf, 0.0)
        asm.entries(row, np.array([v_psmax[i]]), storage.ratio_min_hours)
        asm.entries(row, np.array([v_socmax[i]]), -1.0)
        row = asm.add_rows([f"epmax[{bus_id}]"], -np.inf, 0.0)
        asm.entries(row, np.array([v_socmax[i]]), 1.0)
        asm.entries(row, np.array([v_psmax[i]]), -storage.ratio_max_hours)

    problem = LpProblem(
        objective=cost,
        a_rows=np.concatenate(asm.rows) if asm.rows else np.zeros(0, dtype=np.int64),
        a_cols=np.concatenate(asm.cols) if asm.cols else np.zeros(0, dtype=np.int64),
        a_vals=np.concatenate(asm.vals) if asm.vals else np.zeros(0),
        row_lower=np.concatenate(asm.row_lower),
        row_upper=np.concatenate(asm.row_upper),
        var_lower=lo,
        var_upper=up,
        variable_names=tuple(var_names),
        row_names=tuple(asm.row_names),
    )
    problem.validate()
    return ExpansionProblem(
        lp=problem,
        vmap=vmap,
        network=network,
        demand=demand,
        techs=techs,
        storage=storage,
        budget=budget,
        grid=grid,
        periods_per_year=periods_per_year,
        fixed_injection_cost=fixed_cost,
        carbon_per_week=carbon_per_week,
    )


def expected_sizes(num_buses: int, num_lines: int, num_techs: int,
                   num_steps: int, num_weeks: int,
                   carbon_per_week: bool = False) -> tuple[int, int]:
    """(variables, rows) of the assembled LP; the closed form tested against build."""
    I, L, G, T, W = num_buses, num_lines, num_techs, num_steps, num_weeks
    n = I * T * (G + 10) + 2 * L * T + G * I + 2 * I + I * W
    carbon_rows = W if carbon_per_week else 1
    m = I * T * (G + 7) + 2 * L * T + I * (T - W) + 2 * I * W + 2 * I + carbon_rows
    return n, m


def _snap_to_bounds(x: np.ndarray, lo: np.ndarray, up: np.ndarray,
                    atol: float = 1e-9) -> np.ndarray:
    out = x.copy()
    near_lo = np.isfinite(lo) & (np.abs(out - lo) <= atol)
    out[near_lo] = lo[near_lo]
    near_up = np.isfinite(up) & (np.abs(out - up) <= atol)
    out[near_up] = up[near_up]
    return out


def decode(problem: ExpansionProblem, lp_solution: LpSolution) -> ExpansionSolution:
    """Map an optimal LP solution back onto the typed plan.

    Values within 1e-9 of a variable bound are snapped onto it, which
    removes solver round-off without moving any residual beyond audit
    tolerance. The re-evaluated objective must agree with the solver's.
    """
    if lp_solution.status is not Status.OPTIMAL:
        raise NotOptimal(f"cannot decode a solution with status {lp_solution.status.value}")
    x = _snap_to_bounds(
        np.asarray(lp_solution.primal, dtype=np.float64),
        problem.lp.var_lower, problem.lp.var_upper,
    )
    vmap = problem.vmap
    techs = problem.techs
    tau = problem.grid.step_hours

    dispatch = vmap.extract("p", x)
    cnew = vmap.extract("cnew", x)
    socmax = vmap.extract("socmax", x)
    psmax = vmap.extract("psmax", x)

    capital = 0.0
    dispatch_cost = 0.0
    for g, tech in enumerate(techs):
        capital += amortized_capital(
            tech.capital_cost_per_gw, tech.lifetime_years, problem.periods_per_year
        ) * float(cnew[g].sum())
        dispatch_cost += tech.dispatch_cost_per_gwh * tau * float(dispatch[g].sum())
    capital += amortized_capital(
        problem.storage.energy_capital_cost_per_gwh,
        problem.storage.lifetime_years, problem.periods_per_year,
    ) * float(socmax.sum())
    capital += amortized_capital(
        problem.storage.power_capital_cost_per_gw,
        problem.storage.lifetime_years, problem.periods_per_year,
    ) * float(psmax.sum())

    objective = capital + dispatch_cost
    drift = abs(objective - lp_solution.objective_value)
    if drift > 1e-6 * (1.0 + abs(lp_solution.objective_value)):
        raise ExpansionError(
            f"decoded objective {objective} disagrees with solver value "
            f"{lp_solution.objective_value}"
        )

    return ExpansionSolution(
        bus_ids=tuple(problem.network.bus_ids),
        line_ids=tuple(problem.network.line_ids),
        tech_names=tuple(t.name for t in techs),
        grid=problem.grid,
        dispatch=dispatch,
        new_capacity=cnew,
        storage_energy=socmax,
        storage_power=psmax,
        soc=vmap.extract("soc", x),
        soc_initial=vmap.extract("soc0", x),
        flow_forward=vmap.extract("fp", x),
        flow_reverse=vmap.extract("fm", x),
        angles=vmap.extract("ang", x),
        net_injection=vmap.extract("pnet", x),
        splits={name: vmap.extract(name, x) for name in _SPLIT_NAMES},
        capital_cost=capital,
        dispatch_cost=dispatch_cost,
        fixed_injection_cost=problem.fixed_injection_cost,
        objective_value=objective,
    )


@dataclass(frozen=True)
class ConstraintReport:
    """Max residual per constraint family, recomputed from typed arrays."""

    residuals: Mapping[str, float]
    tolerance: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    @property
    def ok(self) -> bool:
        return self.max_residual <= self.tolerance

    def worst(self) -> tuple[str, float]:
        name = max(self.residuals, key=self.residuals.get)
        return name, self.residuals[name]


def audit(
    solution: ExpansionSolution,
    network: NetworkSpec,
    demand: DemandProfile,
    techs: list[GeneratorTech] | tuple[GeneratorTech, ...],
    storage: StorageSpec,
    budget: CarbonBudget,
    grid: TimeGrid,
    tol: float = 1e-6,
    carbon_per_week: bool = False,
) -> ConstraintReport:
    """Evaluate every constraint family's residual directly from the solution.

    Deliberately independent of the LP layer: everything is recomputed
    from the typed arrays and model inputs, so it closes the loop on both
    the assembler and the solver.
    """
    techs = tuple(techs)
    buses = network.bus_ids
    I, T, W = len(buses), grid.num_steps, grid.num_weeks
    G, L = len(techs), len(network.lines)
    if solution.dispatch.shape != (G, I, T):
        raise ShapeMismatch(
            f"dispatch shape {solution.dispatch.shape} != {(G, I, T)}"
        )
    if solution.soc.shape != (I, T) or solution.flow_forward.shape != (L, T):
        raise ShapeMismatch("solution arrays disagree with the model dimensions")
    tau = grid.step_hours
    eta = storage.efficiency
    sp = solution.splits

    incidence = bus_line_matrix(network)
    b_line = np.array([susceptance(line) for line in network.lines])
    from_idx = np.array([buses.index(l.from_bus) for l in network.lines], dtype=np.int64)
    to_idx = np.array([buses.index(l.to_bus) for l in network.lines], dtype=np.int64)
    limit = np.array([l.thermal_limit_gw for l in network.lines])
    p_d = np.stack([demand.per_bus[b] for b in buses])
    fixed = np.zeros((I, T))
    for i, bus_id in enumerate(buses):
        fixed[i] = network.bus(bus_id).total_fixed_injection(T)

    def peak(values) -> float:
        arr = np.asarray(values)
        return float(arr.max()) if arr.size else 0.0

    flow = solution.flow_forward - solution.flow_reverse
    residuals: dict[str, float] = {}
    residuals["balance"] = peak(np.abs(solution.net_injection - incidence @ flow))
    if L:
        angle_drop = solution.angles[from_idx] - solution.angles[to_idx]
        residuals["dc_flow"] = peak(np.abs(flow - b_line[:, None] * angle_drop))
        residuals["flow_limit"] = peak(np.maximum(0.0, np.abs(flow) - limit[:, None]))
    else:
        residuals["dc_flow"] = 0.0
        residuals["flow_limit"] = 0.0

    cap = np.zeros((G, I, T))
    for i, bus_id in enumerate(buses):
        bus = network.bus(bus_id)
        for g, tech in enumerate(techs):
            cap[g, i] = bus.availability_for(tech.name, T) * (
                bus.existing_capacity.get(tech.name, 0.0) + solution.new_capacity[g, i]
            )
    residuals["gen_limit"] = max(
        peak(np.maximum(0.0, solution.dispatch - cap)),
        peak(np.maximum(0.0, -solution.dispatch)),
    )

    emission_rate = np.zeros(T)
    for g, tech in enumerate(techs):
        if tech.emission_intensity_t_per_gwh > 0:
            emission_rate += tau * tech.emission_intensity_t_per_gwh * \
                solution.dispatch[g].sum(axis=0)
    if carbon_per_week:
        residuals["carbon"] = max(
            (max(0.0, float(emission_rate[start:stop].sum()) - budget.limit_t / W)
             for start, stop in grid.week_bounds),
            default=0.0,
        )
    else:
        residuals["carbon"] = max(0.0, float(emission_rate.sum()) - budget.limit_t)

    residuals["gen_split"] = peak(np.abs(
        solution.dispatch.sum(axis=0) + fixed - sp["g2n"] - sp["g2d"] - sp["g2s"]
    ))
    residuals["net_power"] = peak(np.abs(
        solution.net_injection - sp["g2n"] - eta * sp["s2n"] + sp["n2s"] + sp["n2d"]
    ))
    residuals["demand"] = peak(np.abs(
        p_d - sp["g2d"] - eta * sp["s2d"] - sp["n2d"]
    ))

    psmax = solution.storage_power[:, None]
    residuals["charge_limit"] = peak(np.maximum(0.0, sp["g2s"] + sp["n2s"] - psmax))
    residuals["discharge_limit"] = peak(np.maximum(0.0, sp["s2n"] + sp["s2d"] - psmax))
    residuals["nonnegative"] = max(
        peak(np.maximum(0.0, -np.stack([sp[k] for k in _SPLIT_NAMES]))),
        peak(np.maximum(0.0, -solution.storage_energy)),
        peak(np.maximum(0.0, -solution.storage_power)),
        peak(np.maximum(0.0, -solution.new_capacity)),
        peak(np.maximum(0.0, -solution.flow_forward)),
        peak(np.maximum(0.0, -solution.flow_reverse)),
    )
    residuals["soc_bounds"] = max(
        peak(np.maximum(0.0, -solution.soc)),
        peak(np.maximum(0.0, solution.soc - solution.storage_energy[:, None])),
        peak(np.maximum(0.0, -solution.soc_initial)),
        peak(np.maximum(0.0, solution.soc_initial - solution.storage_energy[:, None])),
    )

    net_charge = tau * (sp["g2s"] + sp["n2s"] - sp["s2n"] - sp["s2d"])
    rec, start, cyc = 0.0, 0.0, 0.0
    for w, (w_start, w_stop) in enumerate(grid.week_bounds):
        inner = np.arange(w_start + 1, w_stop)
        if inner.size:
            rec = max(rec, peak(np.abs(
                solution.soc[:, inner] - solution.soc[:, inner - 1]
                - net_charge[:, inner - 1]
            )))
        start = max(start, peak(np.abs(
            solution.soc[:, w_start] - solution.soc_initial[:, w]
        )))
        cyc = max(cyc, peak(np.abs(
            solution.soc[:, w_stop - 1] + net_charge[:, w_stop - 1]
            - solution.soc_initial[:, w]
        )))
    residuals["soc_recursion"] = rec
    residuals["soc_start"] = start
    residuals["soc_cycle"] = cyc

    residuals["ep_ratio"] = max(
        peak(np.maximum(
            0.0, storage.ratio_min_hours * solution.storage_power - solution.storage_energy
        )),
        peak(np.maximum(
            0.0, solution.storage_energy - storage.ratio_max_hours * solution.storage_power
        )),
    )

    return ConstraintReport(residuals, tol)


def audit_problem(problem: ExpansionProblem, solution: ExpansionSolution,
                  tol: float = 1e-6) -> ConstraintReport:
    return audit(solution, problem.network, problem.demand, problem.techs,
                 problem.storage, problem.budget, problem.grid, tol,
                 carbon_per_week=problem.carbon_per_week)
