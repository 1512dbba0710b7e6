import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatplan.demand import (DegreeDayCurve, DemandError, DemandKind,
                             DemandProfile, LengthMismatch, MissingBusSeries,
                             TemperatureOutOfDomain, TimeGrid,
                             WeightSumInvalid, default_shape_table,
                             heterogeneous_demand, homogeneous_demand,
                             population_weighted_temperature,
                             synthesize_heat_series)

from conftest import hourly_grid


# -- population-weighted temperature ---------------------------------------

def test_weighted_temperature_even_split():
    out = population_weighted_temperature(
        {"a": np.array([5.0]), "b": np.array([15.0])}, {"a": 0.5, "b": 0.5}
    )
    assert out[0] == pytest.approx(10.0)


def test_weighted_temperature_single_area_identity():
    series = np.array([3.0, -1.5, 12.0])
    out = population_weighted_temperature({"only": series}, {"only": 1.0})
    assert np.array_equal(out, series)


def test_weighted_temperature_three_areas():
    # 0.2*0 + 0.3*10 + 0.5*20 = 13
    out = population_weighted_temperature(
        {"a": np.array([0.0]), "b": np.array([10.0]), "c": np.array([20.0])},
        {"a": 0.2, "b": 0.3, "c": 0.5},
    )
    assert out[0] == pytest.approx(13.0)


def test_weighted_temperature_rejects_bad_weights():
    with pytest.raises(WeightSumInvalid):
        population_weighted_temperature({"a": np.zeros(2)}, {"a": 0.9})
    with pytest.raises(WeightSumInvalid):
        population_weighted_temperature({"a": np.zeros(2)}, {"b": 1.0})
    with pytest.raises(LengthMismatch):
        population_weighted_temperature(
            {"a": np.zeros(2), "b": np.zeros(3)}, {"a": 0.5, "b": 0.5}
        )


# -- allocation rules --------------------------------------------------------

def test_homogeneous_direct_substitution():
    grid = hourly_grid("2019-01-01T00:00:00", 1, 24.0)
    profile = homogeneous_demand(grid, [10.0], [4.0], {"bus": 0.5})
    assert profile.per_bus["bus"][0] == pytest.approx(7.0)
    assert profile.kind is DemandKind.HOMOGENEOUS


def test_homogeneous_zero_share_is_zero():
    grid = hourly_grid("2019-01-01T00:00:00", 1, 24.0)
    profile = homogeneous_demand(grid, [10.0], [4.0], {"bus": 0.0})
    assert profile.per_bus["bus"][0] == 0.0


def test_homogeneous_full_share_reconstructs_total():
    rng = np.random.default_rng(0)
    grid = hourly_grid("2019-01-01T00:00:00", 2, 1.0)
    base = rng.uniform(0, 50, grid.num_steps)
    heat = rng.uniform(0, 30, grid.num_steps)
    shares = {"a": 0.2, "b": 0.35, "c": 0.45}
    profile = homogeneous_demand(grid, base, heat, shares)
    assert np.allclose(profile.total(), base + heat, rtol=0, atol=1e-12)


def test_heterogeneous_collapse_matches_homogeneous_exactly():
    rng = np.random.default_rng(1)
    grid = hourly_grid("2019-01-01T00:00:00", 2, 1.0)
    base = rng.uniform(0, 50, grid.num_steps)
    heat = rng.uniform(0, 30, grid.num_steps)
    shares = {"a": 0.2, "b": 0.35}
    local = {bus: share * heat for bus, share in shares.items()}
    homo = homogeneous_demand(grid, base, heat, shares)
    het = heterogeneous_demand(grid, base, local, shares)
    for bus in shares:
        assert np.array_equal(homo.per_bus[bus], het.per_bus[bus])


def test_heterogeneous_spike_is_local():
    grid = hourly_grid("2019-01-01T00:00:00", 1, 1.0)
    base = np.full(grid.num_steps, 10.0)
    heat = np.full(grid.num_steps, 2.0)
    shares = {"a": 0.5, "b": 0.5}
    local = {"a": 0.5 * heat, "b": 0.5 * heat.copy()}
    local["b"][12] *= 2.0
    homo = homogeneous_demand(grid, base, heat, shares)
    het = heterogeneous_demand(grid, base, local, shares)
    assert np.array_equal(het.per_bus["a"], homo.per_bus["a"])
    diff = het.per_bus["b"] != homo.per_bus["b"]
    assert diff.tolist() == [t == 12 for t in range(grid.num_steps)]


def test_heterogeneous_missing_bus_series():
    grid = hourly_grid("2019-01-01T00:00:00", 1, 24.0)
    with pytest.raises(MissingBusSeries):
        heterogeneous_demand(grid, [1.0], {}, {"bus": 0.5})


def test_length_mismatch_raises():
    grid = hourly_grid("2019-01-01T00:00:00", 1, 24.0)
    with pytest.raises(LengthMismatch):
        homogeneous_demand(grid, [1.0, 2.0], [0.0], {"bus": 0.5})


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), share=st.floats(0.0, 1.0))
def test_allocation_identities_hold(seed, share):
    rng = np.random.default_rng(seed)
    grid = hourly_grid("2019-01-01T00:00:00", 1, 6.0)
    base = rng.uniform(0, 60, grid.num_steps)
    heat = rng.uniform(0, 40, grid.num_steps)
    profile = homogeneous_demand(grid, base, heat, {"x": share})
    assert np.array_equal(profile.per_bus["x"], share * base + share * heat)
    # energy decomposition is exact arithmetic
    tau = grid.step_hours
    total = float(profile.per_bus["x"].sum() * tau)
    assert total == pytest.approx(
        share * base.sum() * tau + share * heat.sum() * tau, rel=1e-12, abs=1e-9
    )


# -- heat synthesis -----------------------------------------------------------

def test_zero_households_zero_series():
    grid = hourly_grid("2019-01-01T00:00:00", 2, 1.0)
    out = synthesize_heat_series(DegreeDayCurve(), [0.0, 5.0], 0.0, grid)
    assert np.array_equal(out, np.zeros(grid.num_steps))


def test_colder_day_more_energy():
    grid = hourly_grid("2019-01-01T00:00:00", 2, 1.0)
    curve = DegreeDayCurve()
    out = synthesize_heat_series(curve, [-2.0, 14.0], 1e6, grid)
    tau = grid.step_hours
    cold = out[:24].sum() * tau
    mild = out[24:].sum() * tau
    assert cold > mild
    # daily totals follow the curve exactly
    assert cold == pytest.approx(float(curve.daily_energy_gwh(np.array([-2.0]), 1e6)[0]))


def test_households_scale_linearly():
    grid = hourly_grid("2019-01-01T00:00:00", 1, 0.5)
    curve = DegreeDayCurve()
    single = synthesize_heat_series(curve, [3.0], 1e6, grid)
    double = synthesize_heat_series(curve, [3.0], 2e6, grid)
    assert np.allclose(double, 2.0 * single, rtol=1e-12, atol=0)


def test_intraday_shape_follows_table():
    grid = hourly_grid("2019-01-01T00:00:00", 1, 0.5)
    curve = DegreeDayCurve()
    out = synthesize_heat_series(curve, [0.0], 1e6, grid)
    energy = float(curve.daily_energy_gwh(np.array([0.0]), 1e6)[0])
    expected = energy * curve.shape48 / 0.5
    assert np.allclose(out, expected, rtol=1e-12)


def test_temperature_domain_enforced():
    grid = hourly_grid("2019-01-01T00:00:00", 1, 1.0)
    with pytest.raises(TemperatureOutOfDomain):
        synthesize_heat_series(DegreeDayCurve(), [-80.0], 1e6, grid)


def test_curve_share_validation():
    with pytest.raises(DemandError):
        DegreeDayCurve(air_share=0.9, ground_share=0.9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), drop=st.floats(0.1, 10.0))
def test_cooling_never_reduces_heating_energy(seed, drop):
    rng = np.random.default_rng(seed)
    grid = hourly_grid("2019-01-01T00:00:00", 3, 6.0)
    temps = rng.uniform(-5, 20, 3)
    curve = DegreeDayCurve()
    warm = synthesize_heat_series(curve, temps, 1e6, grid)
    cold = synthesize_heat_series(curve, temps - drop, 1e6, grid)
    assert cold.sum() >= warm.sum() - 1e-12
    assert (cold >= -1e-15).all() and (warm >= -1e-15).all()


def test_default_shape_table_normalised():
    shape = default_shape_table()
    assert shape.shape == (48,)
    assert shape.min() >= 0
    assert shape.sum() == pytest.approx(1.0, abs=1e-12)


# -- the grid itself ----------------------------------------------------------

def test_week_bounds_must_partition():
    ts = np.arange("2019-01-01", "2019-01-03", np.timedelta64(12, "h"),
                   dtype="datetime64[s]")
    with pytest.raises(DemandError):
        TimeGrid(12.0, ts, ((0, 2), (3, 4)))
    with pytest.raises(DemandError):
        TimeGrid(12.0, ts, ((0, 2),))


def test_day_groups_require_full_days():
    ts = np.arange("2019-01-01", "2019-01-02T12:00", np.timedelta64(12, "h"),
                   dtype="datetime64[s]")
    grid = TimeGrid(12.0, ts, ((0, 3),))
    with pytest.raises(DemandError):
        grid.day_groups()


def test_day_groups_handle_repeated_weeks():
    day = np.arange("2019-01-05", "2019-01-06", np.timedelta64(6, "h"),
                    dtype="datetime64[s]")
    ts = np.concatenate([day, day])  # the same day sampled by two weeks
    grid = TimeGrid(6.0, ts, ((0, 4), (4, 8)))
    days, groups = grid.day_groups()
    assert days.size == 2
    assert groups.tolist() == [0, 0, 0, 0, 1, 1, 1, 1]


def test_negative_demand_rejected():
    grid = hourly_grid("2019-01-01T00:00:00", 1, 24.0)
    with pytest.raises(DemandError):
        DemandProfile(grid, {"a": np.array([-0.1])}, DemandKind.HOMOGENEOUS)
