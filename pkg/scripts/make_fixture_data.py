#!/usr/bin/env python3
"""Regenerate the shipped synthetic 3-bus dataset under data/.

Two winter months (Jan-Feb 2019) of hourly national base demand, hourly
wind/solar availability and fixed injections per bus, and daily
temperatures for two national areas plus the three cities. The series are
smooth noise with planted structure: a deep calm-cold snap at the big
load-centre bus in January and another at the cold inland bus in
February, so the month-wise stress-week selection lands on them. The
national average stays milder than the cities (the coastal area dominates
it), which is what separates the two heating variants.

Deterministic for a fixed seed; running it again rewrites identical CSVs.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from heatplan.seriesio import write_daily_series, write_time_series

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"

SEED = 20190101

HOURS = np.arange("2019-01-01", "2019-03-01", np.timedelta64(1, "h"),
                  dtype="datetime64[s]")
DAYS = np.arange("2019-01-01", "2019-03-01", np.timedelta64(1, "D"),
                 dtype="datetime64[D]")

# planted calm-cold windows (inclusive day ranges)
LONDON_SNAP = (np.datetime64("2019-01-14"), np.datetime64("2019-01-18"))
MANCHESTER_SNAP = (np.datetime64("2019-02-07"), np.datetime64("2019-02-11"))


def smooth_noise(rng, n, scale, halflife=6.0):
    out = np.zeros(n)
    alpha = 0.5 ** (1.0 / halflife)
    level = 0.0
    for k in range(n):
        level = alpha * level + (1 - alpha) * rng.normal(0.0, scale)
        out[k] = level
    return out


def in_window(days, window):
    return (days >= window[0]) & (days <= window[1])


def base_demand(rng):
    tod = (HOURS - HOURS.astype("datetime64[D]")).astype("timedelta64[h]").astype(int)
    daily = np.array([
        -4.0, -4.5, -4.8, -5.0, -4.8, -4.0, -2.0, 0.5, 2.0, 2.5, 2.2, 2.0,
        1.8, 1.5, 1.2, 1.5, 2.5, 4.5, 5.0, 4.2, 2.8, 1.0, -1.5, -3.0,
    ])
    day_no = (HOURS.astype("datetime64[D]") - DAYS[0]).astype(int)
    weekly = 1.2 * np.sin(2 * np.pi * day_no / 14.0)
    return 31.0 + daily[tod] + weekly + smooth_noise(rng, HOURS.size, 0.8, 12)


def temperatures(rng):
    day_no = np.arange(DAYS.size)
    drift = 1.5 * np.sin(2 * np.pi * day_no / 59.0 + 0.8)
    coast = 8.0 + drift + smooth_noise(rng, DAYS.size, 1.0, 3)
    inland = 4.5 + 1.2 * drift + smooth_noise(rng, DAYS.size, 1.4, 3)

    london = inland + 0.5 + smooth_noise(rng, DAYS.size, 0.8, 2)
    manchester = inland - 1.5 + smooth_noise(rng, DAYS.size, 0.9, 2)
    glasgow = inland - 0.5 + smooth_noise(rng, DAYS.size, 0.9, 2)

    london[in_window(DAYS, LONDON_SNAP)] = np.linspace(-2.0, -4.0, 5)
    manchester[in_window(DAYS, LONDON_SNAP)] -= 2.0
    manchester[in_window(DAYS, MANCHESTER_SNAP)] = np.linspace(-4.0, -6.5, 5)
    london[in_window(DAYS, MANCHESTER_SNAP)] -= 1.0
    # the national areas dip only mildly: cold cities, mild coast
    inland[in_window(DAYS, LONDON_SNAP)] -= 2.5
    inland[in_window(DAYS, MANCHESTER_SNAP)] -= 2.0
    coast[in_window(DAYS, LONDON_SNAP)] -= 1.0
    coast[in_window(DAYS, MANCHESTER_SNAP)] -= 0.5
    return coast, inland, london, manchester, glasgow


def wind_availability(rng, offset, calm_factor=0.12):
    base = 0.45 + 0.28 * np.sin(2 * np.pi * np.arange(HOURS.size) / 431.0 + offset)
    series = np.clip(base + smooth_noise(rng, HOURS.size, 0.22, 18), 0.02, 0.95)
    hour_days = HOURS.astype("datetime64[D]")
    calm = in_window(hour_days, LONDON_SNAP) | in_window(hour_days, MANCHESTER_SNAP)
    series[calm] = np.clip(series[calm] * calm_factor, 0.01, 0.10)
    return series


def solar_availability(rng, scale):
    tod = (HOURS - HOURS.astype("datetime64[D]")).astype("timedelta64[h]").astype(int)
    bell = np.clip(np.sin(np.pi * (tod - 8) / 8.0), 0.0, None)  # daylight 8..16
    cloud = 0.75 + smooth_noise(rng, HOURS.size, 0.25, 9)
    return np.clip(scale * bell * np.clip(cloud, 0.2, 1.1), 0.0, 1.0)


def main() -> None:
    rng = np.random.default_rng(SEED)
    DATA.mkdir(exist_ok=True)

    write_time_series(DATA / "base_demand.csv", HOURS, base_demand(rng), "gw")

    coast, inland, london, manchester, glasgow = temperatures(rng)
    write_daily_series(DATA / "temp_coast.csv", DAYS, coast, "celsius")
    write_daily_series(DATA / "temp_inland.csv", DAYS, inland, "celsius")
    write_daily_series(DATA / "temp_london.csv", DAYS, london, "celsius")
    write_daily_series(DATA / "temp_manchester.csv", DAYS, manchester, "celsius")
    write_daily_series(DATA / "temp_glasgow.csv", DAYS, glasgow, "celsius")

    for bus, offset, calm in (("london", 0.0, 0.10),
                              ("manchester", 1.1, 0.12),
                              ("glasgow", 2.3, 0.22)):
        write_time_series(DATA / f"avail_wind_{bus}.csv", HOURS,
                          wind_availability(rng, offset, calm), "fraction")
    for bus, scale in (("london", 0.32), ("manchester", 0.28), ("glasgow", 0.22)):
        write_time_series(DATA / f"avail_solar_{bus}.csv", HOURS,
                          solar_availability(rng, scale), "fraction")

    write_time_series(DATA / "fixed_nuclear_glasgow.csv", HOURS,
                      np.full(HOURS.size, 0.8), "gw")
    write_time_series(DATA / "fixed_interconnector_london.csv", HOURS,
                      np.full(HOURS.size, 1.2), "gw")
    print(f"wrote fixture series to {DATA}")


if __name__ == "__main__":
    main()
