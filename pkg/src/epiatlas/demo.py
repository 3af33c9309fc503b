"""Deterministic desk-scale fixture generator.

Produces a self-contained dataset (~50 counties x 400 days) in every input
format the ingest CLI accepts, plus a toy county-boundary GeoJSON and a
service config.  Same seed, same bytes: everything is driven by one seeded
generator with a fixed call order.
"""
from __future__ import annotations

import csv
import datetime as dt
import math
from pathlib import Path

import numpy as np

from .ingest import month_range, synth_patterns
from .jsonutil import canonical
from .regions import STATE_BY_POSTAL, Region

DEFAULT_SEED = 4217
START_DATE = dt.date(2020, 3, 1)
N_DAYS = 400
VAX_START = dt.date(2020, 12, 14)

_STATES = ("CA", "OH", "TX", "NY", "WA")  # one per group, West twice
_COUNTY_NAMES = ("Adams", "Boone", "Clay", "Dover", "Eagle",
                 "Floyd", "Grant", "Huron", "Iris", "Jasper")
_BASE_POPS = (8_000, 15_000, 32_000, 60_000, 110_000,
              200_000, 380_000, 700_000, 1_300_000, 2_400_000)
_STATE_POP_FACTOR = {"CA": 1.5, "OH": 0.8, "TX": 1.2, "NY": 1.0, "WA": 0.7}

# county index 7 of each state runs hot for a 3-week stretch
_ANOMALY_COUNTY = 7
_ANOMALY_DAYS = range(150, 171)
_ANOMALY_FACTOR = 3.0


def demo_counties() -> list[tuple[str, str, str, int]]:
    """(fips, county name, state postal, population) for the fixture set."""
    out = []
    for postal in _STATES:
        state_fips = STATE_BY_POSTAL[postal].fips
        factor = _STATE_POP_FACTOR[postal]
        for i, name in enumerate(_COUNTY_NAMES):
            fips = f"{state_fips}{2 * i + 1:03d}"
            population = int(_BASE_POPS[i] * factor)
            out.append((fips, f"{name} County", postal, population))
    return out


def generate_demo(out_dir: str | Path, seed: int = DEFAULT_SEED) -> dict[str, Path]:
    """Write the fixture files into `out_dir`; returns name -> path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    counties = demo_counties()
    dates = [START_DATE + dt.timedelta(days=k) for k in range(N_DAYS)]

    county_factor = {fips: float(np.exp(rng.normal(0.0, 0.4)))
                     for fips, _, _, _ in counties}
    state_phase = {postal: float(rng.uniform(0.0, 2.0 * math.pi)) for postal in _STATES}

    cases_daily: dict[str, np.ndarray] = {}
    deaths_daily: dict[str, np.ndarray] = {}
    for fips, _, postal, population in counties:
        lam = np.empty(N_DAYS)
        for t in range(N_DAYS):
            rate = 2e-4 * (1.0 + 0.8 * math.sin(2.0 * math.pi * t / 180.0
                                                + state_phase[postal])) + 5e-5
            rate *= county_factor[fips]
            if int(fips[2:]) == 2 * _ANOMALY_COUNTY + 1 and t in _ANOMALY_DAYS:
                rate *= _ANOMALY_FACTOR
            lam[t] = population * rate
        daily = rng.poisson(lam)
        cases_daily[fips] = daily
        lagged = np.concatenate([np.zeros(7, dtype=np.int64), daily[:-7]])
        deaths_daily[fips] = rng.binomial(lagged, 0.015)

    unknown_daily = {postal: rng.poisson(2.0, N_DAYS) for postal in _STATES}

    paths: dict[str, Path] = {}
    paths["nyt"] = _write_nyt(out / "us-counties.csv", counties, dates,
                              cases_daily, deaths_daily, unknown_daily)
    paths["cdc"] = _write_cdc(out / "vaccinations.csv", counties, dates)
    paths["census"] = _write_census(out / "census.csv", counties)
    paths["crosswalk"] = _write_crosswalk(out / "zip_fips_crosswalk.csv", counties)
    paths["patterns"] = _write_patterns(out / "patterns.csv", counties, seed)
    paths["boundaries"] = _write_boundaries(out / "boundaries.geojson", counties)
    paths["config"] = _write_config(out / "config.json")
    return paths


def _write_nyt(path: Path, counties, dates, cases_daily, deaths_daily,
               unknown_daily) -> Path:
    by_state: dict[str, list] = {}
    for county in counties:
        by_state.setdefault(county[2], []).append(county)
    cases_cum = {fips: np.cumsum(vals) for fips, vals in cases_daily.items()}
    deaths_cum = {fips: np.cumsum(vals) for fips, vals in deaths_daily.items()}
    unknown_cum = {postal: np.cumsum(vals) for postal, vals in unknown_daily.items()}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "county", "state", "fips", "cases", "deaths"])
        for t, date in enumerate(dates):
            for postal in _STATES:
                state_name = STATE_BY_POSTAL[postal].name
                for fips, name, _, _ in by_state[postal]:
                    writer.writerow([date.isoformat(), name, state_name, fips,
                                     int(cases_cum[fips][t]), int(deaths_cum[fips][t])])
                writer.writerow([date.isoformat(), "Unknown", state_name, "",
                                 int(unknown_cum[postal][t]), 0])
    return path


def _write_cdc(path: Path, counties, dates) -> Path:
    state_pop: dict[str, int] = {}
    for _, _, postal, population in counties:
        state_pop[postal] = state_pop.get(postal, 0) + population
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "state", "doses_administered",
                         "people_fully_vaccinated"])
        for t, date in enumerate(dates):
            if date < VAX_START:
                continue
            days_in = (date - VAX_START).days
            for k, postal in enumerate(_STATES):
                # alternate postal codes and full names to exercise normalization
                state_text = postal if (t + k) % 2 == 0 else STATE_BY_POSTAL[postal].name
                fully = state_pop[postal] * 0.7 / (1.0 + math.exp(-(days_in - 120) / 30.0))
                writer.writerow([date.isoformat(), state_text,
                                 int(round(fully * 1.9)), int(round(fully))])
    return path


def _write_census(path: Path, counties) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fips", "population"])
        for fips, _, _, population in counties:
            writer.writerow([fips, population])
    return path


def _write_crosswalk(path: Path, counties) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["zip", "fips", "weight"])
        for i, (fips, _, _, _) in enumerate(counties):
            writer.writerow([str(60000 + i), fips, "1.0"])
            # every odd county shares a zip with its predecessor in-state
            if i % 10 != 0:
                prev_fips = counties[i - 1][0]
                shared = str(80000 + i)
                writer.writerow([shared, fips, "0.6"])
                writer.writerow([shared, prev_fips, "0.4"])
    return path


def _write_patterns(path: Path, counties, seed: int) -> Path:
    regions = [Region(fips, name, population) for fips, name, _, population in counties]
    months = month_range("2020-03", "2021-04")
    records = synth_patterns(regions, months, seed)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fips", "month", "visits", "poi_count", "naics_prefix"])
        for r in records:
            writer.writerow([r.fips, r.month, r.visits, r.poi_count, r.naics_prefix])
    return path


def _write_boundaries(path: Path, counties) -> Path:
    features = []
    for i, (fips, name, postal, _) in enumerate(counties):
        state_idx = _STATES.index(postal)
        row, col = divmod(i % 10, 5)
        x = -120.0 + state_idx * 6.0 + col * 1.0
        y = 35.0 + row * 1.0
        ring = [[x, y], [x + 0.9, y], [x + 0.9, y + 0.9], [x, y + 0.9], [x, y]]
        features.append({
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [ring]},
            "properties": {"fips": fips, "name": name, "state": postal},
        })
    collection = {"type": "FeatureCollection", "features": features}
    path.write_text(canonical(collection) + "\n", encoding="utf-8")
    return path


def _write_config(path: Path) -> Path:
    config = {
        "port": 8600,
        "data_dir": "store",
        "boundaries": "boundaries.geojson",
    }
    path.write_text(canonical(config) + "\n", encoding="utf-8")
    return path
