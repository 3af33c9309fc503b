"""Wiring between the CSV parsers and the time-series store.

One ingested file produces one store commit.  Unknown-county case rows are
attributed to their state's 2-digit code so state aggregates stay complete
while county choropleths never see them.  Monthly foot-traffic rows are
summed across NAICS sectors before storage.
"""
from __future__ import annotations

import datetime as dt
import logging
from pathlib import Path
from typing import Sequence

from . import ingest
from .metrics import Metric
from .regions import lookup_state
from .store import Point, Store

logger = logging.getLogger(__name__)

SOURCES = ("nyt", "cdc", "census", "crosswalk", "patterns")


def ingest_file(store: Store, source: str, path: str | Path,
                columns: ingest.CdcColumns | None = None) -> ingest.IngestReport:
    """Parse one CSV file and commit its records; returns the parse report."""
    if source not in SOURCES:
        raise ValueError(f"unknown source {source!r}; expected one of {SOURCES}")
    with open(path, encoding="utf-8", newline="") as fh:
        if source == "nyt":
            records, report = ingest.parse_nyt(fh)
            apply_case_records(store, records)
        elif source == "cdc":
            records, report = ingest.parse_cdc(fh, columns)
            apply_vaccination_records(store, records)
        elif source == "census":
            records, report = ingest.parse_census(fh)
            apply_census_records(store, records)
        elif source == "crosswalk":
            records, report = ingest.parse_crosswalk(fh)
            store.set_crosswalk(records)
        else:
            records, report = ingest.parse_patterns(fh)
            apply_patterns_records(store, records)
    return report


def apply_case_records(store: Store, records: Sequence[ingest.RawCaseRecord]) -> int:
    points: list[Point] = []
    remainder: dict[tuple[str, dt.date], list[int]] = {}
    for r in records:
        if r.fips is not None:
            points.append(Point(r.fips, Metric.CASES_CUM, r.date, r.cases))
            points.append(Point(r.fips, Metric.DEATHS_CUM, r.date, r.deaths))
            continue
        info = lookup_state(r.state)
        if info is None:
            logger.warning("dropping fips-less row with unknown state %r", r.state)
            continue
        acc = remainder.setdefault((info.fips, r.date), [0, 0])
        acc[0] += r.cases
        acc[1] += r.deaths
    for (state_fips, date), (cases, deaths) in remainder.items():
        points.append(Point(state_fips, Metric.CASES_CUM, date, cases))
        points.append(Point(state_fips, Metric.DEATHS_CUM, date, deaths))
    return store.upsert(points)


def apply_vaccination_records(store: Store,
                              records: Sequence[ingest.RawVaccinationRecord]) -> int:
    points = []
    for r in records:
        info = lookup_state(r.state)
        if info is None:  # parser normalizes, so this is belt and braces
            continue
        points.append(Point(info.fips, Metric.VAX_DOSES_CUM, r.date,
                            r.doses_administered))
        points.append(Point(info.fips, Metric.VAX_FULL_CUM, r.date,
                            r.people_fully_vaccinated))
    return store.upsert(points)


def apply_census_records(store: Store, records: Sequence[ingest.CensusRecord]) -> int:
    return store.set_populations({r.fips: r.population for r in records})


def apply_patterns_records(store: Store,
                           records: Sequence[ingest.PatternsRecord]) -> int:
    monthly: dict[tuple[str, str], int] = {}
    for r in records:
        key = (r.fips, r.month)
        monthly[key] = monthly.get(key, 0) + r.visits
    points = [Point(fips, Metric.VISITS_MONTHLY,
                    dt.date(int(month[:4]), int(month[5:]), 1), visits)
              for (fips, month), visits in monthly.items()]
    return store.upsert(points)


def store_path(data_dir: str | Path) -> Path:
    """Location of the store file inside a data directory."""
    return Path(data_dir) / "store.json.gz"


def open_store(data_dir: str | Path) -> Store:
    return Store(store_path(data_dir))
