"""CSV ingestion for case, vaccination, census, crosswalk, and foot-traffic sources.

Parsing is total: no input stream raises past a schema check, every data
row either becomes a record or a counted rejection, and
``records + rejected == rows`` always holds on the returned report.
Each parser streams its input row by row and is side-effect-free, so
different files can be parsed in parallel.
"""
from __future__ import annotations

import csv
import datetime as dt
import json
import math
import random
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .regions import Region, is_county_fips, lookup_state, normalize_fips

MONTH_RE = re.compile(r"^\d{4}-(0[1-9]|1[0-2])$")
NAICS_RE = re.compile(r"^\d{2}$")

# crosswalk weight sums within this tolerance of 1 are renormalized,
# anything further off rejects the whole zip
ZIP_SUM_TOLERANCE = 1e-3


class SchemaError(ValueError):
    """Input header is missing a required column."""


@dataclass
class IngestReport:
    """Row accounting for one parsed stream, serializable as JSON."""

    source: str
    rows: int = 0
    records: int = 0
    rejected: int = 0
    reasons: dict[str, int] = field(default_factory=dict)

    def reject(self, reason: str, n: int = 1) -> None:
        self.rejected += n
        self.reasons[reason] = self.reasons.get(reason, 0) + n

    def accept(self, n: int = 1) -> None:
        self.records += n

    def to_json_obj(self) -> dict:
        return {
            "source": self.source,
            "rows": self.rows,
            "records": self.records,
            "rejected": self.rejected,
            "reasons": dict(sorted(self.reasons.items())),
        }


@dataclass(frozen=True)
class RawCaseRecord:
    date: dt.date
    county: str
    state: str
    fips: str | None  # absent for "Unknown"-county rows
    cases: int
    deaths: int


@dataclass(frozen=True)
class RawVaccinationRecord:
    date: dt.date
    state: str  # 2-letter postal code after normalization
    doses_administered: int
    people_fully_vaccinated: int


@dataclass(frozen=True)
class CensusRecord:
    fips: str
    population: int


@dataclass(frozen=True)
class CrosswalkEntry:
    zip: str
    fips: str
    weight: float


@dataclass(frozen=True)
class PatternsRecord:
    fips: str
    month: str  # YYYY-MM
    visits: int
    poi_count: int
    naics_prefix: str


class _RowError(Exception):
    def __init__(self, reason: str):
        self.reason = reason


def _dict_reader(stream: Iterable[str] | IO[str], required: Sequence[str],
                 source: str) -> csv.DictReader:
    reader = csv.DictReader(stream)
    header = reader.fieldnames
    if header is None:
        raise SchemaError(f"{source}: empty input, no header row")
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{source}: missing column(s): {', '.join(missing)}")
    return reader


def _parse_date(text: str | None) -> dt.date:
    if not text:
        raise _RowError("malformed")
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise _RowError("malformed") from None


def _parse_count(text: str | None) -> int:
    t = (text or "").strip()
    if not t.isdigit():
        raise _RowError("malformed")
    return int(t)


def parse_nyt(stream: Iterable[str] | IO[str]) -> tuple[list[RawCaseRecord], IngestReport]:
    """Parse NYT-style cumulative county case/death rows.

    Rows with an empty fips (e.g. "Unknown" county) are retained with
    ``fips=None``; they feed state aggregates but never county joins.
    """
    report = IngestReport("nyt")
    reader = _dict_reader(stream, ("date", "county", "state", "fips", "cases", "deaths"), "nyt")
    records: list[RawCaseRecord] = []
    for row in reader:
        report.rows += 1
        try:
            records.append(_nyt_row(row))
            report.accept()
        except _RowError as err:
            report.reject(err.reason)
    return records, report


def _nyt_row(row: dict) -> RawCaseRecord:
    date = _parse_date(row.get("date"))
    county = (row.get("county") or "").strip()
    state = (row.get("state") or "").strip()
    fips_text = (row.get("fips") or "").strip()
    fips = None
    if fips_text:
        fips = normalize_fips(fips_text, 5)
        if fips is None or not is_county_fips(fips):
            raise _RowError("malformed")
        info = lookup_state(state)
        if info is not None and not fips.startswith(info.fips):
            raise _RowError("malformed")
    cases = _parse_count(row.get("cases"))
    deaths = _parse_count(row.get("deaths"))
    return RawCaseRecord(date, county, state, fips, cases, deaths)


@dataclass(frozen=True)
class CdcColumns:
    """Column mapping for vaccination CSVs; upstream names drift over time."""

    date: str = "date"
    state: str = "state"
    doses: str = "doses_administered"
    fully: str = "people_fully_vaccinated"

    @classmethod
    def from_json_file(cls, path) -> "CdcColumns":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f for f in ("date", "state", "doses", "fully")}
        bad = set(raw) - known
        if bad:
            raise ValueError(f"unknown column-mapping keys: {sorted(bad)}")
        return cls(**raw)


def parse_cdc(stream: Iterable[str] | IO[str],
              columns: CdcColumns | None = None) -> tuple[list[RawVaccinationRecord], IngestReport]:
    """Parse state-level cumulative vaccination rows.

    State text (postal code or full name) is normalized to a 2-letter
    postal code; unrecognized states are skipped and counted.
    """
    cols = columns or CdcColumns()
    report = IngestReport("cdc")
    reader = _dict_reader(stream, (cols.date, cols.state, cols.doses, cols.fully), "cdc")
    records: list[RawVaccinationRecord] = []
    for row in reader:
        report.rows += 1
        try:
            date = _parse_date(row.get(cols.date))
            info = lookup_state((row.get(cols.state) or ""))
            if info is None:
                raise _RowError("unknown_state")
            doses = _parse_count(row.get(cols.doses))
            fully = _parse_count(row.get(cols.fully))
            records.append(RawVaccinationRecord(date, info.postal, doses, fully))
            report.accept()
        except _RowError as err:
            report.reject(err.reason)
    return records, report


def parse_census(stream: Iterable[str] | IO[str]) -> tuple[list[CensusRecord], IngestReport]:
    """Parse fips,population rows; duplicates keep the last value."""
    report = IngestReport("census")
    reader = _dict_reader(stream, ("fips", "population"), "census")
    by_fips: dict[str, CensusRecord] = {}
    for row in reader:
        report.rows += 1
        try:
            fips = _census_fips(row.get("fips"))
            pop_text = (row.get("population") or "").strip()
            if not pop_text.isdigit():
                raise _RowError("invalid_population")
            population = int(pop_text)
            if population <= 0:
                raise _RowError("invalid_population")
            if fips in by_fips:
                report.reject("duplicates")  # the superseded record
            else:
                report.accept()
            by_fips[fips] = CensusRecord(fips, population)
        except _RowError as err:
            report.reject(err.reason)
    return list(by_fips.values()), report


def _census_fips(text: str | None) -> str:
    t = (text or "").strip()
    if not t.isdigit():
        raise _RowError("malformed")
    fips = t.zfill(2) if len(t) <= 2 else t.zfill(5)
    if len(fips) not in (2, 5):
        raise _RowError("malformed")
    return fips


def parse_crosswalk(stream: Iterable[str] | IO[str]) -> tuple[list[CrosswalkEntry], IngestReport]:
    """Parse zip,fips,weight rows and normalize weights per zip.

    Weight sums within 1e-3 of 1 are renormalized to sum exactly 1;
    other zips are rejected whole.  Individual rows with weights outside
    [0, 1] are rejected without dooming the rest of the zip.
    """
    report = IngestReport("crosswalk")
    reader = _dict_reader(stream, ("zip", "fips", "weight"), "crosswalk")
    per_zip: dict[str, list[tuple[str, float]]] = {}
    for row in reader:
        report.rows += 1
        try:
            zip_code = normalize_fips((row.get("zip") or ""), 5)
            if zip_code is None:
                raise _RowError("malformed")
            fips = normalize_fips((row.get("fips") or ""), 5)
            if fips is None or not is_county_fips(fips):
                raise _RowError("malformed")
            try:
                weight = float((row.get("weight") or "").strip())
            except ValueError:
                raise _RowError("malformed") from None
            if not (0.0 <= weight <= 1.0) or math.isnan(weight):
                raise _RowError("weight_range")
            per_zip.setdefault(zip_code, []).append((fips, weight))
        except _RowError as err:
            report.reject(err.reason)

    records: list[CrosswalkEntry] = []
    for zip_code, pairs in per_zip.items():
        total = math.fsum(w for _, w in pairs)
        if abs(total - 1.0) > ZIP_SUM_TOLERANCE:
            report.reject("zip_weight_sum", n=len(pairs))
            continue
        for fips, weight in pairs:
            records.append(CrosswalkEntry(zip_code, fips, weight / total))
        report.accept(len(pairs))
    return records, report


def parse_patterns(stream: Iterable[str] | IO[str]) -> tuple[list[PatternsRecord], IngestReport]:
    """Parse monthly foot-traffic rows, grouped by (fips, month, naics)."""
    report = IngestReport("patterns")
    reader = _dict_reader(stream, ("fips", "month", "visits", "poi_count", "naics_prefix"), "patterns")
    records: list[PatternsRecord] = []
    for row in reader:
        report.rows += 1
        try:
            fips = normalize_fips((row.get("fips") or ""), 5)
            if fips is None or not is_county_fips(fips):
                raise _RowError("malformed")
            month = (row.get("month") or "").strip()
            if not MONTH_RE.match(month):
                raise _RowError("invalid_month")
            visits = _parse_count(row.get("visits"))
            poi_count = _parse_count(row.get("poi_count"))
            naics = (row.get("naics_prefix") or "").strip()
            if not NAICS_RE.match(naics):
                raise _RowError("malformed")
            records.append(PatternsRecord(fips, month, visits, poi_count, naics))
            report.accept()
        except _RowError as err:
            report.reject(err.reason)
    records.sort(key=lambda r: (r.fips, r.month, r.naics_prefix))
    return records, report


# NAICS sector -> rough share of a county's monthly visits
_SYNTH_SECTORS = (("44", 0.55), ("62", 0.20), ("72", 0.25))
_SYNTH_VISIT_RATE = 0.9  # monthly visits per resident, before noise
_SYNTH_NOISE_SIGMA = 0.35


def synth_patterns(regions: Sequence[Region], months: Sequence[str],
                   seed: int) -> list[PatternsRecord]:
    """Generate deterministic foot-traffic records for desk-scale runs.

    Visits scale with population under multiplicative log-normal noise,
    so expected visit ratios track population ratios.  Output is a pure
    function of (regions, months, seed).
    """
    for month in months:
        if not MONTH_RE.match(month):
            raise ValueError(f"bad month {month!r}, expected YYYY-MM")
    missing = [r.fips for r in regions if r.population is None]
    if missing:
        raise ValueError(f"regions missing population: {missing[:5]}")
    rng = random.Random(seed)
    records: list[PatternsRecord] = []
    for region in regions:
        pop = int(region.population or 0)
        for month in months:
            for naics, share in _SYNTH_SECTORS:
                noise = math.exp(rng.gauss(0.0, _SYNTH_NOISE_SIGMA))
                visits = int(round(pop * _SYNTH_VISIT_RATE * share * noise))
                poi_count = max(1, round(pop * share / 400))
                records.append(PatternsRecord(region.fips, month, visits, poi_count, naics))
    return records


def month_range(start: str, end: str) -> list[str]:
    """Inclusive list of YYYY-MM months from start to end."""
    if not MONTH_RE.match(start) or not MONTH_RE.match(end):
        raise ValueError("months must be YYYY-MM")
    y0, m0 = int(start[:4]), int(start[5:])
    y1, m1 = int(end[:4]), int(end[5:])
    out = []
    y, m = y0, m0
    while (y, m) <= (y1, m1):
        out.append(f"{y:04d}-{m:02d}")
        m += 1
        if m == 13:
            y, m = y + 1, 1
    return out
