"""Versioned (region, metric, date) time-series store with immutable snapshots.

The storage contract, not the engine, is the point: (region, metric, date)
is a primary key with last-write-wins upserts, every write publishes a new
immutable snapshot, readers holding an old snapshot are never disturbed,
and a failed write leaves the previous snapshot intact.  Persistence is a
single gzipped JSON file swapped atomically; the on-disk layout is private.

Daily metrics are derived views over their cumulative sources: the first
value is kept, later values are consecutive differences, and negative
deltas from upstream corrections are preserved so cumsum(diff(x)) == x.
"""
from __future__ import annotations

import csv
import datetime as dt
import gzip
import json
import math
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .ingest import CrosswalkEntry
from .jsonutil import clean_float
from .metrics import CUMULATIVE, DAILY_OF, DAILY_SOURCE, Metric
from .regions import is_county_fips, is_state_fips, state_of


@dataclass(frozen=True)
class Point:
    region: str
    metric: Metric
    date: dt.date
    value: float


class MetricSeries:
    """Ordered (date, value) points for one region and metric."""

    __slots__ = ("region", "metric", "points")

    def __init__(self, region: str, metric: Metric,
                 points: Sequence[tuple[dt.date, float]]):
        pts = tuple((d, float(v)) for d, v in points)
        for (a, _), (b, _) in zip(pts, pts[1:]):
            if a >= b:
                raise ValueError(f"dates not strictly increasing: {a} then {b}")
        self.region = region
        self.metric = metric
        self.points = pts

    def dates(self) -> list[dt.date]:
        return [d for d, _ in self.points]

    def values(self) -> list[float]:
        return [v for _, v in self.points]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other) -> bool:
        return (isinstance(other, MetricSeries)
                and self.region == other.region
                and self.metric == other.metric
                and self.points == other.points)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"MetricSeries({self.region}, {self.metric.value}, {len(self.points)} pts)"


class QueryResult(NamedTuple):
    series: MetricSeries
    found: bool  # False when the region is unknown to the snapshot


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class Snapshot:
    """Immutable view of all stored series at one version."""

    def __init__(self, version: int,
                 series: dict[tuple[str, str], tuple[np.ndarray, np.ndarray]],
                 populations: dict[str, int],
                 crosswalk: tuple[CrosswalkEntry, ...]):
        self.version = version
        self._series = series
        self._populations = populations
        self._crosswalk = crosswalk
        self._derived: dict[tuple[str, str], tuple[np.ndarray, np.ndarray]] = {}

    # -- basic views ---------------------------------------------------

    def metrics(self) -> list[Metric]:
        return sorted({Metric(m) for _, m in self._series}, key=lambda m: m.value)

    def regions(self, metric: Metric | None = None) -> list[str]:
        if metric is None:
            return sorted({r for r, _ in self._series})
        names = {metric.value}
        if metric in DAILY_SOURCE:
            names.add(DAILY_SOURCE[metric].value)
        return sorted({r for r, m in self._series if m in names})

    def has_region(self, region: str) -> bool:
        return (region in self._populations
                or any(r == region for r, _ in self._series))

    def population(self, region: str) -> int | None:
        pop = self._populations.get(region)
        if pop is None and is_state_fips(region):
            total = sum(p for f, p in self._populations.items()
                        if is_county_fips(f) and state_of(f) == region)
            return total or None
        return pop

    def populations(self) -> dict[str, int]:
        return dict(self._populations)

    def crosswalk(self) -> tuple[CrosswalkEntry, ...]:
        return self._crosswalk

    # -- series access ---------------------------------------------------

    def arrays(self, region: str, metric: Metric) -> tuple[np.ndarray, np.ndarray] | None:
        """(date ordinals, values) for one series, deriving dailies on demand."""
        key = (region, metric.value)
        stored = self._series.get(key)
        if stored is not None:
            return stored
        source = DAILY_SOURCE.get(metric)
        if source is None:
            return None
        cached = self._derived.get(key)
        if cached is not None:
            return cached
        base = self._series.get((region, source.value))
        if base is None:
            return None
        ords, vals = base
        daily = vals.copy()
        daily[1:] = vals[1:] - vals[:-1]
        out = (ords, _freeze(daily))
        self._derived[key] = out  # benign race: idempotent fill
        return out

    def series(self, region: str, metric: Metric) -> MetricSeries:
        arrs = self.arrays(region, metric)
        if arrs is None:
            return MetricSeries(region, metric, ())
        ords, vals = arrs
        points = [(dt.date.fromordinal(int(o)), float(v)) for o, v in zip(ords, vals)]
        return MetricSeries(region, metric, points)

    def query_series(self, region: str, metric: Metric,
                     start: dt.date, end: dt.date) -> QueryResult:
        """Points within [start, end]; missing dates stay absent."""
        if start > end:
            raise ValueError(f"start {start} is after end {end}")
        found = self.has_region(region)
        arrs = self.arrays(region, metric)
        if arrs is None:
            return QueryResult(MetricSeries(region, metric, ()), found)
        ords, vals = arrs
        lo = int(np.searchsorted(ords, start.toordinal(), side="left"))
        hi = int(np.searchsorted(ords, end.toordinal(), side="right"))
        points = [(dt.date.fromordinal(int(o)), float(v))
                  for o, v in zip(ords[lo:hi], vals[lo:hi])]
        return QueryResult(MetricSeries(region, metric, points), found)

    def value_at(self, region: str, metric: Metric, date: dt.date) -> float | None:
        arrs = self.arrays(region, metric)
        if arrs is None:
            return None
        ords, vals = arrs
        i = int(np.searchsorted(ords, date.toordinal(), side="left"))
        if i < len(ords) and int(ords[i]) == date.toordinal():
            return float(vals[i])
        return None

    def date_bounds(self, metric: Metric | None = None) -> tuple[dt.date, dt.date] | None:
        names: set[str] | None = None
        if metric is not None:
            names = {metric.value}
            if metric in DAILY_SOURCE:
                names.add(DAILY_SOURCE[metric].value)
        lo = hi = None
        for (region, m), (ords, _) in self._series.items():
            if names is not None and m not in names:
                continue
            if len(ords) == 0:
                continue
            first, last = int(ords[0]), int(ords[-1])
            lo = first if lo is None else min(lo, first)
            hi = last if hi is None else max(hi, last)
        if lo is None or hi is None:
            return None
        return dt.date.fromordinal(lo), dt.date.fromordinal(hi)

    def metric_level(self, metric: Metric) -> int:
        """5 when any county carries the metric, else 2 (state-level)."""
        return 5 if any(is_county_fips(r) for r in self.regions(metric)) else 2

    def frame_values(self, metric: Metric, date: dt.date) -> dict[str, float]:
        """Per-region values for one metric/date at the metric's level."""
        level = self.metric_level(metric)
        out: dict[str, float] = {}
        for region in self.regions(metric):
            if len(region) != level:
                continue
            value = self.value_at(region, metric, date)
            if value is not None:
                out[region] = value
        return out

    def state_series(self, state: str, metric: Metric) -> MetricSeries:
        """State-level series: county sums plus the state remainder.

        Sums are taken over daily deltas (absent county-dates contribute
        nothing); cumulative metrics are the running total of those sums,
        which equals the sum of each county's last reported cumulative.
        """
        daily_metric = DAILY_OF.get(metric, metric)
        totals: dict[int, float] = {}
        for region in self.regions(daily_metric):
            if not ((is_county_fips(region) and state_of(region) == state)
                    or region == state):
                continue
            arrs = self.arrays(region, daily_metric)
            if arrs is None:
                continue
            for o, v in zip(*arrs):
                totals[int(o)] = totals.get(int(o), 0.0) + float(v)
        points = []
        running = 0.0
        for o in sorted(totals):
            running += totals[o]
            value = running if metric in CUMULATIVE else totals[o]
            points.append((dt.date.fromordinal(o), value))
        return MetricSeries(state, metric, points)

    def aggregate_to_state(self, metric: Metric, date: dt.date) -> dict[str, float]:
        """Sum county values per state plus any state-attributed remainder."""
        sums: dict[str, list[float]] = {}
        for region in self.regions(metric):
            value = self.value_at(region, metric, date)
            if value is None:
                continue
            state = state_of(region) if is_county_fips(region) else region
            sums.setdefault(state, []).append(value)
        return {state: math.fsum(vals) for state, vals in sorted(sums.items())}


class Store:
    """Single-writer store publishing immutable snapshots.

    With a path, every successful write is persisted via write-to-temp
    plus atomic rename before the new snapshot is published; a failure
    at any point leaves the prior snapshot (and file) intact.
    """

    def __init__(self, path: str | Path | None = None):
        self._path = Path(path) if path is not None else None
        self._write_lock = threading.Lock()
        self._snapshot = Snapshot(0, {}, {}, ())
        if self._path is not None and self._path.exists():
            self._snapshot = _load_snapshot(self._path)

    def snapshot(self) -> Snapshot:
        return self._snapshot

    @property
    def path(self) -> Path | None:
        return self._path

    # -- mutators ----------------------------------------------------------

    def upsert(self, points: Iterable[Point]) -> int:
        """Insert or overwrite points; returns the new snapshot version."""
        grouped: dict[tuple[str, str], tuple[list[int], list[float]]] = {}
        for p in points:
            key = (p.region, p.metric.value)
            ords, vals = grouped.setdefault(key, ([], []))
            ords.append(p.date.toordinal())
            vals.append(float(p.value))
        batch = {key: (np.asarray(o, dtype=np.int64), np.asarray(v, dtype=np.float64))
                 for key, (o, v) in grouped.items()}
        return self._commit(series_batch=batch)

    def upsert_series(self, region: str, metric: Metric,
                      dates: Sequence[dt.date], values: Sequence[float]) -> int:
        if len(dates) != len(values):
            raise ValueError("dates and values length mismatch")
        ords = np.asarray([d.toordinal() for d in dates], dtype=np.int64)
        vals = np.asarray(values, dtype=np.float64)
        return self._commit(series_batch={(region, metric.value): (ords, vals)})

    def set_populations(self, populations: Mapping[str, int]) -> int:
        for fips, pop in populations.items():
            if pop <= 0:
                raise ValueError(f"population for {fips} must be positive")
        return self._commit(populations=dict(populations))

    def set_crosswalk(self, entries: Iterable[CrosswalkEntry]) -> int:
        return self._commit(crosswalk=tuple(entries))

    def _commit(self, series_batch: Mapping | None = None,
                populations: Mapping[str, int] | None = None,
                crosswalk: tuple[CrosswalkEntry, ...] | None = None) -> int:
        with self._write_lock:
            prev = self._snapshot
            series = dict(prev._series)
            if series_batch:
                for key, (ords, vals) in series_batch.items():
                    series[key] = _merge_series(series.get(key), ords, vals)
            pops = dict(prev._populations)
            if populations is not None:
                pops.update(populations)
            xwalk = crosswalk if crosswalk is not None else prev._crosswalk
            snap = Snapshot(prev.version + 1, series, pops, xwalk)
            if self._path is not None:
                _persist_snapshot(snap, self._path)
            self._snapshot = snap
            return snap.version


def _merge_series(existing: tuple[np.ndarray, np.ndarray] | None,
                  ords: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge a batch into a series; the last write for a date wins."""
    if existing is not None:
        ords = np.concatenate([existing[0], ords])
        vals = np.concatenate([existing[1], vals])
    order = np.argsort(ords, kind="stable")
    ords = ords[order]
    vals = vals[order]
    if len(ords) > 1:
        keep = np.empty(len(ords), dtype=bool)
        keep[:-1] = ords[1:] != ords[:-1]  # stable sort: last duplicate survives
        keep[-1] = True
        ords = ords[keep]
        vals = vals[keep]
    return _freeze(ords), _freeze(vals)


def _persist_snapshot(snap: Snapshot, path: Path) -> None:
    payload = {
        "version": snap.version,
        "populations": snap._populations,
        "crosswalk": [[e.zip, e.fips, e.weight] for e in snap._crosswalk],
        "series": [
            {"region": region, "metric": metric,
             "dates": [int(o) for o in ords], "values": [float(v) for v in vals]}
            for (region, metric), (ords, vals) in sorted(snap._series.items())
        ],
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with gzip.open(tmp, "wt", encoding="utf-8") as fh:
        json.dump(payload, fh, separators=(",", ":"))
    os.replace(tmp, path)


def _load_snapshot(path: Path) -> Snapshot:
    with gzip.open(path, "rt", encoding="utf-8") as fh:
        payload = json.load(fh)
    series = {}
    for item in payload["series"]:
        ords = _freeze(np.asarray(item["dates"], dtype=np.int64))
        vals = _freeze(np.asarray(item["values"], dtype=np.float64))
        series[(item["region"], item["metric"])] = (ords, vals)
    crosswalk = tuple(CrosswalkEntry(z, f, w) for z, f, w in payload.get("crosswalk", []))
    return Snapshot(int(payload["version"]), series,
                    {k: int(v) for k, v in payload.get("populations", {}).items()},
                    crosswalk)


# -- derived series operations ----------------------------------------------


def diff_cumulative(series: MetricSeries) -> MetricSeries:
    """Daily deltas from a cumulative series; corrections stay negative.

    d[0] = x[0] and d[i] = x[i] - x[i-1], so cumsum round-trips exactly.
    """
    if series.metric not in CUMULATIVE:
        raise ValueError(f"{series.metric.value} is not a cumulative metric")
    out_metric = DAILY_OF[series.metric]
    points = []
    prev = None
    for date, value in series.points:
        delta = value if prev is None else value - prev
        points.append((date, delta))
        prev = value
    return MetricSeries(series.region, out_metric, points)


def rolling_average(series: MetricSeries, window: int) -> MetricSeries:
    """Trailing mean; leading partial windows average what is available."""
    if window < 1:
        raise ValueError("window must be >= 1")
    values = series.values()
    points = []
    for i, (date, _) in enumerate(series.points):
        lo = max(0, i - window + 1)
        chunk = values[lo:i + 1]
        points.append((date, math.fsum(chunk) / len(chunk)))
    return MetricSeries(series.region, series.metric, points)


def per_capita(series: MetricSeries, population: int, base: int = 100_000) -> MetricSeries:
    """Rescale values to events per `base` residents."""
    if population <= 0:
        raise ValueError("population must be positive")
    scale = base / population
    return MetricSeries(series.region, series.metric,
                        [(d, v * scale) for d, v in series.points])


# -- interchange export -------------------------------------------------------


def export_csv(snapshot: Snapshot, stream: IO[str],
               metrics: Sequence[Metric] | None = None) -> int:
    """Write region,metric,date,value rows; returns the row count."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["region", "metric", "date", "value"])
    rows = 0
    wanted = {m.value for m in metrics} if metrics else None
    for (region, metric) in sorted(snapshot._series):
        if wanted is not None and metric not in wanted:
            continue
        ords, vals = snapshot._series[(region, metric)]
        for o, v in zip(ords, vals):
            writer.writerow([region, metric, dt.date.fromordinal(int(o)).isoformat(),
                             repr(clean_float(float(v)))])
            rows += 1
    return rows


def export_json_obj(snapshot: Snapshot,
                    metrics: Sequence[Metric] | None = None) -> dict:
    wanted = {m.value for m in metrics} if metrics else None
    series = []
    for (region, metric) in sorted(snapshot._series):
        if wanted is not None and metric not in wanted:
            continue
        ords, vals = snapshot._series[(region, metric)]
        series.append({
            "region": region,
            "metric": metric,
            "points": [[dt.date.fromordinal(int(o)).isoformat(), clean_float(float(v))]
                       for o, v in zip(ords, vals)],
        })
    return {"version": snapshot.version, "series": series}
