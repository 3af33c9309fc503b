"""Read-only HTTP JSON/GeoJSON API over store snapshots.

Every response body is canonical JSON (sorted keys, shortest round-trip
floats), so identical queries return identical bytes and the `/surprise`
endpoint matches the CLI `compute` export after canonicalization.  Each
request reads one immutable snapshot; ingests never block or tear reads.
"""
from __future__ import annotations

import datetime as dt
import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.staticfiles import StaticFiles

from . import pipeline, surprise
from .jsonutil import canonical_bytes, clean_float
from .metrics import SMOOTHABLE, parse_metric
from .regions import REGION_GROUPS, STATE_BY_FIPS, is_county_fips, state_of
from .store import MetricSeries, Store, rolling_average

PER_CAPITA_BASE = 100_000


@dataclass
class ApiConfig:
    """Service configuration; paths resolve relative to the config file."""

    data_dir: Path
    boundaries: Path
    port: int = 8600
    static_dir: Path | None = None
    default_start: dt.date | None = None
    default_end: dt.date | None = None

    def __post_init__(self):
        if not (1 <= self.port <= 65535):
            raise ValueError(f"port {self.port} outside [1, 65535]")
        if not Path(self.boundaries).is_file():
            raise ValueError(f"boundary file not found: {self.boundaries}")

    @classmethod
    def load(cls, path: str | Path) -> "ApiConfig":
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        base = path.parent

        def resolve(p: str) -> Path:
            q = Path(p)
            return q if q.is_absolute() else base / q

        port = int(os.environ.get("ATLAS_PORT", raw.get("port", 8600)))
        data_dir = Path(os.environ.get("ATLAS_DATA_DIR",
                                       resolve(raw.get("data_dir", "store"))))
        bounds = raw.get("default_date_bounds") or {}
        return cls(
            data_dir=data_dir,
            boundaries=resolve(raw["boundaries"]),
            port=port,
            static_dir=resolve(raw["static_dir"]) if raw.get("static_dir") else None,
            default_start=dt.date.fromisoformat(bounds["from"]) if bounds.get("from") else None,
            default_end=dt.date.fromisoformat(bounds["to"]) if bounds.get("to") else None,
        )


def load_boundaries(path: str | Path) -> dict:
    """Load and validate the county-boundary FeatureCollection."""
    collection = json.loads(Path(path).read_text(encoding="utf-8"))
    if collection.get("type") != "FeatureCollection":
        raise ValueError("boundary file is not a GeoJSON FeatureCollection")
    for i, feature in enumerate(collection.get("features", [])):
        if not (feature.get("properties") or {}).get("fips"):
            raise ValueError(f"boundary feature {i} is missing a fips property")
    return collection


@dataclass
class _SurpriseCache:
    """Bounded response cache keyed by query and snapshot version."""

    capacity: int = 64
    _entries: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def get(self, key):
        with self._lock:
            return self._entries.get(key)

    def put(self, key, value) -> None:
        with self._lock:
            if len(self._entries) >= self.capacity:
                self._entries.pop(next(iter(self._entries)))
            self._entries[key] = value


def _json_response(obj, status: int = 200) -> Response:
    return Response(content=canonical_bytes(obj), status_code=status,
                    media_type="application/json")


def _error(message: str, status: int, **extra) -> Response:
    body = {"error": message}
    body.update(extra)
    return _json_response(body, status)


def create_app(config: ApiConfig | None = None, *, store: Store | None = None,
               boundaries: dict | None = None) -> FastAPI:
    """Build the API app; tests may inject a store and boundaries directly."""
    if store is None:
        if config is None:
            raise ValueError("either a config or a store is required")
        store = pipeline.open_store(config.data_dir)
    if boundaries is None:
        boundaries = load_boundaries(config.boundaries) if config else {
            "type": "FeatureCollection", "features": []}

    app = FastAPI(title="epiatlas", docs_url=None, redoc_url=None)
    cache = _SurpriseCache()

    def model_catalog(snapshot):
        return surprise.default_models(snapshot)

    @app.get("/regions")
    def regions(group: str | None = None):
        snapshot = store.snapshot()
        if group is not None and group not in REGION_GROUPS:
            return _error(f"unknown region group {group!r}", 400,
                          groups=sorted(REGION_GROUPS))
        members = REGION_GROUPS[group] if group else None
        features = []
        for feature in boundaries["features"]:
            props = feature["properties"]
            fips = props["fips"]
            state_info = STATE_BY_FIPS.get(state_of(fips))
            if members is not None and (state_info is None
                                        or state_info.postal not in members):
                continue
            out_props = dict(props)
            out_props["population"] = snapshot.population(fips)
            out_props.setdefault("name", fips)
            features.append({**feature, "properties": out_props})
        return _json_response({"type": "FeatureCollection", "features": features})

    @app.get("/frame")
    def frame(metric: str = "", date: str = "", view: str = "raw"):
        snapshot = store.snapshot()
        try:
            metric_kind = parse_metric(metric)
        except ValueError as err:
            return _error(str(err), 400)
        try:
            day = dt.date.fromisoformat(date)
        except ValueError:
            return _error(f"bad date {date!r}, expected YYYY-MM-DD", 400)
        if view not in ("raw", "per_capita"):
            return _error(f"unknown view {view!r}", 400, views=["raw", "per_capita"])
        bounds = snapshot.date_bounds(metric_kind)
        if bounds is None or not (bounds[0] <= day <= bounds[1]):
            nearest = {
                "previous": bounds[1].isoformat() if bounds and day > bounds[1] else None,
                "next": bounds[0].isoformat() if bounds and day < bounds[0] else None,
            }
            return _error(f"no data for {metric_kind.value} on {date}", 404,
                          nearest=nearest)
        values = snapshot.frame_values(metric_kind, day)
        if view == "per_capita":
            out = {}
            for fips, value in values.items():
                population = snapshot.population(fips)
                if population:
                    out[fips] = clean_float(value * PER_CAPITA_BASE / population)
            values = out
        else:
            values = {fips: clean_float(v) for fips, v in values.items()}
        return _json_response(values)

    # `from` is a Python keyword, so range params are read off the request
    @app.get("/surprise")
    def surprise_frames(request: Request):
        params = request.query_params
        snapshot = store.snapshot()
        try:
            metric_kind = parse_metric(params.get("metric", ""))
        except ValueError as err:
            return _error(str(err), 400)
        try:
            start = dt.date.fromisoformat(params.get("from", ""))
            end = dt.date.fromisoformat(params.get("to", ""))
        except ValueError:
            return _error("from/to must be YYYY-MM-DD", 400)
        if start > end:
            return _error(f"from {start} is after to {end}", 400)
        available = {m.name: m for m in model_catalog(snapshot)}
        names = params.get("models")
        if names:
            model_names = [n.strip() for n in names.split(",") if n.strip()]
            unknown = [n for n in model_names if n not in available]
            if unknown or not model_names:
                return _error(f"unknown model(s): {', '.join(unknown) or '(none)'}",
                              400, available=sorted(available))
            models = [available[n] for n in model_names]
        else:
            models = list(available.values())
        key = (metric_kind.value, start.isoformat(), end.isoformat(),
               tuple(m.name for m in models), snapshot.version)
        body = cache.get(key)
        if body is None:
            frames = surprise.run_surprise_range(metric_kind, start, end, models,
                                                 snapshot)
            body = canonical_bytes([f.to_json_obj() for f in frames])
            cache.put(key, body)
        return Response(content=body, media_type="application/json")

    @app.get("/series")
    def series(request: Request, fips: str = "", metric: str = "",
               smooth: str | None = None):
        params = request.query_params
        snapshot = store.snapshot()
        try:
            metric_kind = parse_metric(metric)
        except ValueError as err:
            return _error(str(err), 400)
        if smooth is not None:
            if smooth != "rolling7":
                return _error(f"unknown smooth {smooth!r}", 400, smooths=["rolling7"])
            if metric_kind not in SMOOTHABLE:
                return _error(
                    f"rolling7 applies to daily or monthly metrics, not {metric_kind.value}",
                    400)
        bounds = snapshot.date_bounds(metric_kind)
        try:
            start = (dt.date.fromisoformat(params["from"]) if "from" in params
                     else (bounds[0] if bounds else dt.date.min))
            end = (dt.date.fromisoformat(params["to"]) if "to" in params
                   else (bounds[1] if bounds else dt.date.max))
        except ValueError:
            return _error("from/to must be YYYY-MM-DD", 400)
        if start > end:
            return _error(f"from {start} is after to {end}", 400)
        if len(fips) == 2 and snapshot.metric_level(metric_kind) == 5:
            # county-level metric at state granularity: serve the aggregate
            if not any(state_of(r) == fips or r == fips
                       for r in snapshot.regions(metric_kind)):
                return _error(f"unknown region {fips!r}", 404)
            full = snapshot.state_series(fips, metric_kind)
            out = MetricSeries(fips, metric_kind,
                               [(d, v) for d, v in full.points if start <= d <= end])
        else:
            result = snapshot.query_series(fips, metric_kind, start, end)
            if not result.found:
                return _error(f"unknown region {fips!r}", 404)
            out = result.series
        if smooth:
            out = rolling_average(out, 7)
        return _json_response({
            "fips": fips,
            "metric": metric_kind.value,
            "smooth": smooth,
            "points": [[d.isoformat(), clean_float(v)] for d, v in out.points],
        })

    @app.get("/models")
    def models():
        snapshot = store.snapshot()
        return _json_response({"models": [
            {"name": m.name, "kind": m.kind.value, "parameters": m.parameters()}
            for m in model_catalog(snapshot)
        ]})

    @app.get("/meta")
    def meta():
        snapshot = store.snapshot()
        bounds = snapshot.date_bounds()
        all_regions = snapshot.regions()
        return _json_response({
            "snapshot_version": snapshot.version,
            "dates": {
                "min": bounds[0].isoformat() if bounds else None,
                "max": bounds[1].isoformat() if bounds else None,
            },
            "default_dates": {
                "from": config.default_start.isoformat()
                if config and config.default_start else None,
                "to": config.default_end.isoformat()
                if config and config.default_end else None,
            },
            "regions": {
                "counties": sum(1 for r in all_regions if is_county_fips(r)),
                "states": sum(1 for r in all_regions if len(r) == 2),
            },
            "metrics": [m.value for m in snapshot.metrics()],
            "models": [m.name for m in model_catalog(snapshot)],
        })

    if config is not None and config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app
