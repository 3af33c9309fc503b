"""Acceptance suite: one test per release criterion, at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -s`` to see one [PASS] line per
criterion; any failure is a red criterion.
"""
import csv
import datetime as dt
import itertools
import json
import math
import random
import time
from collections import defaultdict

import numpy as np
import pytest
from fastapi.testclient import TestClient

from epiatlas import pipeline, surprise
from epiatlas.cli import EXIT_OK, main
from epiatlas.jsonutil import canonical
from epiatlas.metrics import Metric
from epiatlas.service import create_app, load_boundaries
from epiatlas.store import MetricSeries, Point, Store, diff_cumulative
from epiatlas.surprise import (
    EPS_FLOOR,
    BeliefState,
    bayes_update,
    compute_surprise_frame,
    kl_divergence,
    population_model,
    run_surprise_range,
    surprise_steps,
    trailing_model,
    uniform_model,
)

D = dt.date
D0 = D(2020, 3, 1)


def _pass(line: str) -> None:
    print(f"[PASS] {line}")


def _daily_store(counts_by_region, populations):
    store = Store()
    points = []
    for region, counts in counts_by_region.items():
        total = 0.0
        for k, c in enumerate(counts):
            total += c
            points.append(Point(region, Metric.CASES_CUM,
                                D0 + dt.timedelta(days=k), total))
    store.upsert(points)
    store.set_populations(populations)
    return store


def test_kl_correctness():
    value = kl_divergence([0.5, 0.5], [0.25, 0.75])
    assert abs(value - 0.207518) <= 1e-6

    rng = random.Random(20240)
    for _ in range(10_000):
        n = rng.randrange(2, 8)
        p = [rng.random() + 1e-9 for _ in range(n)]
        q = [rng.random() + 1e-9 for _ in range(n)]
        p = [x / math.fsum(p) for x in p]
        q = [x / math.fsum(q) for x in q]
        assert kl_divergence(p, q) >= 0.0
        assert kl_divergence(p, p) <= 1e-12
    _pass("KL correctness: 0.207518 bits +/- 1e-6; kl(P,P) <= 1e-12 and "
          "kl >= 0 over 10^4 random pairs")


def test_belief_normalization():
    rng = random.Random(777)
    models = [uniform_model(), population_model(), trailing_model(14)]
    belief = BeliefState.uniform(models)
    for _ in range(1000):
        likelihoods = [10.0 ** rng.uniform(-300, 3) for _ in models]
        belief = bayes_update(belief, likelihoods)
        assert abs(math.fsum(belief.weights) - 1.0) <= 1e-9
        assert min(belief.weights) >= 1e-12
    _pass("Belief normalization: 10^3 random updates keep weights summing to "
          "1 +/- 1e-9, all >= 1e-12")


def test_single_model_nullity(demo_snapshot):
    bounds = demo_snapshot.date_bounds(Metric.CASES_DAILY)
    frames = run_surprise_range(Metric.CASES_DAILY, bounds[0], bounds[1],
                                [population_model()], demo_snapshot)
    assert len(frames) == 400
    for frame in frames:
        assert np.all(frame.surprise == 0.0)
        assert np.all(frame.signed == 0.0)
    _pass("Single-model nullity: |models|=1 surprise frames identically zero "
          "over the demo dataset (400 dates)")


def test_sample_size_debiasing():
    small, big = "06001", "06003"
    pops = {small: 1_000, big: 1_000_000}
    counts = {small: [10.0] * 15 + [12.0], big: [10_000.0] * 15 + [12_000.0]}
    store = _daily_store(counts, pops)
    day = D0 + dt.timedelta(days=15)
    belief = BeliefState.uniform([trailing_model(14), population_model()])
    frame, _ = compute_surprise_frame(day, Metric.CASES_DAILY, belief,
                                      store.snapshot())
    s, b = frame.entry(small), frame.entry(big)

    # direct-computation oracle for the small region, plain floats throughout
    trail, glob = 0.01, (12.0 + 12_000.0) / 1_001_000.0
    ls = []
    for rate in (trail, glob):
        sigma = math.sqrt(rate * (1 - rate) / pops[small])
        z = (0.012 - rate) / sigma
        ls.append(max(math.exp(-0.5 * z * z), EPS_FLOOR))
    products = [0.5 * l for l in ls]
    posterior = [max(p / math.fsum(products), EPS_FLOOR) for p in products]
    oracle_small = math.fsum(p * math.log2(p / 0.5) for p in posterior)
    assert s.surprise_bits == pytest.approx(oracle_small, rel=1e-9)

    assert abs(b.signed_surprise) > abs(s.signed_surprise)
    assert b.surprise_bits > s.surprise_bits
    _pass("Sample-size de-biasing: +20% residual at population 10^6 "
          f"({b.signed_surprise:.3f} bits) outweighs 10^3 "
          f"({s.signed_surprise:.4f} bits)")


def test_model_convergence():
    days = 120
    store = _daily_store({"06001": [50.0] * days, "06003": [200.0] * days},
                         {"06001": 1_000, "06003": 4_000})
    models = [population_model(), uniform_model()]
    weights = [belief.weight_of("population_proportional")
               for _, belief in surprise_steps(Metric.CASES_DAILY, D0,
                                               D0 + dt.timedelta(days=days - 1),
                                               models, store.snapshot())]
    for earlier, later in zip(weights, weights[1:]):
        assert later >= earlier
    assert weights[99] >= 0.99
    _pass("Model convergence: true model's weight non-decreasing, "
          f"reaches {weights[99]:.6f} >= 0.99 within 100 dates")


def test_pipeline_roundtrips(demo_paths, demo_snapshot):
    # cumsum . diff identity over 10^3 random cumulative series, exact
    rng = random.Random(5150)
    for _ in range(1000):
        n = rng.randrange(1, 50)
        values = [float(rng.randrange(-100, 10_000)) for _ in range(n)]
        series = MetricSeries("39035", Metric.CASES_CUM,
                              list(zip((D0 + dt.timedelta(days=k) for k in range(n)),
                                       values)))
        rebuilt = list(itertools.accumulate(diff_cumulative(series).values()))
        assert rebuilt == values

    # store queries equal brute-force recomputation from the raw demo rows
    cumulative = defaultdict(dict)
    with open(demo_paths["nyt"], encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["fips"]:
                cumulative[row["fips"]][row["date"]] = int(row["cases"])
    assert len(cumulative) == 50
    for fips, by_date in cumulative.items():
        stored = demo_snapshot.series(fips, Metric.CASES_CUM)
        assert [(d.isoformat(), v) for d, v in stored.points] == \
            sorted((d, float(v)) for d, v in by_date.items())

    # state aggregates equal independent re-summation on a 10-county fixture
    rng = random.Random(99)
    fixture = Store()
    raw_points = [Point(f"{state}{i:03d}", Metric.CASES_CUM, D0,
                        float(rng.randrange(0, 1000)))
                  for state in ("39", "06") for i in range(1, 11)]
    fixture.upsert(raw_points)
    resummed = defaultdict(float)
    for p in raw_points:
        resummed[p.region[:2]] += p.value
    assert fixture.snapshot().aggregate_to_state(Metric.CASES_CUM, D0) == dict(resummed)
    _pass("Pipeline round-trips: cumsum(diff) exact on 10^3 series; demo "
          "ingest matches raw-row recomputation; state aggregates match "
          "independent re-summation")


def test_determinism(demo_paths, tmp_path, capsys):
    data_dir = tmp_path / "store"
    store = pipeline.open_store(data_dir)
    for source in pipeline.SOURCES:
        pipeline.ingest_file(store, source, demo_paths[source])

    outputs = []
    for name in ("a.jsonl", "b.jsonl"):
        out = tmp_path / name
        code = main(["compute", "--data-dir", str(data_dir),
                     "--metric", "cases_daily",
                     "--from", "2020-03-01", "--to", "2021-04-04",
                     "--out", str(out)])
        assert code == EXIT_OK
        outputs.append(out.read_bytes())
    capsys.readouterr()
    assert outputs[0] == outputs[1]

    # permuting region input order changes no value beyond 1e-12
    rng = random.Random(404)
    pops = {f"48{2*i+1:03d}": rng.randrange(1_000, 500_000) for i in range(20)}
    counts = {r: [float(rng.randrange(0, 80)) for _ in range(30)] for r in pops}

    def build(order):
        s = Store()
        pts = []
        for region in order:
            total = 0.0
            for k, c in enumerate(counts[region]):
                total += c
                pts.append(Point(region, Metric.CASES_CUM,
                                 D0 + dt.timedelta(days=k), total))
        s.upsert(pts)
        s.set_populations(pops)
        return s.snapshot()

    order = list(pops)
    shuffled = order[:]
    rng.shuffle(shuffled)
    models = [uniform_model(), population_model(), trailing_model(14)]
    frames_a = run_surprise_range(Metric.CASES_DAILY, D0,
                                  D0 + dt.timedelta(days=29), models, build(order))
    frames_b = run_surprise_range(Metric.CASES_DAILY, D0,
                                  D0 + dt.timedelta(days=29), models, build(shuffled))
    worst = 0.0
    for fa, fb in zip(frames_a, frames_b):
        assert fa.regions == fb.regions
        for attr in ("observed", "expected", "surprise", "signed"):
            worst = max(worst, float(np.max(np.abs(getattr(fa, attr)
                                                   - getattr(fb, attr)))))
    assert worst <= 1e-12
    _pass("Determinism: repeated `compute` byte-identical over the demo "
          f"dataset; region permutation max delta {worst:.1e} <= 1e-12")


def test_api_conformance(demo_store, demo_paths, tmp_path, capsys):
    client = TestClient(create_app(store=demo_store,
                                   boundaries=load_boundaries(demo_paths["boundaries"])))

    checks = [
        ("GET /regions", client.get("/regions"), 200),
        ("GET /regions group", client.get("/regions?group=Midwest"), 200),
        ("GET /regions bad group", client.get("/regions?group=North"), 400),
        ("GET /frame", client.get("/frame?metric=cases_daily&date=2020-06-01"), 200),
        ("GET /frame per_capita", client.get(
            "/frame?metric=cases_daily&date=2020-06-01&view=per_capita"), 200),
        ("GET /frame future", client.get(
            "/frame?metric=cases_daily&date=2031-01-01"), 404),
        ("GET /frame bad metric", client.get(
            "/frame?metric=zzz&date=2020-06-01"), 400),
        ("GET /surprise", client.get(
            "/surprise?metric=cases_daily&from=2020-04-01&to=2020-04-05"), 200),
        ("GET /surprise bad model", client.get(
            "/surprise?metric=cases_daily&from=2020-04-01&to=2020-04-05&models=x"), 400),
        ("GET /series", client.get(
            "/series?fips=39001&metric=cases_daily&smooth=rolling7"), 200),
        ("GET /series unknown fips", client.get(
            "/series?fips=99999&metric=cases_daily"), 404),
        ("GET /models", client.get("/models"), 200),
        ("GET /meta", client.get("/meta"), 200),
    ]
    for label, response, expected_status in checks:
        assert response.status_code == expected_status, label
        body = response.json()  # must always parse
        if expected_status != 200:
            assert "error" in body, label

    geojson = client.get("/regions").json()
    assert geojson["type"] == "FeatureCollection"
    assert all(f["type"] == "Feature" and "geometry" in f and "properties" in f
               for f in geojson["features"])

    # /surprise equals the CLI compute export byte-for-byte after canonicalization
    params = {"metric": "cases_daily", "from": "2020-04-01", "to": "2020-04-14"}
    api_frames = client.get("/surprise", params=params).json()
    out = tmp_path / "frames.jsonl"
    code = main(["compute", "--data-dir", str(demo_store.path.parent),
                 "--metric", params["metric"], "--from", params["from"],
                 "--to", params["to"], "--out", str(out)])
    capsys.readouterr()
    assert code == EXIT_OK
    cli_lines = [line.encode() for line in out.read_text().splitlines()]
    api_lines = [canonical(frame).encode() for frame in api_frames]
    assert cli_lines == api_lines
    _pass("API conformance: JSON bodies on all paths, GeoJSON shape valid, "
          "/surprise == CLI export after canonicalization")


def test_performance_envelope(demo_snapshot):
    # synthetic 3,000 regions x 730 days x 3 models
    rng = np.random.default_rng(11)
    n_regions, n_days = 3000, 730
    fips = [f"{10_000 + i:05d}" for i in range(n_regions)]
    pops = rng.integers(1_000, 2_000_000, n_regions)
    season = 1.0 + 0.5 * np.sin(np.arange(n_days) * 2 * np.pi / 180.0)
    lam = (pops[:, None] * 2e-4) * season[None, :]
    counts = rng.poisson(lam).astype(np.float64)
    cums = np.cumsum(counts, axis=1)

    store = Store()
    dates = [D0 + dt.timedelta(days=k) for k in range(n_days)]
    for i, f in enumerate(fips):
        store.upsert_series(f, Metric.CASES_CUM, dates, cums[i])
    store.set_populations({f: int(p) for f, p in zip(fips, pops)})
    snapshot = store.snapshot()
    models = [uniform_model(), population_model(), trailing_model(14)]

    started = time.perf_counter()
    frames = run_surprise_range(Metric.CASES_DAILY, dates[0], dates[-1],
                                models, snapshot)
    full_elapsed = time.perf_counter() - started
    assert len(frames) == n_days
    assert len(frames[-1]) == n_regions
    assert full_elapsed < 60.0

    bounds = demo_snapshot.date_bounds(Metric.CASES_DAILY)
    started = time.perf_counter()
    demo_frames = run_surprise_range(Metric.CASES_DAILY, bounds[0], bounds[1],
                                     surprise.default_models(demo_snapshot),
                                     demo_snapshot)
    demo_elapsed = time.perf_counter() - started
    assert len(demo_frames) == 400
    assert demo_elapsed < 5.0
    _pass(f"Performance envelope: 3000x730x3 run in {full_elapsed:.2f}s < 60s; "
          f"demo 50x400 in {demo_elapsed:.3f}s < 5s")
