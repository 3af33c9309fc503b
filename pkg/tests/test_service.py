import datetime as dt
import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from epiatlas.metrics import Metric
from epiatlas.service import ApiConfig, create_app, load_boundaries
from epiatlas.store import Store, rolling_average


@pytest.fixture(scope="module")
def client(demo_store, demo_paths):
    boundaries = load_boundaries(demo_paths["boundaries"])
    app = create_app(store=demo_store, boundaries=boundaries)
    return TestClient(app)


@pytest.fixture(scope="module")
def empty_client():
    app = create_app(store=Store())
    return TestClient(app)


def _assert_error_body(response, status):
    assert response.status_code == status
    body = response.json()  # must parse as JSON on every error path
    assert "error" in body


class TestRegions:
    def test_all_features_enriched(self, client, demo_snapshot):
        body = client.get("/regions").json()
        assert body["type"] == "FeatureCollection"
        assert len(body["features"]) == 50
        for feature in body["features"]:
            props = feature["properties"]
            assert props["fips"] and props["name"]
            assert props["population"] == demo_snapshot.population(props["fips"])

    def test_group_filter(self, client):
        body = client.get("/regions", params={"group": "West"}).json()
        states = {f["properties"]["fips"][:2] for f in body["features"]}
        assert states == {"06", "53"}  # CA and WA in the demo set

    def test_unknown_group(self, client):
        response = client.get("/regions", params={"group": "North"})
        _assert_error_body(response, 400)
        assert sorted(response.json()["groups"]) == ["East", "Midwest", "South", "West"]


class TestFrame:
    def test_matches_store_queries(self, client, demo_snapshot):
        day = dt.date(2020, 6, 1)
        body = client.get("/frame", params={"metric": "cases_daily",
                                            "date": day.isoformat()}).json()
        assert body  # demo data covers this date
        for fips, value in body.items():
            assert value == demo_snapshot.value_at(fips, Metric.CASES_DAILY, day)

    def test_per_capita_view(self, client, demo_snapshot):
        day = dt.date(2020, 6, 1)
        raw = client.get("/frame", params={"metric": "cases_daily",
                                           "date": day.isoformat()}).json()
        pc = client.get("/frame", params={"metric": "cases_daily",
                                          "date": day.isoformat(),
                                          "view": "per_capita"}).json()
        for fips, value in pc.items():
            population = demo_snapshot.population(fips)
            assert value == pytest.approx(raw[fips] * 1e5 / population, rel=1e-12)

    def test_future_date_404_with_nearest(self, client):
        response = client.get("/frame", params={"metric": "cases_daily",
                                                "date": "2030-01-01"})
        _assert_error_body(response, 404)
        assert response.json()["nearest"]["previous"] == "2021-04-04"

    def test_predata_date_404_with_nearest(self, client):
        response = client.get("/frame", params={"metric": "cases_daily",
                                                "date": "2019-01-01"})
        _assert_error_body(response, 404)
        assert response.json()["nearest"]["next"] == "2020-03-01"

    def test_bad_metric(self, client):
        _assert_error_body(client.get("/frame", params={"metric": "nope",
                                                        "date": "2020-06-01"}), 400)

    def test_bad_view(self, client):
        _assert_error_body(client.get("/frame", params={"metric": "cases_daily",
                                                        "date": "2020-06-01",
                                                        "view": "log"}), 400)

    def test_bad_date(self, client):
        _assert_error_body(client.get("/frame", params={"metric": "cases_daily",
                                                        "date": "junk"}), 400)


class TestSurpriseEndpoint:
    def test_single_model_all_zero(self, client):
        body = client.get("/surprise", params={
            "metric": "cases_daily", "from": "2020-04-01", "to": "2020-04-05",
            "models": "population_proportional"}).json()
        assert len(body) == 5
        for frame in body:
            assert frame["models"] == ["population_proportional"]
            for entry in frame["entries"]:
                assert entry["surprise"] == 0.0
                assert entry["signed"] == 0.0

    def test_identical_requests_identical_bytes(self, client):
        params = {"metric": "cases_daily", "from": "2020-04-01",
                  "to": "2020-04-10"}
        first = client.get("/surprise", params=params)
        second = client.get("/surprise", params=params)
        assert first.content == second.content

    def test_unknown_model_lists_available(self, client):
        response = client.get("/surprise", params={
            "metric": "cases_daily", "from": "2020-04-01", "to": "2020-04-02",
            "models": "bogus"})
        _assert_error_body(response, 400)
        assert "population_proportional" in response.json()["available"]

    def test_reversed_range(self, client):
        _assert_error_body(client.get("/surprise", params={
            "metric": "cases_daily", "from": "2020-05-01", "to": "2020-04-01"}), 400)

    def test_bad_dates(self, client):
        _assert_error_body(client.get("/surprise", params={
            "metric": "cases_daily", "from": "yesterday", "to": "2020-04-01"}), 400)

    def test_no_intersection_empty_list(self, client):
        body = client.get("/surprise", params={
            "metric": "cases_daily", "from": "2030-01-01", "to": "2030-01-02"}).json()
        assert body == []


class TestSeries:
    def test_roundtrip_without_smoothing(self, client, demo_snapshot):
        fips = "39001"
        body = client.get("/series", params={"fips": fips,
                                             "metric": "cases_cum"}).json()
        stored = demo_snapshot.series(fips, Metric.CASES_CUM)
        assert body["points"] == [[d.isoformat(), v] for d, v in stored.points]

    def test_rolling7_matches_store_op(self, client, demo_snapshot):
        fips = "39001"
        body = client.get("/series", params={
            "fips": fips, "metric": "cases_daily", "smooth": "rolling7",
            "from": "2020-03-01", "to": "2020-06-01"}).json()
        expected = rolling_average(
            demo_snapshot.query_series(fips, Metric.CASES_DAILY,
                                       dt.date(2020, 3, 1), dt.date(2020, 6, 1)).series, 7)
        assert body["points"] == [[d.isoformat(), v] for d, v in expected.points]

    def test_unknown_fips_404(self, client):
        _assert_error_body(client.get("/series", params={
            "fips": "99999", "metric": "cases_daily"}), 404)

    def test_smooth_on_cumulative_rejected(self, client):
        _assert_error_body(client.get("/series", params={
            "fips": "39001", "metric": "cases_cum", "smooth": "rolling7"}), 400)

    def test_unknown_smooth_rejected(self, client):
        _assert_error_body(client.get("/series", params={
            "fips": "39001", "metric": "cases_daily", "smooth": "loess"}), 400)

    def test_state_level_vaccination_series(self, client, demo_snapshot):
        body = client.get("/series", params={"fips": "39",
                                             "metric": "vax_full_cum"}).json()
        assert len(body["points"]) > 0


class TestModelsAndMeta:
    def test_models_catalog(self, client):
        body = client.get("/models").json()
        names = [m["name"] for m in body["models"]]
        assert len(names) >= 3
        assert "foot_traffic_proportional" in names  # patterns are loaded
        trailing = next(m for m in body["models"]
                        if m["name"] == "trailing_base_rate_14")
        assert trailing["parameters"] == {"window": 14}

    def test_meta_bounds_match_demo(self, client, demo_snapshot):
        body = client.get("/meta").json()
        bounds = demo_snapshot.date_bounds()
        assert body["dates"] == {"min": bounds[0].isoformat(),
                                 "max": bounds[1].isoformat()}
        assert body["regions"]["counties"] == 50
        assert body["regions"]["states"] == 5
        assert body["snapshot_version"] == demo_snapshot.version

    def test_empty_store_meta(self, empty_client):
        body = empty_client.get("/meta").json()
        assert body["dates"] == {"min": None, "max": None}
        assert body["regions"] == {"counties": 0, "states": 0}

    def test_version_increases_after_reingest(self, demo_paths, tmp_path):
        from epiatlas import pipeline
        store = pipeline.open_store(tmp_path)
        client = TestClient(create_app(store=store))
        v0 = client.get("/meta").json()["snapshot_version"]
        pipeline.ingest_file(store, "census", demo_paths["census"])
        v1 = client.get("/meta").json()["snapshot_version"]
        assert v1 > v0


class TestConfig:
    def test_load_resolves_relative_paths(self, demo_paths, tmp_path, monkeypatch):
        config_path = demo_paths["config"]
        monkeypatch.delenv("ATLAS_PORT", raising=False)
        monkeypatch.delenv("ATLAS_DATA_DIR", raising=False)
        config = ApiConfig.load(config_path)
        assert config.port == 8600
        assert config.boundaries == config_path.parent / "boundaries.geojson"
        assert config.data_dir == config_path.parent / "store"

    def test_env_overrides(self, demo_paths, monkeypatch):
        monkeypatch.setenv("ATLAS_PORT", "9123")
        monkeypatch.setenv("ATLAS_DATA_DIR", "/tmp/elsewhere")
        config = ApiConfig.load(demo_paths["config"])
        assert config.port == 9123
        assert config.data_dir == Path("/tmp/elsewhere")

    def test_bad_port_rejected(self, demo_paths, tmp_path):
        bad = tmp_path / "config.json"
        bad.write_text(json.dumps({
            "port": 99999,
            "boundaries": str(demo_paths["boundaries"])}))
        with pytest.raises(ValueError, match="port"):
            ApiConfig.load(bad)

    def test_missing_boundaries_rejected(self, tmp_path):
        bad = tmp_path / "config.json"
        bad.write_text(json.dumps({"boundaries": "nope.geojson"}))
        with pytest.raises(ValueError, match="boundary"):
            ApiConfig.load(bad)

    def test_boundary_features_require_fips(self, tmp_path):
        path = tmp_path / "boundaries.geojson"
        path.write_text(json.dumps({
            "type": "FeatureCollection",
            "features": [{"type": "Feature", "geometry": None, "properties": {}}]}))
        with pytest.raises(ValueError, match="fips"):
            load_boundaries(path)


class TestStateSeriesEndpoint:
    def test_state_fips_serves_county_aggregate(self, client, demo_snapshot):
        body = client.get("/series", params={"fips": "39",
                                             "metric": "cases_daily"}).json()
        expected = demo_snapshot.state_series("39", Metric.CASES_DAILY)
        assert body["points"] == [[d.isoformat(), v] for d, v in expected.points]

    def test_state_fips_unknown_when_no_counties(self, client):
        _assert_error_body(client.get("/series", params={
            "fips": "02", "metric": "cases_daily"}), 404)
