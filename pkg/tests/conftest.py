import pytest

from epiatlas import demo, pipeline


@pytest.fixture(scope="session")
def demo_paths(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo-fixtures")
    return demo.generate_demo(out)


@pytest.fixture(scope="session")
def demo_store(demo_paths, tmp_path_factory):
    data_dir = tmp_path_factory.mktemp("demo-store")
    store = pipeline.open_store(data_dir)
    for source in pipeline.SOURCES:
        pipeline.ingest_file(store, source, demo_paths[source])
    return store


@pytest.fixture(scope="session")
def demo_snapshot(demo_store):
    return demo_store.snapshot()
