import pytest
from fastapi.testclient import TestClient

from stylemetric.api import create_app
from stylemetric.iterative import identity_weights, make_sparse_oracle, make_synthetic_features, simulate_triplets
from stylemetric.storage import Catalog, write_features
from stylemetric.triplets import write_triplets


@pytest.fixture()
def service(tmp_path):
    features, type_of = make_synthetic_features(["seat", "table"], per_type=16, dim=32, seed=3)
    cat = Catalog(tmp_path)
    for mid, t in sorted(type_of.items()):
        cat.add_model(mid, t, cluster="furniture")
    cat.save_manifest()
    meta = {mid: {"object_type": t, "cluster": "furniture"} for mid, t in type_of.items()}
    path = cat.feature_path("default")
    path.parent.mkdir(parents=True, exist_ok=True)
    write_features(path, features, None, meta, [("features", 32)])
    cat.save_metric("base", identity_weights(32, config_hash="synthetic"))

    # seed one crowd triplet set
    oracle = make_sparse_oracle(dim=32, informative=8, noise=0.0, seed=3)
    seats = sorted(m for m, t in type_of.items() if t == "seat")
    tables = sorted(m for m, t in type_of.items() if t == "table")
    crowd = simulate_triplets(oracle, features, seats, tables, ("seat", "table"), n_tasks=40, seed=3)
    trip_path = cat.triplet_path("crowd-hits")
    trip_path.parent.mkdir(parents=True, exist_ok=True)
    write_triplets(trip_path, crowd)

    app = create_app(tmp_path)
    return TestClient(app), type_of


def test_models_listing_and_filter(service):
    client, type_of = service
    r = client.get("/models")
    assert r.status_code == 200
    assert len(r.json()["models"]) == len(type_of)
    r = client.get("/models", params={"type": "seat"})
    models = r.json()["models"]
    assert len(models) == 16
    assert all(m["object_type"] == "seat" for m in models)


def test_search_basics(service):
    client, _ = service
    r = client.get("/search", params={"query": "seat-000", "type": "table", "metric": "base", "k": 5})
    assert r.status_code == 200
    body = r.json()
    assert body["metric_id"] == "base"
    assert body["total"] == 16
    assert len(body["ranked"]) == 5
    dists = [e["distance"] for e in body["ranked"]]
    assert dists == sorted(dists)

    assert client.get("/search", params={"query": "ghost", "type": "table", "metric": "base"}).status_code == 404
    assert client.get("/search", params={"query": "seat-000", "type": "table", "metric": "ghost"}).status_code == 404


def test_search_config_mismatch_409(service, tmp_path):
    client, _ = service
    state = client.app.state.service
    state.catalog.save_metric("alien", identity_weights(32, config_hash="other"))
    r = client.get("/search", params={"query": "seat-000", "type": "table", "metric": "alien"})
    assert r.status_code == 409


def test_rerank_flow(service):
    client, type_of = service
    seats = sorted(m for m, t in type_of.items() if t == "seat")
    env = seats[0]
    ranked = seats[1:]  # all 15 others
    r = client.post("/rerank", json={"env_model": env, "ranked_ids": ranked})
    assert r.status_code == 200
    body = r.json()
    assert body["triplet_count"] == 10 * (15 - 10)
    assert body["triplet_set"].startswith("rerank-")

    # stored triplets are re-readable
    state = client.app.state.service
    stored = state.catalog.load_triplets(body["triplet_set"])
    assert len(stored) == body["triplet_count"]
    assert all(t.source == "user" for t in stored)


def test_rerank_validation(service):
    client, type_of = service
    seats = sorted(m for m, t in type_of.items() if t == "seat")
    r = client.post("/rerank", json={"env_model": seats[0], "ranked_ids": seats[1:5]})
    assert r.status_code == 422  # not a full permutation
    r = client.post("/rerank", json={"env_model": seats[0], "ranked_ids": seats[1:] + [seats[1]]})
    assert r.status_code == 422  # duplicate
    r = client.post("/rerank", json={"env_model": "ghost", "ranked_ids": seats[1:]})
    assert r.status_code == 404


def test_sixchoice_flow(service):
    client, _ = service
    r = client.get("/sixchoice/next", params={"pairX": "seat", "pairY": "table", "seed": 1})
    assert r.status_code == 200
    t = r.json()
    assert len(t["candidates"]) == 6

    bad = client.post(f"/sixchoice/{t['task_id']}", json={"selected": [t["candidates"][0], "ghost"]})
    assert bad.status_code == 422

    good = client.post(
        f"/sixchoice/{t['task_id']}",
        json={"selected": [t["candidates"][0], t["candidates"][1]]},
    )
    assert good.status_code == 200
    assert good.json()["triplet_count"] == 8

    # a task can only be answered once
    again = client.post(
        f"/sixchoice/{t['task_id']}",
        json={"selected": [t["candidates"][0], t["candidates"][1]]},
    )
    assert again.status_code == 404

    # counters accumulate by exactly 8 per submission
    r2 = client.get("/sixchoice/next", params={"pairX": "seat", "pairY": "table", "seed": 2})
    t2 = r2.json()
    good2 = client.post(
        f"/sixchoice/{t2['task_id']}",
        json={"selected": [t2["candidates"][0], t2["candidates"][1]]},
    )
    assert good2.json()["total_stored"] == good.json()["total_stored"] + 8


def test_train_and_retrain_search(service):
    client, type_of = service
    seats = sorted(m for m, t in type_of.items() if t == "seat")
    before = client.get(
        "/search", params={"query": "seat-000", "type": "table", "metric": "base", "k": 0}
    ).json()

    r = client.post("/train", json={"triplet_sets": ["crowd-hits"], "base": "crowd"})
    assert r.status_code == 200
    metric_id = r.json()["metric_id"]
    assert metric_id.startswith("crowd-")

    after = client.get(
        "/search", params={"query": "seat-000", "type": "table", "metric": metric_id, "k": 0}
    ).json()
    assert after["metric_id"] == metric_id
    # the learned metric is used for the ranking: recompute it directly
    state = client.app.state.service
    from stylemetric.storage import search_ranking

    expected = search_ranking(
        state.features, state.type_of, state.catalog.load_metric(metric_id), "seat-000", "table", metric_id
    )
    assert [e["model_id"] for e in after["ranked"]] == [m for m, _ in expected.ranked]
    assert before["ranked"] != after["ranked"]


def test_train_source_filter(service):
    client, _ = service
    r = client.post("/train", json={"triplet_sets": ["crowd-hits"], "base": "user"})
    assert r.status_code == 422  # crowd set has no user triplets
    r = client.post("/train", json={"triplet_sets": ["ghost"], "base": "combined"})
    assert r.status_code == 404


def test_train_busy_409(service):
    client, _ = service
    state = client.app.state.service
    assert client.get("/train/status").json() == {"busy": False}
    state.train_lock.acquire()
    try:
        assert client.get("/train/status").json() == {"busy": True}
        r = client.post("/train", json={"triplet_sets": ["crowd-hits"], "base": "crowd"})
        assert r.status_code == 409
    finally:
        state.train_lock.release()


def test_metric_detail_and_plot_data(service):
    client, _ = service
    r = client.get("/metrics/base")
    assert r.status_code == 200
    body = r.json()
    assert body["dim"] == 32
    assert len(body["plot_data"]) == 32
    assert client.get("/metrics/ghost").status_code == 404
    assert client.get("/metrics").json()["metrics"][0] == "base"


def test_thumbnail_served_when_present(service):
    client, _ = service
    assert client.get("/thumbnails/seat-000.png").status_code == 404
    state = client.app.state.service
    path = state.catalog.thumbnail_path("seat-000")
    path.parent.mkdir(parents=True, exist_ok=True)
    import numpy as np
    from PIL import Image

    Image.fromarray(np.zeros((8, 8, 3), dtype=np.uint8)).save(path)
    r = client.get("/thumbnails/seat-000.png")
    assert r.status_code == 200
    assert r.headers["content-type"] == "image/png"


def test_rerank_persists_ranking_record(service):
    client, type_of = service
    seats = sorted(m for m, t in type_of.items() if t == "seat")
    r = client.post("/rerank", json={"env_model": seats[0], "ranked_ids": seats[1:], "user": "u9"})
    set_id = r.json()["triplet_set"]
    state = client.app.state.service
    import json

    record = json.loads((state.catalog.root / "rankings" / f"{set_id}.json").read_text())
    assert record["env_model"] == seats[0]
    assert record["ranked_ids"] == seats[1:]
