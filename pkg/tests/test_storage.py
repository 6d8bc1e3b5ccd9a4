import numpy as np
import pytest

from stylemetric.config import FULL_LAYOUT, DescriptorConfig
from stylemetric.iterative import identity_weights, make_synthetic_features
from stylemetric.metric import ConfigMismatchError, FeatureVector, TrainConfig, WeightMatrix, train
from stylemetric.storage import (
    Catalog,
    check_compatible,
    read_features,
    read_weights,
    search_ranking,
    write_features,
    write_weights,
)
from stylemetric.triplets import TripletRecord


@pytest.fixture(scope="module")
def corpus():
    features, type_of = make_synthetic_features(["seat", "table"], per_type=12, dim=24, seed=6)
    return features, type_of


def test_feature_file_bit_exact_round_trip(tmp_path, corpus):
    features, type_of = corpus
    path = tmp_path / "f.json"
    meta = {mid: {"object_type": t, "cluster": t} for mid, t in type_of.items()}
    write_features(path, features, None, meta, [("features", 24)])
    back, meta_back = read_features(path)
    assert set(back) == set(features)
    for mid in features:
        assert np.array_equal(back[mid].values, features[mid].values)  # bit-identical
        assert back[mid].config_hash == features[mid].config_hash
    assert meta_back["model_meta"]["seat-000"]["object_type"] == "seat"
    # canonical serialization: saving what was loaded reproduces the bytes
    first = path.read_bytes()
    write_features(tmp_path / "f2.json", back, None, meta_back["model_meta"], meta_back["layout"])
    assert (tmp_path / "f2.json").read_bytes() == first


def test_feature_file_rejects_mixed_hashes(tmp_path):
    a = FeatureVector(model_id="a", config_hash="h1", values=np.ones(3))
    b = FeatureVector(model_id="b", config_hash="h2", values=np.ones(3))
    with pytest.raises(ValueError, match="mixed"):
        write_features(tmp_path / "f.json", {"a": a, "b": b})


def test_feature_file_config_hash_consistency(tmp_path, unit_box, desk_config):
    from stylemetric.extract import extract_features

    fv, meta = extract_features(unit_box, desk_config)
    path = tmp_path / "real.json"
    write_features(path, {fv.model_id: fv}, desk_config, {fv.model_id: meta}, FULL_LAYOUT)
    back, meta_back = read_features(path)
    assert meta_back["config_hash"] == desk_config.config_hash()
    assert DescriptorConfig.from_dict(meta_back["config"]) == desk_config
    assert np.array_equal(back[fv.model_id].values, fv.values)


def test_weight_file_round_trip(tmp_path, corpus):
    features, _ = corpus
    ids = sorted(features)
    triplets = [TripletRecord(a=ids[i], b=ids[i + 1], c=ids[i + 2]) for i in range(10)]
    for shape in ("diagonal", "full"):
        w = train(triplets, features, TrainConfig(shape=shape, pca_dim=8, max_epochs=40))
        path = tmp_path / f"{shape}.json"
        write_weights(path, w)
        back = read_weights(path)
        assert back.shape == w.shape and back.dim == w.dim
        assert np.array_equal(back.values, w.values)
        assert np.array_equal(back.mean, w.mean)
        assert np.array_equal(back.std, w.std)
        if shape == "full":
            assert np.array_equal(back.components, w.components)
        assert back.layout == w.layout
        assert back.provenance == w.provenance
        first = path.read_bytes()
        write_weights(tmp_path / f"{shape}2.json", back)
        assert (tmp_path / f"{shape}2.json").read_bytes() == first


def test_wrong_kind_rejected(tmp_path, corpus):
    features, _ = corpus
    path = tmp_path / "f.json"
    write_features(path, features)
    with pytest.raises(ValueError, match="not a weight file"):
        read_weights(path)
    w = identity_weights(4)
    wpath = tmp_path / "w.json"
    write_weights(wpath, w)
    with pytest.raises(ValueError, match="not a feature file"):
        read_features(wpath)


def test_config_hash_mismatch_hard_error(corpus):
    features, _ = corpus
    w = identity_weights(24, config_hash="other-config")
    with pytest.raises(ConfigMismatchError):
        check_compatible("synthetic", w)
    q = features["seat-000"]
    with pytest.raises(ConfigMismatchError):
        from stylemetric.metric import distance

        distance(q, features["seat-001"], w)


# ---------------------------------------------------------------------------
# search


def test_search_ranking_properties(corpus):
    features, type_of = corpus
    w = identity_weights(24, config_hash="synthetic")
    res = search_ranking(features, type_of, w, "seat-000", "seat", "identity")
    ids = [mid for mid, _ in res.ranked]
    dists = [d for _, d in res.ranked]
    assert "seat-000" not in ids
    assert set(ids) == {m for m, t in type_of.items() if t == "seat"} - {"seat-000"}
    assert all(dists[i] <= dists[i + 1] for i in range(len(dists) - 1))
    assert res.top(5) == res.ranked[:5]


def test_search_identity_equals_euclidean(corpus):
    features, type_of = corpus
    w = identity_weights(24, config_hash="synthetic")
    res = search_ranking(features, type_of, w, "table-000", "seat", "identity")
    q = features["table-000"].values
    euclid = sorted(
        ((np.linalg.norm(features[m].values - q), m) for m, t in type_of.items() if t == "seat"),
    )
    assert [mid for mid, _ in res.ranked] == [m for _, m in euclid]


def test_search_scaling_invariance(corpus):
    features, type_of = corpus
    w1 = identity_weights(24, config_hash="synthetic")
    w7 = WeightMatrix(shape="diagonal", dim=24, values=np.full(24, 7.0), config_hash="synthetic")
    r1 = search_ranking(features, type_of, w1, "seat-000", "table", "a")
    r7 = search_ranking(features, type_of, w7, "seat-000", "table", "b")
    assert [m for m, _ in r1.ranked] == [m for m, _ in r7.ranked]


def test_search_unknown_query(corpus):
    features, type_of = corpus
    with pytest.raises(KeyError):
        search_ranking(features, type_of, identity_weights(24, "synthetic"), "nope", "seat")


def test_search_tie_break_lexicographic():
    h = "t"
    feats = {
        "q": FeatureVector(model_id="q", config_hash=h, values=np.zeros(2)),
        "bb": FeatureVector(model_id="bb", config_hash=h, values=np.array([1.0, 0.0])),
        "aa": FeatureVector(model_id="aa", config_hash=h, values=np.array([0.0, 1.0])),
    }
    type_of = {"q": "x", "aa": "y", "bb": "y"}
    res = search_ranking(feats, type_of, identity_weights(2, h), "q", "y")
    assert [m for m, _ in res.ranked] == ["aa", "bb"]  # equal distance, id order


# ---------------------------------------------------------------------------
# catalog


def test_catalog_lifecycle(tmp_path, corpus):
    features, type_of = corpus
    cat = Catalog(tmp_path / "cat")
    for mid, t in sorted(type_of.items()):
        cat.add_model(mid, t, cluster="furniture")
    cat.save_manifest()
    with pytest.raises(ValueError, match="duplicate"):
        cat.add_model("seat-000", "seat")

    meta = {mid: {"object_type": t} for mid, t in type_of.items()}
    feat_path = cat.feature_path("default")
    feat_path.parent.mkdir(parents=True, exist_ok=True)
    write_features(feat_path, features, None, meta, [("features", 24)])

    reopened = Catalog(tmp_path / "cat")
    assert len(reopened.models) == len(type_of)
    loaded, _ = reopened.load_features()
    assert set(loaded) == set(features)

    w = identity_weights(24, config_hash="synthetic")
    reopened.save_metric("base", w)
    assert reopened.list_metrics() == ["base"]
    assert np.array_equal(reopened.load_metric("base").values, w.values)

    trips = [TripletRecord(a="seat-000", b="seat-001", c="seat-002")]
    reopened.append_triplets("user-1", trips)
    reopened.append_triplets("user-1", trips)
    assert len(reopened.load_triplets("user-1")) == 2
    assert reopened.list_triplet_sets() == ["user-1"]

    with pytest.raises(FileNotFoundError):
        reopened.load_metric("ghost")
    with pytest.raises(FileNotFoundError):
        reopened.load_triplets("ghost")
    with pytest.raises(FileNotFoundError):
        Catalog(tmp_path / "empty").load_features()
