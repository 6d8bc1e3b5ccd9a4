"""File formats and the on-disk catalog.

Everything is plain versioned JSON (triplets as JSON-lines) written
atomically via temp-file rename, so experiments stay diffable and
reproducible. Feature and weight files round-trip bit-exactly: floats are
serialized with repr, and serialization is canonical (sorted keys, fixed
separators), so load(save(x)) == x and save(load(f)) == f.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .config import DescriptorConfig
from .metric import ConfigMismatchError, FeatureVector, WeightMatrix, distances_to_many
from .triplets import TripletRecord, read_triplets, write_triplets

SCHEMA_VERSION = 1


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# Feature files


def write_features(
    path: str | Path,
    features: Mapping[str, FeatureVector],
    config: DescriptorConfig | None = None,
    model_meta: Mapping[str, dict] | None = None,
    layout: Iterable[tuple[str, int]] | None = None,
) -> None:
    model_meta = model_meta or {}
    hashes = {fv.config_hash for fv in features.values()}
    if len(hashes) > 1:
        raise ValueError(f"features carry mixed config hashes: {sorted(hashes)}")
    if config is not None:
        config_hash = config.config_hash()
        if hashes and hashes != {config_hash}:
            raise ValueError("feature vectors were extracted under a different config")
    else:
        config_hash = next(iter(hashes)) if hashes else ""
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "features",
        "config_hash": config_hash,
        "config": config.to_dict() if config is not None else None,
        "layout": [list(b) for b in layout] if layout else None,
        "models": {
            mid: {
                "values": [float(v) for v in fv.values],
                **{k: v for k, v in model_meta.get(mid, {}).items() if k != "layout"},
            }
            for mid, fv in features.items()
        },
    }
    _atomic_write_text(Path(path), _canonical_json(payload))


def read_features(path: str | Path) -> tuple[dict[str, FeatureVector], dict]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("kind") != "features":
        raise ValueError(f"{path}: not a feature file")
    config_hash = payload["config_hash"]
    features = {
        mid: FeatureVector(model_id=mid, config_hash=config_hash, values=np.array(rec["values"]))
        for mid, rec in payload["models"].items()
    }
    meta = {k: v for k, v in payload.items() if k != "models"}
    meta["model_meta"] = {
        mid: {k: v for k, v in rec.items() if k != "values"}
        for mid, rec in payload["models"].items()
    }
    return features, meta


# ---------------------------------------------------------------------------
# Weight files


def write_weights(path: str | Path, w: WeightMatrix) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "weights",
        "shape": w.shape,
        "dim": w.dim,
        "config_hash": w.config_hash,
        "values": w.values.tolist(),
        "mean": None if w.mean is None else [float(v) for v in w.mean],
        "std": None if w.std is None else [float(v) for v in w.std],
        "components": None if w.components is None else w.components.tolist(),
        "layout": [list(b) for b in w.layout],
        "provenance": w.provenance,
    }
    _atomic_write_text(Path(path), _canonical_json(payload))


def read_weights(path: str | Path) -> WeightMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("kind") != "weights":
        raise ValueError(f"{path}: not a weight file")
    return WeightMatrix(
        shape=payload["shape"],
        dim=payload["dim"],
        values=np.array(payload["values"]),
        config_hash=payload["config_hash"],
        mean=None if payload["mean"] is None else np.array(payload["mean"]),
        std=None if payload["std"] is None else np.array(payload["std"]),
        components=None if payload["components"] is None else np.array(payload["components"]),
        layout=tuple((b[0], int(b[1])) for b in payload["layout"]),
        provenance=payload.get("provenance", {}),
    )


def check_compatible(features_hash: str, w: WeightMatrix) -> None:
    if w.config_hash != features_hash:
        raise ConfigMismatchError(
            f"metric config hash {w.config_hash!r} does not match features {features_hash!r}"
        )


# ---------------------------------------------------------------------------
# Search


@dataclass
class SearchResult:
    query_id: str
    target_type: str
    metric_id: str
    ranked: list[tuple[str, float]]  # (model_id, distance), non-decreasing

    def top(self, k: int) -> list[tuple[str, float]]:
        return self.ranked[: max(k, 0)]


def search_ranking(
    features: Mapping[str, FeatureVector],
    type_of: Mapping[str, str],
    w: WeightMatrix,
    query_id: str,
    target_type: str,
    metric_id: str = "",
) -> SearchResult:
    """Rank every model of the target type by style distance to the query
    (the query itself excluded); ties break lexicographically by id."""
    if query_id not in features:
        raise KeyError(f"unknown query model {query_id}")
    candidates = sorted(
        mid for mid, t in type_of.items() if t == target_type and mid != query_id and mid in features
    )
    dists = distances_to_many(features[query_id], [features[c] for c in candidates], w)
    order = sorted(range(len(candidates)), key=lambda i: (dists[i], candidates[i]))
    return SearchResult(
        query_id=query_id,
        target_type=target_type,
        metric_id=metric_id,
        ranked=[(candidates[i], float(dists[i])) for i in order],
    )


# ---------------------------------------------------------------------------
# Catalog


class Catalog:
    """A directory of models, feature files, metrics, and triplet sets.

    Layout:
        catalog.json            model metadata (id, object_type, cluster, paths)
        features/<name>.json
        metrics/<id>.json
        triplets/<set_id>.jsonl
        thumbnails/<model_id>.png
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.manifest_path = self.root / "catalog.json"
        if self.manifest_path.exists():
            with open(self.manifest_path, "r", encoding="utf-8") as fh:
                self.manifest = json.load(fh)
        else:
            self.manifest = {"schema_version": SCHEMA_VERSION, "models": []}
        ids = [m["id"] for m in self.manifest["models"]]
        if len(ids) != len(set(ids)):
            raise ValueError("catalog contains duplicate model ids")

    # -- models

    @property
    def models(self) -> list[dict]:
        return self.manifest["models"]

    def model(self, model_id: str) -> dict | None:
        for m in self.models:
            if m["id"] == model_id:
                return m
        return None

    def type_of(self) -> dict[str, str]:
        return {m["id"]: m["object_type"] for m in self.models}

    def add_model(self, model_id: str, object_type: str, cluster: str = "", path: str = "") -> None:
        if self.model(model_id) is not None:
            raise ValueError(f"duplicate model id {model_id}")
        self.models.append(
            {"id": model_id, "object_type": object_type, "cluster": cluster, "path": path}
        )

    def save_manifest(self) -> None:
        _atomic_write_text(self.manifest_path, _canonical_json(self.manifest))

    # -- features

    def feature_path(self, name: str = "default") -> Path:
        return self.root / "features" / f"{name}.json"

    def load_features(self, name: str = "default") -> tuple[dict[str, FeatureVector], dict]:
        path = self.feature_path(name)
        if not path.exists():
            raise FileNotFoundError(f"catalog has no feature file {name!r}")
        return read_features(path)

    # -- metrics

    def metric_path(self, metric_id: str) -> Path:
        return self.root / "metrics" / f"{metric_id}.json"

    def list_metrics(self) -> list[str]:
        d = self.root / "metrics"
        if not d.exists():
            return []
        return sorted(p.stem for p in d.glob("*.json"))

    def save_metric(self, metric_id: str, w: WeightMatrix) -> None:
        write_weights(self.metric_path(metric_id), w)

    def load_metric(self, metric_id: str) -> WeightMatrix:
        path = self.metric_path(metric_id)
        if not path.exists():
            raise FileNotFoundError(f"unknown metric {metric_id!r}")
        return read_weights(path)

    # -- triplet sets

    def triplet_path(self, set_id: str) -> Path:
        return self.root / "triplets" / f"{set_id}.jsonl"

    def list_triplet_sets(self) -> list[str]:
        d = self.root / "triplets"
        if not d.exists():
            return []
        return sorted(p.stem.replace(".jsonl", "") for p in d.glob("*.jsonl"))

    def append_triplets(self, set_id: str, triplets: list[TripletRecord]) -> None:
        path = self.triplet_path(set_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_triplets(path, triplets, append=path.exists())

    def load_triplets(self, set_id: str) -> list[TripletRecord]:
        path = self.triplet_path(set_id)
        if not path.exists():
            raise FileNotFoundError(f"unknown triplet set {set_id!r}")
        return read_triplets(path)

    def thumbnail_path(self, model_id: str) -> Path:
        return self.root / "thumbnails" / f"{model_id}.png"
