"""HTTP/JSON API backing style search and the user-guided labeling tools.

All writes go through the catalog's atomic file primitives; triplet sets are
append-only; training is serialized (one job per catalog at a time) so no
request can observe a half-written metric.
"""

from __future__ import annotations

import hashlib
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse
from pydantic import BaseModel, Field

from .iterative import export_weight_plot_data
from .metric import ConfigMismatchError, TrainConfig, TripletRecord, train
from .storage import Catalog, search_ranking
from .triplets import SixChoiceTask, TaskResponse, expand_rerank, expand_six_choice


class RerankRequest(BaseModel):
    env_model: str
    ranked_ids: list[str]
    user: str = "anonymous"


class SixChoiceSubmission(BaseModel):
    selected: list[str] = Field(min_length=2, max_length=2)
    user: str = "anonymous"


class TrainRequest(BaseModel):
    triplet_sets: list[str] = []
    base: str = "combined"  # crowd | user | combined
    shape: str = "diagonal"
    seed: int = 0


class ServiceState:
    def __init__(self, catalog_dir: str | Path, feature_file: str = "default"):
        self.catalog = Catalog(catalog_dir)
        self.features, self.feature_meta = self.catalog.load_features(feature_file)
        self.type_of = self.catalog.type_of()
        if not self.type_of:
            self.type_of = {
                mid: rec.get("object_type", "")
                for mid, rec in self.feature_meta.get("model_meta", {}).items()
            }
        layout = self.feature_meta.get("layout")
        self.layout = tuple((b[0], int(b[1])) for b in layout) if layout else None
        self.pending_tasks: dict[str, SixChoiceTask] = {}
        self.write_lock = threading.Lock()
        self.train_lock = threading.Lock()
        self.counter = 0

    def next_id(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}-{self.counter:04d}"


def _source_matches(record: TripletRecord, base: str) -> bool:
    if base == "combined":
        return True
    if base == "crowd":
        return record.source in ("crowd", "simulated")
    if base == "user":
        return record.source == "user"
    raise HTTPException(422, f"unknown training base {base!r}")


def create_app(catalog_dir: str | Path, feature_file: str = "default") -> FastAPI:
    state = ServiceState(catalog_dir, feature_file)
    app = FastAPI(title="stylemetric", version="0.1.0")
    app.state.service = state
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def _require_model(model_id: str) -> None:
        if model_id not in state.features:
            raise HTTPException(404, f"unknown model {model_id!r}")

    def _load_metric(metric_id: str):
        try:
            w = state.catalog.load_metric(metric_id)
        except FileNotFoundError as exc:
            raise HTTPException(404, str(exc)) from exc
        some = next(iter(state.features.values()))
        if w.config_hash != some.config_hash:
            raise HTTPException(
                409,
                f"metric {metric_id!r} was trained under config {w.config_hash!r}; "
                f"catalog features are {some.config_hash!r}",
            )
        return w

    @app.get("/models")
    def list_models(type: str | None = None):  # noqa: A002 (query name fixed by the API)
        entries = []
        for mid in sorted(state.features):
            otype = state.type_of.get(mid, "")
            if type is not None and otype != type:
                continue
            thumb = state.catalog.thumbnail_path(mid)
            entries.append(
                {
                    "id": mid,
                    "object_type": otype,
                    "cluster": (state.catalog.model(mid) or {}).get("cluster", ""),
                    "thumbnail": f"/thumbnails/{mid}.png" if thumb.exists() else None,
                }
            )
        return {"models": entries}

    @app.get("/metrics")
    def list_metrics():
        return {"metrics": state.catalog.list_metrics()}

    @app.get("/search")
    def search(
        query: str,
        type: str,  # noqa: A002
        metric: str,
        k: int = Query(default=0, ge=0),
    ):
        _require_model(query)
        w = _load_metric(metric)
        result = search_ranking(state.features, state.type_of, w, query, type, metric)
        ranked = result.ranked if k == 0 else result.top(k)
        return {
            "query_id": result.query_id,
            "target_type": result.target_type,
            "metric_id": result.metric_id,
            "total": len(result.ranked),
            "ranked": [{"model_id": mid, "distance": dist} for mid, dist in ranked],
        }

    @app.post("/rerank")
    def rerank(req: RerankRequest):
        _require_model(req.env_model)
        if len(set(req.ranked_ids)) != len(req.ranked_ids):
            raise HTTPException(422, "ranking contains duplicate ids")
        for mid in req.ranked_ids:
            _require_model(mid)
        types = {state.type_of.get(mid, "") for mid in req.ranked_ids}
        if len(types) != 1:
            raise HTTPException(422, "ranking must cover models of exactly one object type")
        target_type = next(iter(types))
        expected = {m for m, t in state.type_of.items() if t == target_type and m != req.env_model}
        if set(req.ranked_ids) != expected:
            raise HTTPException(
                422,
                f"ranking must be a permutation of all {len(expected)} models of type "
                f"{target_type!r} (got {len(req.ranked_ids)})",
            )
        triplets = expand_rerank(
            req.env_model,
            req.ranked_ids,
            object_type=target_type,
            env_type=state.type_of.get(req.env_model, ""),
        )
        with state.write_lock:
            set_id = state.next_id(f"rerank-{req.user}")
            state.catalog.append_triplets(set_id, triplets)
            from .storage import _atomic_write_text, _canonical_json

            _atomic_write_text(
                state.catalog.root / "rankings" / f"{set_id}.json",
                _canonical_json(
                    {
                        "env_model": req.env_model,
                        "target_type": target_type,
                        "ranked_ids": req.ranked_ids,
                        "user": req.user,
                    }
                ),
            )
        return {"triplet_set": set_id, "triplet_count": len(triplets)}

    @app.get("/sixchoice/next")
    def sixchoice_next(pairX: str, pairY: str, seed: int | None = None):
        x_ids = sorted(m for m, t in state.type_of.items() if t == pairX)
        y_ids = sorted(m for m, t in state.type_of.items() if t == pairY)
        if not x_ids or len(y_ids) < 7:
            raise HTTPException(404, f"not enough models for pair {pairX!r} -> {pairY!r}")
        with state.write_lock:
            task_seed = seed if seed is not None else state.counter
            pair_key = int.from_bytes(
                hashlib.sha256(f"{pairX}->{pairY}".encode()).digest()[:4], "big"
            )
            rng = np.random.default_rng((pair_key, task_seed))
            x_id = str(rng.choice(x_ids))
            pool = [y for y in y_ids if y != x_id]
            cands = [str(c) for c in rng.choice(pool, size=6, replace=False)]
            task = SixChoiceTask(
                task_id=state.next_id("task"),
                x=x_id,
                candidates=cands,
                pair_types=(pairX, pairY),
            )
            state.pending_tasks[task.task_id] = task
        return {
            "task_id": task.task_id,
            "x": task.x,
            "x_thumbnail": f"/thumbnails/{task.x}.png",
            "candidates": task.candidates,
            "candidate_thumbnails": [f"/thumbnails/{c}.png" for c in task.candidates],
            "pair_types": list(task.pair_types),
        }

    @app.post("/sixchoice/{task_id}")
    def sixchoice_submit(task_id: str, sub: SixChoiceSubmission):
        task = state.pending_tasks.get(task_id)
        if task is None:
            raise HTTPException(404, f"unknown or already-answered task {task_id!r}")
        if len(set(sub.selected)) != 2 or not set(sub.selected) <= set(task.candidates):
            raise HTTPException(422, "selection must be 2 distinct candidate ids")
        resp = TaskResponse(task_id=task_id, selected=tuple(sub.selected), responder_id=sub.user)
        triplets = expand_six_choice(task, resp, source="user")
        with state.write_lock:
            set_id = f"sixchoice-{sub.user}"
            state.catalog.append_triplets(set_id, triplets)
            del state.pending_tasks[task_id]
            total = len(state.catalog.load_triplets(set_id))
        return {"triplet_set": set_id, "triplet_count": len(triplets), "total_stored": total}

    @app.get("/train/status")
    def train_status():
        return {"busy": state.train_lock.locked()}

    @app.post("/train")
    def train_metric(req: TrainRequest):
        if req.base not in ("crowd", "user", "combined"):
            raise HTTPException(422, f"unknown base {req.base!r}")
        if req.shape not in ("diagonal", "full"):
            raise HTTPException(422, f"unknown shape {req.shape!r}")
        set_ids = req.triplet_sets or state.catalog.list_triplet_sets()
        records: list[TripletRecord] = []
        for sid in set_ids:
            try:
                records.extend(state.catalog.load_triplets(sid))
            except FileNotFoundError as exc:
                raise HTTPException(404, str(exc)) from exc
        records = [r for r in records if _source_matches(r, req.base)]
        if not records:
            raise HTTPException(422, "no triplets match the requested base/sets")
        if not state.train_lock.acquire(blocking=False):
            raise HTTPException(409, "a training job is already running for this catalog")
        try:
            cfg = TrainConfig(shape=req.shape, seed=req.seed)
            try:
                w = train(records, state.features, cfg, layout=state.layout)
            except ConfigMismatchError as exc:
                raise HTTPException(409, str(exc)) from exc
            with state.write_lock:
                metric_id = state.next_id(req.base)
                while metric_id in state.catalog.list_metrics():
                    metric_id = state.next_id(req.base)
                w.provenance["triplet_sets"] = sorted(set_ids)
                w.provenance["base"] = req.base
                state.catalog.save_metric(metric_id, w)
        finally:
            state.train_lock.release()
        return {"metric_id": metric_id, "triplet_count": len(records)}

    @app.get("/metrics/{metric_id}")
    def metric_detail(metric_id: str):
        w = _load_metric(metric_id)
        payload = {
            "metric_id": metric_id,
            "shape": w.shape,
            "dim": w.dim,
            "config_hash": w.config_hash,
            "provenance": w.provenance,
            "layout": [list(b) for b in w.layout],
        }
        if w.shape == "diagonal":
            payload["values"] = w.values.tolist()
            payload["plot_data"] = export_weight_plot_data(w)
        return payload

    @app.get("/thumbnails/{model_id}.png")
    def thumbnail(model_id: str):
        path = state.catalog.thumbnail_path(model_id)
        if not path.exists():
            raise HTTPException(404, f"no thumbnail for {model_id!r}")
        return FileResponse(path, media_type="image/png")

    return app
