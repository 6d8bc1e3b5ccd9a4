"""Six-choice tasks, triplet expansion, control filtering, and persistence.

A six-choice task shows one reference model of type X and six candidates of
type Y; the annotator picks the two candidates most similar in style to the
reference, which expands into eight ordered triplets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .metric import FeatureVector, TripletRecord, WeightMatrix, distances_to_many


@dataclass
class SixChoiceTask:
    task_id: str
    x: str  # reference model id
    candidates: list[str]  # 6 distinct model ids of one type
    pair_types: tuple[str, str] = ("", "")
    is_control: bool = False
    control_answer: tuple[str, str] | None = None  # unordered pair, stored sorted

    def __post_init__(self):
        if len(self.candidates) != 6 or len(set(self.candidates)) != 6:
            raise ValueError(f"task {self.task_id}: needs exactly 6 distinct candidates")
        if self.control_answer is not None:
            self.control_answer = tuple(sorted(self.control_answer))  # type: ignore[assignment]
            if not set(self.control_answer) <= set(self.candidates):
                raise ValueError(f"task {self.task_id}: control answer outside candidates")
        if self.is_control and self.control_answer is None:
            raise ValueError(f"task {self.task_id}: control task without stored answer")


@dataclass
class TaskResponse:
    task_id: str
    selected: tuple[str, str]  # exactly two candidate ids
    responder_id: str = ""

    def __post_init__(self):
        if len(self.selected) != 2 or self.selected[0] == self.selected[1]:
            raise ValueError(f"response to {self.task_id}: select exactly 2 distinct candidates")
        self.selected = tuple(sorted(self.selected))  # type: ignore[assignment]


@dataclass
class HitBundle:
    hit_id: str
    tasks: list[SixChoiceTask]
    pair_types: tuple[str, str]

    def __post_init__(self):
        n_controls = sum(t.is_control for t in self.tasks)
        if len(self.tasks) != 25 or n_controls != 5:
            raise ValueError(
                f"HIT {self.hit_id}: expected 25 tasks with 5 controls, "
                f"got {len(self.tasks)} with {n_controls}"
            )

    @property
    def controls(self) -> list[SixChoiceTask]:
        return [t for t in self.tasks if t.is_control]

    @property
    def regular_tasks(self) -> list[SixChoiceTask]:
        return [t for t in self.tasks if not t.is_control]


def expand_six_choice(task: SixChoiceTask, resp: TaskResponse, source: str = "crowd") -> list[TripletRecord]:
    """Eight triplets: each selected candidate beats each unselected one."""
    selected = set(resp.selected)
    if not selected <= set(task.candidates) or len(selected) != 2:
        raise ValueError(f"response to {task.task_id}: selection is not a 2-subset of candidates")
    unselected = [y for y in task.candidates if y not in selected]
    return [
        TripletRecord(a=task.x, b=y_sel, c=y_un, source=source, pair_types=task.pair_types)
        for y_sel in sorted(selected)
        for y_un in unselected
    ]


def expand_rerank(
    env_model: str,
    ranked: Sequence[str],
    top_k: int = 10,
    object_type: str = "",
    env_type: str = "",
    source: str = "user",
) -> list[TripletRecord]:
    """Triplets from a user ranking: every top-k model beats every other,
    giving exactly top_k * (n - top_k) records (none when n <= top_k)."""
    if len(set(ranked)) != len(ranked):
        raise ValueError("ranking contains duplicate model ids")
    n = len(ranked)
    if n <= top_k:
        return []
    top = ranked[:top_k]
    rest = ranked[top_k:]
    pair = (env_type, object_type)
    return [
        TripletRecord(a=env_model, b=b, c=c, source=source, pair_types=pair)
        for b in top
        for c in rest
    ]


def filter_by_controls(
    bundle: HitBundle, responses: Mapping[str, TaskResponse], threshold: float = 0.8
) -> bool:
    """Accept the HIT iff at least `threshold` of its control questions match
    the stored answers exactly (as unordered pairs)."""
    controls = bundle.controls
    matches = 0
    for task in controls:
        resp = responses.get(task.task_id)
        if resp is None:
            raise ValueError(f"HIT {bundle.hit_id}: missing response for control {task.task_id}")
        if tuple(sorted(resp.selected)) == task.control_answer:
            matches += 1
    return matches / len(controls) >= threshold


# ---------------------------------------------------------------------------
# Task generation


def _pick_candidates(
    x_id: str,
    y_ids: list[str],
    features: Mapping[str, FeatureVector],
    w: WeightMatrix | None,
    rng: np.random.Generator,
) -> list[str]:
    pool = [y for y in y_ids if y != x_id]
    if len(pool) < 6:
        raise ValueError(f"need at least 6 candidate models, have {len(pool)}")
    if w is None:
        chosen = list(rng.choice(pool, size=6, replace=False))
    else:
        dists = distances_to_many(features[x_id], [features[y] for y in pool], w)
        # nearest candidate under the current metric; ties broken by id
        order = sorted(range(len(pool)), key=lambda i: (dists[i], pool[i]))
        nearest = pool[order[0]]
        others = [y for y in pool if y != nearest]
        chosen = [nearest] + list(rng.choice(others, size=5, replace=False))
    perm = rng.permutation(6)
    return [chosen[i] for i in perm]


def build_control_pool(
    pair: tuple[str, str],
    x_ids: Sequence[str],
    y_ids: Sequence[str],
    features: Mapping[str, FeatureVector],
    w_ref: WeightMatrix,
    count: int = 20,
    seed: int = 0,
) -> list[SixChoiceTask]:
    """Curated control tasks whose stored answer is the 2-argmin under a
    reference metric (stand-in for manually chosen control questions)."""
    rng = np.random.default_rng(seed)
    pool: list[SixChoiceTask] = []
    for k in range(count):
        x_id = str(rng.choice(list(x_ids)))
        candidates = _pick_candidates(x_id, list(y_ids), features, None, rng)
        dists = distances_to_many(features[x_id], [features[c] for c in candidates], w_ref)
        order = sorted(range(6), key=lambda i: (dists[i], candidates[i]))
        answer = tuple(sorted([candidates[order[0]], candidates[order[1]]]))
        pool.append(
            SixChoiceTask(
                task_id=f"ctrl-{pair[0]}-{pair[1]}-{k}",
                x=x_id,
                candidates=candidates,
                pair_types=pair,
                is_control=True,
                control_answer=answer,
            )
        )
    return pool


def generate_hit_tasks(
    pair: tuple[str, str],
    features: Mapping[str, FeatureVector],
    x_ids: Sequence[str],
    y_ids: Sequence[str],
    control_pool: Sequence[SixChoiceTask],
    w: WeightMatrix | None = None,
    count: int = 25,
    seed: int = 0,
    hit_id: str | None = None,
) -> HitBundle:
    """One HIT: 25 tasks of which 5 are controls drawn from the control pool.

    Each generated task contains the predicted-nearest candidate under `w`
    (when given) plus five random others, shuffled; with no metric the six
    candidates are uniform random.
    """
    if count % 5 != 0:
        raise ValueError("task count must be a multiple of 5 (1 control per 5 tasks)")
    if len(y_ids) < 7:
        raise ValueError(f"need at least 7 models of type {pair[1]}, have {len(y_ids)}")
    n_controls = count // 5
    if len(control_pool) < n_controls:
        raise ValueError(f"control pool has {len(control_pool)} tasks, need {n_controls}")
    rng = np.random.default_rng(seed)
    hit_id = hit_id or f"hit-{pair[0]}-{pair[1]}-{seed}"

    regular = []
    for k in range(count - n_controls):
        x_id = str(rng.choice(list(x_ids)))
        candidates = _pick_candidates(x_id, list(y_ids), features, w, rng)
        regular.append(
            SixChoiceTask(
                task_id=f"{hit_id}-t{k}",
                x=x_id,
                candidates=candidates,
                pair_types=pair,
            )
        )
    controls = [control_pool[i] for i in rng.choice(len(control_pool), size=n_controls, replace=False)]
    # deterministic interleave: controls at seeded positions
    tasks: list[SixChoiceTask] = list(regular)
    positions = sorted(rng.choice(count, size=n_controls, replace=False))
    for pos, ctrl in zip(positions, controls):
        tasks.insert(pos, ctrl)
    return HitBundle(hit_id=hit_id, tasks=tasks, pair_types=pair)


# ---------------------------------------------------------------------------
# Persistence: one JSON record per line, stable field order


def write_triplets(path: str | Path, triplets: Sequence[TripletRecord], append: bool = False) -> None:
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8") as fh:
        for t in triplets:
            rec = {
                "a": t.a,
                "b": t.b,
                "c": t.c,
                "source": t.source,
                "pair_types": list(t.pair_types),
            }
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_triplets(path: str | Path) -> list[TripletRecord]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(
                TripletRecord(
                    a=rec["a"],
                    b=rec["b"],
                    c=rec["c"],
                    source=rec.get("source", "crowd"),
                    pair_types=tuple(rec.get("pair_types", ("", ""))),
                )
            )
    return out


def write_control_pool(path: str | Path, pool: Sequence[SixChoiceTask]) -> None:
    """Persist curated control tasks (with answers) as a JSON file."""
    payload = {
        "schema_version": 1,
        "kind": "control_pool",
        "tasks": [
            {
                "task_id": t.task_id,
                "x": t.x,
                "candidates": list(t.candidates),
                "pair_types": list(t.pair_types),
                "control_answer": list(t.control_answer or ()),
            }
            for t in pool
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)


def read_control_pool(path: str | Path) -> list[SixChoiceTask]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("kind") != "control_pool":
        raise ValueError(f"{path}: not a control pool file")
    return [
        SixChoiceTask(
            task_id=t["task_id"],
            x=t["x"],
            candidates=list(t["candidates"]),
            pair_types=tuple(t["pair_types"]),
            is_control=True,
            control_answer=tuple(t["control_answer"]),
        )
        for t in payload["tasks"]
    ]


def export_hit_bundle(path: str | Path, bundle: HitBundle, thumbnail_dir: str = "thumbnails") -> None:
    """Write a HIT bundle as structured JSON for an external annotator or the
    companion UI; image references point at pre-rendered thumbnails."""
    payload = {
        "schema_version": 1,
        "hit_id": bundle.hit_id,
        "pair_types": list(bundle.pair_types),
        "tasks": [
            {
                "task_id": t.task_id,
                "x": t.x,
                "x_image": f"{thumbnail_dir}/{t.x}.png",
                "candidates": list(t.candidates),
                "candidate_images": [f"{thumbnail_dir}/{c}.png" for c in t.candidates],
                "is_control": t.is_control,
            }
            for t in bundle.tasks
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)


def read_responses(path: str | Path) -> dict[str, TaskResponse]:
    """Response file: one JSON record {task_id, selected, responder_id} per line."""
    out: dict[str, TaskResponse] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            resp = TaskResponse(
                task_id=rec["task_id"],
                selected=tuple(rec["selected"]),
                responder_id=rec.get("responder_id", ""),
            )
            out[resp.task_id] = resp
    return out
