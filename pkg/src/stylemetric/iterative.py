"""The iterative metric-learning loop, a simulated annotator for desk-scale
verification, and the clustering/subsampling experiment harness.

One loop iteration: generate HIT bundles whose candidate sets are steered by
the current metric, collect (simulated or exported) six-choice responses,
drop HITs failing the control-question check and regenerate until enough are
accepted, expand the accepted responses into triplets, retrain on the whole
pool, and record five-fold CV accuracy. The loop stops once accuracy improves
by less than two percentage points.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol, Sequence

import numpy as np

from .config import PLOT_GROUPS
from .metric import (
    FeatureVector,
    TrainConfig,
    TripletRecord,
    WeightMatrix,
    cv_accuracy,
    distances_to_many,
    train,
)
from .triplets import (
    HitBundle,
    SixChoiceTask,
    TaskResponse,
    expand_six_choice,
    filter_by_controls,
    generate_hit_tasks,
    read_responses,
)


def identity_weights(dim: int, config_hash: str = "", layout=None) -> WeightMatrix:
    return WeightMatrix(
        shape="diagonal",
        dim=dim,
        values=np.ones(dim),
        config_hash=config_hash,
        layout=layout or (("features", dim),),
        provenance={"init": "identity"},
    )


def random_weights(dim: int, seed: int, config_hash: str = "", layout=None) -> WeightMatrix:
    rng = np.random.default_rng(seed)
    return WeightMatrix(
        shape="diagonal",
        dim=dim,
        values=rng.random(dim) + 1e-3,
        config_hash=config_hash,
        layout=layout or (("features", dim),),
        provenance={"init": "random", "seed": seed},
    )


# ---------------------------------------------------------------------------
# Simulated annotator


@dataclass
class AnnotatorOracle:
    w_star: WeightMatrix
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must be in [0, 1]")


def _task_rng(seed: int, task_id: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{task_id}".encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


def simulate_response(
    task: SixChoiceTask, oracle: AnnotatorOracle, features: Mapping[str, FeatureVector]
) -> TaskResponse:
    """Noisy stand-in for a human response: with probability 1-noise pick the
    two candidates closest to the reference under the hidden metric, else a
    uniform random 2-subset. Deterministic given (oracle seed, task id)."""
    for mid in [task.x, *task.candidates]:
        if mid not in features:
            raise ValueError(f"missing features for {mid}")
    rng = _task_rng(oracle.seed, task.task_id)
    if rng.random() < oracle.noise:
        picks = rng.choice(6, size=2, replace=False)
        selected = (task.candidates[picks[0]], task.candidates[picks[1]])
    else:
        dists = distances_to_many(
            features[task.x], [features[c] for c in task.candidates], oracle.w_star
        )
        order = sorted(range(6), key=lambda i: (dists[i], task.candidates[i]))
        selected = (task.candidates[order[0]], task.candidates[order[1]])
    return TaskResponse(task_id=task.task_id, selected=selected, responder_id=f"sim-{oracle.seed}")


class Annotator(Protocol):
    source: str

    def respond(
        self, bundle: HitBundle, features: Mapping[str, FeatureVector]
    ) -> dict[str, TaskResponse]: ...


@dataclass
class OracleAnnotator:
    oracle: AnnotatorOracle
    source: str = "simulated"

    def respond(self, bundle, features):
        return {t.task_id: simulate_response(t, self.oracle, features) for t in bundle.tasks}


@dataclass
class ExportAnnotator:
    """Writes HIT bundles to a directory and polls for a response file
    (`<hit_id>.responses.jsonl`), mirroring an external crowdsourcing run."""

    directory: str | Path
    poll_interval: float = 0.2
    timeout: float = 60.0
    source: str = "crowd"

    def respond(self, bundle, features):
        from .triplets import export_hit_bundle

        directory = Path(self.directory)
        directory.mkdir(parents=True, exist_ok=True)
        export_hit_bundle(directory / f"{bundle.hit_id}.json", bundle)
        response_path = directory / f"{bundle.hit_id}.responses.jsonl"
        deadline = time.monotonic() + self.timeout
        while not response_path.exists():
            if time.monotonic() > deadline:
                raise TimeoutError(f"no response file for HIT {bundle.hit_id} within {self.timeout}s")
            time.sleep(self.poll_interval)
        return read_responses(response_path)


# ---------------------------------------------------------------------------
# Iteration loop


@dataclass
class IterationSetup:
    pair: tuple[str, str]
    features: Mapping[str, FeatureVector]
    x_ids: Sequence[str]
    y_ids: Sequence[str]
    control_pool: Sequence[SixChoiceTask]
    train_config: TrainConfig = field(default_factory=TrainConfig)
    tasks_per_hit: int = 25
    cv_folds: int = 5
    cv_seed: int = 0


@dataclass
class IterationState:
    w_current: WeightMatrix
    iteration: int = 0
    accuracy_history: list[float] = field(default_factory=list)
    triplet_pool: list[TripletRecord] = field(default_factory=list)
    hits_accepted: int = 0
    hits_rejected: int = 0

    def __post_init__(self):
        if len(self.accuracy_history) != self.iteration:
            raise ValueError("accuracy history length must equal iteration count")


def run_iteration(
    state: IterationState,
    setup: IterationSetup,
    annotator: Annotator,
    hits_per_iter: int = 10,
    seed: int = 0,
) -> IterationState:
    """One step of the loop; rejected HITs are regenerated until
    `hits_per_iter` bundles pass the control check."""
    accepted: list[tuple[HitBundle, dict[str, TaskResponse]]] = []
    rejected = 0
    attempt = 0
    max_attempts = hits_per_iter * 200
    while len(accepted) < hits_per_iter:
        if attempt >= max_attempts:
            raise RuntimeError(
                f"{rejected} HITs rejected in a row; annotator too noisy to reach "
                f"{hits_per_iter} accepted HITs"
            )
        bundle = generate_hit_tasks(
            setup.pair,
            setup.features,
            setup.x_ids,
            setup.y_ids,
            setup.control_pool,
            w=state.w_current,
            count=setup.tasks_per_hit,
            seed=int(np.random.default_rng((seed, state.iteration, attempt)).integers(2**31)),
            hit_id=f"it{state.iteration}-s{seed}-a{attempt}",
        )
        attempt += 1
        responses = annotator.respond(bundle, setup.features)
        if filter_by_controls(bundle, responses):
            accepted.append((bundle, responses))
        else:
            rejected += 1

    new_triplets: list[TripletRecord] = []
    for bundle, responses in accepted:
        for task in bundle.regular_tasks:
            new_triplets.extend(expand_six_choice(task, responses[task.task_id], annotator.source))

    pool = state.triplet_pool + new_triplets
    w_new = train(pool, setup.features, setup.train_config, layout=state.w_current.layout)
    acc = cv_accuracy(pool, setup.features, setup.cv_folds, setup.cv_seed, setup.train_config)
    return IterationState(
        w_current=w_new,
        iteration=state.iteration + 1,
        accuracy_history=state.accuracy_history + [acc],
        triplet_pool=pool,
        hits_accepted=state.hits_accepted + len(accepted),
        hits_rejected=state.hits_rejected + rejected,
    )


def run_until_converged(
    setup: IterationSetup,
    annotator: Annotator,
    init: str = "identity",
    init_seed: int = 0,
    max_iters: int = 10,
    hits_per_iter: int = 10,
    seed: int = 0,
    stop_delta: float = 2.0,
) -> tuple[WeightMatrix, IterationState]:
    """Iterate until accuracy improves by less than `stop_delta` percentage
    points (first comparison possible at iteration 2), or `max_iters`."""
    some_feature = next(iter(setup.features.values()))
    dim = len(some_feature.values)
    config_hash = some_feature.config_hash
    if init == "random":
        w0 = random_weights(dim, init_seed, config_hash)
    else:
        w0 = identity_weights(dim, config_hash)
    state = IterationState(w_current=w0)
    while state.iteration < max_iters:
        state = run_iteration(state, setup, annotator, hits_per_iter, seed)
        if state.iteration >= 2:
            improvement = state.accuracy_history[-1] - state.accuracy_history[-2]
            if improvement < stop_delta:
                break
    return state.w_current, state


# ---------------------------------------------------------------------------
# Experiments (clustering, subsampling, weight plots)


def cluster_experiment(
    type_pairs: Sequence[tuple[str, str]],
    clusters: Mapping[str, Sequence[str]],
    triplet_sets: Mapping[tuple[str, str], Sequence[TripletRecord]],
    features: Mapping[str, FeatureVector],
    config: TrainConfig | None = None,
    folds: int = 5,
    seed: int = 0,
) -> dict:
    """Per-type-pair CV matrix plus the cluster-level matrix obtained by
    concatenating member pairs' triplets."""
    for pair in type_pairs:
        if pair not in triplet_sets:
            raise ValueError(f"missing triplet set for pair {pair[0]}->{pair[1]}")

    type_matrix = {
        f"{x}->{y}": cv_accuracy(list(triplet_sets[(x, y)]), features, folds, seed, config)
        for x, y in type_pairs
    }

    cluster_matrix: dict[str, float] = {}
    for cx, x_members in clusters.items():
        for cy, y_members in clusters.items():
            combined: list[TripletRecord] = []
            found = False
            for x in x_members:
                for y in y_members:
                    if (x, y) in triplet_sets:
                        combined.extend(triplet_sets[(x, y)])
                        found = True
            if found and len(combined) >= folds:
                cluster_matrix[f"{cx}->{cy}"] = cv_accuracy(combined, features, folds, seed, config)
    return {"types": type_matrix, "clusters": cluster_matrix}


def render_matrix(matrix: Mapping[str, float], title: str) -> str:
    """Text table of X->Y accuracy cells."""
    rows = sorted({k.split("->")[0] for k in matrix})
    cols = sorted({k.split("->")[1] for k in matrix})
    width = max([len(title)] + [len(c) for c in cols] + [len(r) for r in rows]) + 2
    lines = [title, "".join([" " * width] + [c.rjust(width) for c in cols])]
    for r in rows:
        cells = [
            f"{matrix[f'{r}->{c}']:.2f}".rjust(width) if f"{r}->{c}" in matrix else " " * width
            for c in cols
        ]
        lines.append("".join([r.ljust(width)] + cells))
    return "\n".join(lines)


def subsample_experiment(
    triplets: Sequence[TripletRecord],
    features: Mapping[str, FeatureVector],
    fraction: float = 0.5,
    seed: int = 0,
    config: TrainConfig | None = None,
    folds: int = 5,
    cv_seed: int = 0,
) -> tuple[float, float]:
    """CV accuracy on the full set and on a seeded uniform subsample."""
    if len(triplets) < 20:
        raise ValueError("need at least 20 triplets to subsample")
    n = len(triplets)
    keep = max(folds, int(round(n * fraction)))
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=min(keep, n), replace=False))
    sub = [triplets[i] for i in idx]
    full_acc = cv_accuracy(list(triplets), features, folds, cv_seed, config)
    sub_acc = cv_accuracy(sub, features, folds, cv_seed, config)
    return full_acc, sub_acc


def export_weight_plot_data(w: WeightMatrix, delta: float = 1e-12) -> list[dict]:
    """Log-weight table for diagonal metrics: one row per dimension with its
    feature-block annotation (curvature histograms grouped as one family)."""
    if w.shape != "diagonal":
        raise ValueError("weight plots are defined for diagonal metrics only")
    group_of = {}
    for group, members in PLOT_GROUPS:
        for mname in members:
            group_of[mname] = group
    rows = []
    global_index = 0
    for block, size in w.layout:
        for i in range(size):
            rows.append(
                {
                    "block": block,
                    "group": group_of.get(block, block),
                    "index": i,
                    "global_index": global_index,
                    "log10_weight": float(np.log10(w.values[global_index] + delta)),
                }
            )
            global_index += 1
    if global_index != w.dim:
        raise ValueError(f"layout covers {global_index} dims, metric has {w.dim}")
    return rows


# ---------------------------------------------------------------------------
# Synthetic corpora for desk-scale verification


def make_synthetic_features(
    types: Sequence[str],
    per_type: int = 60,
    dim: int = 200,
    seed: int = 0,
    config_hash: str = "synthetic",
) -> tuple[dict[str, FeatureVector], dict[str, str]]:
    """Gaussian feature vectors for `per_type` models of each type."""
    rng = np.random.default_rng(seed)
    features: dict[str, FeatureVector] = {}
    type_of: dict[str, str] = {}
    for t in types:
        for k in range(per_type):
            mid = f"{t}-{k:03d}"
            features[mid] = FeatureVector(
                model_id=mid, config_hash=config_hash, values=rng.normal(size=dim)
            )
            type_of[mid] = t
    return features, type_of


def make_sparse_oracle(
    dim: int = 200,
    informative: int = 20,
    noise: float = 0.0,
    seed: int = 0,
    config_hash: str = "synthetic",
) -> AnnotatorOracle:
    """Hidden ground-truth metric: sparse diagonal weights on a seeded support."""
    rng = np.random.default_rng(seed)
    support = rng.choice(dim, size=informative, replace=False)
    values = np.zeros(dim)
    values[support] = rng.uniform(0.5, 2.0, size=informative)
    w_star = WeightMatrix(
        shape="diagonal",
        dim=dim,
        values=values,
        config_hash=config_hash,
        provenance={"synthetic_support": sorted(int(s) for s in support)},
    )
    return AnnotatorOracle(w_star=w_star, noise=noise, seed=seed)


def simulate_triplets(
    oracle: AnnotatorOracle,
    features: Mapping[str, FeatureVector],
    x_ids: Sequence[str],
    y_ids: Sequence[str],
    pair: tuple[str, str],
    n_tasks: int,
    seed: int = 0,
) -> list[TripletRecord]:
    """Direct task->response->triplet generation (no HIT bundling), for
    oracle-based evaluation sets: 8 triplets per task."""
    rng = np.random.default_rng(seed)
    out: list[TripletRecord] = []
    for k in range(n_tasks):
        x_id = str(rng.choice(list(x_ids)))
        pool = [y for y in y_ids if y != x_id]
        cands = [str(c) for c in rng.choice(pool, size=6, replace=False)]
        task = SixChoiceTask(task_id=f"sim-{seed}-{k}", x=x_id, candidates=cands, pair_types=pair)
        resp = simulate_response(task, oracle, features)
        out.extend(expand_six_choice(task, resp, source="simulated"))
    return out
