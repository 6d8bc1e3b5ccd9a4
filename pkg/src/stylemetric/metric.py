"""The style distance d(x, y) = sqrt((x-y)^T W (x-y)), its learning from
triplet preferences, and cross-validated evaluation.

Training minimizes the convex logistic triplet loss on squared distances,

    L(W) = sum_t log(1 + exp(d2(a,b) - d2(a,c))) + lambda * Omega(W),

by projected gradient descent with backtracking line search: diagonal weights
are clamped nonnegative, full matrices are projected onto the PSD cone.
Features are standardized per dimension before learning; full-shape metrics
additionally work in a PCA subspace. Both transforms are stored with W.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy.special import expit


class ConfigMismatchError(ValueError):
    """Feature/weight config hashes or dimensions do not match."""


@dataclass
class FeatureVector:
    model_id: str
    config_hash: str
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError(f"{self.model_id}: feature vector must be 1-D")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.model_id}: feature vector contains non-finite values")


@dataclass
class TripletRecord:
    a: str  # reference
    b: str  # closer to a
    c: str  # farther from a
    source: str = "simulated"  # crowd | user | simulated
    pair_types: tuple[str, str] = ("", "")

    def __post_init__(self):
        if self.b == self.c:
            raise ValueError("triplet: b and c must differ")
        self.pair_types = tuple(self.pair_types)  # type: ignore[assignment]


@dataclass
class WeightMatrix:
    shape: str  # "diagonal" | "full"
    dim: int
    values: np.ndarray  # (dim,) or (dim, dim)
    config_hash: str = ""
    mean: np.ndarray | None = None  # standardization, length = raw feature dim
    std: np.ndarray | None = None
    components: np.ndarray | None = None  # (dim, raw_dim) PCA rows, full shape only
    layout: tuple[tuple[str, int], ...] = (("features", 0),)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.shape == "diagonal":
            if self.values.shape != (self.dim,):
                raise ValueError("diagonal weights must be a vector of length dim")
            if np.any(self.values < 0):
                raise ValueError("diagonal weights must be nonnegative")
        elif self.shape == "full":
            if self.values.shape != (self.dim, self.dim):
                raise ValueError("full weights must be dim x dim")
            if not np.allclose(self.values, self.values.T, atol=1e-9):
                raise ValueError("full weight matrix must be symmetric")
            eigmin = float(np.linalg.eigvalsh(self.values).min())
            if eigmin < -1e-8:
                raise ValueError(f"full weight matrix not PSD (min eigenvalue {eigmin:.2e})")
        else:
            raise ValueError(f"unknown weight shape {self.shape!r}")

    def transform(self, values: np.ndarray) -> np.ndarray:
        """Apply the stored standardization (and PCA, full shape) to raw features."""
        v = np.asarray(values, dtype=np.float64)
        if self.mean is not None:
            v = (v - self.mean) / self.std
        if self.components is not None:
            v = v @ self.components.T
        return v


def _check_pair(x: FeatureVector, y: FeatureVector, w: WeightMatrix) -> None:
    if x.values.shape != y.values.shape:
        raise ConfigMismatchError("feature dimensions differ")
    if x.config_hash != y.config_hash:
        raise ConfigMismatchError("feature config hashes differ")
    if w.config_hash and w.config_hash != x.config_hash:
        raise ConfigMismatchError(
            f"metric was trained under config {w.config_hash}, features are {x.config_hash}"
        )


def distance(x: FeatureVector, y: FeatureVector, w: WeightMatrix) -> float:
    """sqrt((x-y)^T W (x-y)) in the metric's standardized space."""
    _check_pair(x, y, w)
    delta = w.transform(x.values) - w.transform(y.values)
    if delta.shape != (w.dim,):
        raise ConfigMismatchError(f"expected dim {w.dim}, got {delta.shape}")
    if w.shape == "diagonal":
        q = float(np.sum(w.values * delta * delta))
    else:
        q = float(delta @ w.values @ delta)
    return float(np.sqrt(max(q, 0.0)))


def distances_to_many(
    query: FeatureVector, others: Iterable[FeatureVector], w: WeightMatrix
) -> np.ndarray:
    """Vectorized distance from one query to many candidates."""
    others = list(others)
    if not others:
        return np.zeros(0)
    for o in others:
        _check_pair(query, o, w)
    qt = w.transform(query.values)
    mat = np.stack([w.transform(o.values) for o in others]) - qt
    if w.shape == "diagonal":
        q = np.sum(w.values * mat * mat, axis=1)
    else:
        q = np.einsum("ni,ij,nj->n", mat, w.values, mat)
    return np.sqrt(np.maximum(q, 0.0))


def predict_triplet(w: WeightMatrix, t: TripletRecord, features: Mapping[str, FeatureVector]) -> bool:
    """True iff a is strictly closer to b than to c; ties count as False."""
    try:
        fa, fb, fc = features[t.a], features[t.b], features[t.c]
    except KeyError as exc:
        raise ValueError(f"triplet references unknown model {exc}") from exc
    return distance(fa, fb, w) < distance(fa, fc, w)


# ---------------------------------------------------------------------------
# Training


@dataclass
class TrainConfig:
    shape: str = "diagonal"
    lam: float = 1e-3
    seed: int = 0
    max_epochs: int = 200
    tol: float = 1e-9
    pca_dim: int = 100
    standardize: bool = True
    init: str = "identity"  # identity | random


def diagonal_loss_grad(w: np.ndarray, g: np.ndarray, lam: float) -> tuple[float, np.ndarray]:
    """Loss and gradient for diagonal weights.

    g rows are (a-b)^2 - (a-c)^2 per triplet, so z = g @ w is the squared
    distance margin d2(a,b) - d2(a,c).
    """
    z = g @ w
    loss = float(np.sum(np.logaddexp(0.0, z))) + lam * float(np.sum(w))
    grad = g.T @ expit(z) + lam
    return loss, grad


def full_loss_grad(w_mat: np.ndarray, u: np.ndarray, v: np.ndarray, lam: float) -> tuple[float, np.ndarray]:
    """Loss and gradient for a full matrix; u, v are the (a-b) and (a-c)
    difference rows in the reduced space. Regularizer is lam * trace(W)."""
    zu = np.einsum("ti,ij,tj->t", u, w_mat, u)
    zv = np.einsum("ti,ij,tj->t", v, w_mat, v)
    z = zu - zv
    loss = float(np.sum(np.logaddexp(0.0, z))) + lam * float(np.trace(w_mat))
    s = expit(z)
    grad = (u.T * s) @ u - (v.T * s) @ v + lam * np.eye(len(w_mat))
    return loss, grad


def project_psd(w_mat: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix: symmetrize and clamp eigenvalues at zero."""
    sym = (w_mat + w_mat.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    vals = np.maximum(vals, 0.0)
    return (vecs * vals) @ vecs.T


def _projected_descent(x0, loss_grad, project, max_epochs, tol):
    x = x0
    loss, grad = loss_grad(x)
    history = [loss]
    step = 1.0 / (1.0 + float(np.abs(grad).max()))
    for _ in range(max_epochs):
        improved = False
        for _ in range(60):
            cand = project(x - step * grad)
            cand_loss, cand_grad = loss_grad(cand)
            if cand_loss <= loss:
                improved = cand_loss < loss - tol * max(1.0, abs(loss))
                x, grad = cand, cand_grad
                loss = cand_loss
                history.append(loss)
                step *= 1.3
                break
            step *= 0.5
        else:
            break  # no descent direction at any step size: converged
        if not improved:
            break
    return x, history


def standardization_params(features: Mapping[str, FeatureVector]) -> tuple[np.ndarray, np.ndarray]:
    mat = np.stack([f.values for f in features.values()])
    mean = mat.mean(axis=0)
    std = mat.std(axis=0)
    std = np.where(std < 1e-12, 1.0, std)
    return mean, std


def train(
    triplets: list[TripletRecord],
    features: Mapping[str, FeatureVector],
    config: TrainConfig | None = None,
    layout: tuple[tuple[str, int], ...] | None = None,
) -> WeightMatrix:
    """Learn W from triplet preferences; deterministic for a fixed config."""
    cfg = config or TrainConfig()
    if not triplets:
        raise ValueError("cannot train on an empty triplet list")
    hashes = {f.config_hash for f in features.values()}
    if len(hashes) > 1:
        raise ConfigMismatchError(f"features carry mixed config hashes: {sorted(hashes)}")
    config_hash = next(iter(hashes)) if hashes else ""

    raw_dim = len(next(iter(features.values())).values)
    if cfg.standardize:
        mean, std = standardization_params(features)
    else:
        mean = np.zeros(raw_dim)
        std = np.ones(raw_dim)

    std_feats: dict[str, np.ndarray] = {
        mid: (f.values - mean) / std for mid, f in features.items()
    }

    def lookup(mid: str) -> np.ndarray:
        try:
            return std_feats[mid]
        except KeyError as exc:
            raise ValueError(f"triplet references unknown model {exc}") from exc

    a = np.stack([lookup(t.a) for t in triplets])
    b = np.stack([lookup(t.b) for t in triplets])
    c = np.stack([lookup(t.c) for t in triplets])

    rng = np.random.default_rng(cfg.seed)
    components = None

    if cfg.shape == "diagonal":
        g = (a - b) ** 2 - (a - c) ** 2
        if cfg.init == "random":
            w0 = rng.random(raw_dim)
        else:
            w0 = np.ones(raw_dim)
        w_vec, history = _projected_descent(
            w0,
            lambda w: diagonal_loss_grad(w, g, cfg.lam),
            lambda w: np.maximum(w, 0.0),
            cfg.max_epochs,
            cfg.tol,
        )
        values: np.ndarray = w_vec
        dim = raw_dim
    elif cfg.shape == "full":
        dim = min(cfg.pca_dim, raw_dim, len(std_feats))
        mat = np.stack(list(std_feats.values()))
        mat = mat - mat.mean(axis=0)
        _, _, vt = np.linalg.svd(mat, full_matrices=False)
        components = vt[:dim]
        # deterministic sign: largest-magnitude entry positive
        for row in components:
            k = int(np.argmax(np.abs(row)))
            if row[k] < 0:
                row *= -1.0
        u = (a - b) @ components.T
        v = (a - c) @ components.T
        if cfg.init == "random":
            r = rng.random((dim, dim))
            w0 = project_psd(r @ r.T / dim)
        else:
            w0 = np.eye(dim)
        values, history = _projected_descent(
            w0,
            lambda w: full_loss_grad(w, u, v, cfg.lam),
            project_psd,
            cfg.max_epochs,
            cfg.tol,
        )
    else:
        raise ValueError(f"unknown shape {cfg.shape!r}")

    if not np.all(np.isfinite(values)):
        raise ValueError("training produced non-finite weights")
    deltas = np.diff(history)
    if len(deltas) and deltas.max() > 1e-9:
        raise AssertionError("training loss increased across an epoch")

    return WeightMatrix(
        shape=cfg.shape,
        dim=dim,
        values=values,
        config_hash=config_hash,
        mean=mean,
        std=std,
        components=components,
        layout=layout or (("features", raw_dim),),
        provenance={
            "triplet_count": len(triplets),
            "optimizer": {
                "loss": "logistic-squared-margin",
                "lam": cfg.lam,
                "max_epochs": cfg.max_epochs,
                "init": cfg.init,
            },
            "seed": cfg.seed,
            "epochs_run": len(history) - 1,
            "final_loss": history[-1],
        },
    )


def cv_accuracy(
    triplets: list[TripletRecord],
    features: Mapping[str, FeatureVector],
    folds: int = 5,
    seed: int = 0,
    config: TrainConfig | None = None,
) -> float:
    """Mean held-out triplet accuracy (percent) over seeded k folds."""
    if len(triplets) < folds:
        raise ValueError(f"need at least {folds} triplets for {folds}-fold CV")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(triplets))
    fold_indices = np.array_split(order, folds)
    accs = []
    for k in range(folds):
        held = set(fold_indices[k].tolist())
        train_set = [triplets[i] for i in range(len(triplets)) if i not in held]
        test_set = [triplets[i] for i in sorted(held)]
        w = train(train_set, features, config)
        correct = sum(predict_triplet(w, t, features) for t in test_set)
        accs.append(correct / len(test_set))
    return float(np.mean(accs) * 100.0)
