import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stylemetric.config import DescriptorConfig
from stylemetric.iterative import make_sparse_oracle, make_synthetic_features, simulate_triplets
from stylemetric.mesh_io import normalize
from stylemetric.primitives import make_box, make_grid_patch, make_icosphere

settings.register_profile(
    "ci", derandomize=True, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ci")

DESK_CONFIG = DescriptorConfig(voxel_resolution=64)


@pytest.fixture(scope="session")
def desk_config():
    return DESK_CONFIG


@pytest.fixture(scope="session")
def icosphere3():
    return make_icosphere(3)


@pytest.fixture(scope="session")
def icosphere4():
    return make_icosphere(4)


@pytest.fixture(scope="session")
def unit_box():
    return normalize(make_box())


@pytest.fixture(scope="session")
def flat_patch():
    return make_grid_patch(20)


@pytest.fixture(scope="session")
def synthetic_setup():
    """Desk-scale metric-recovery corpus: 60 vectors per type, 200 dims,
    hidden sparse metric on 20 dims, plus a zero-noise triplet set."""
    features, type_of = make_synthetic_features(["x", "y"], per_type=60, dim=200, seed=1)
    oracle = make_sparse_oracle(dim=200, informative=20, noise=0.0, seed=1)
    x_ids = sorted(m for m, t in type_of.items() if t == "x")
    y_ids = sorted(m for m, t in type_of.items() if t == "y")
    triplets = simulate_triplets(oracle, features, x_ids, y_ids, ("x", "y"), n_tasks=250, seed=1)
    return {
        "features": features,
        "type_of": type_of,
        "oracle": oracle,
        "x_ids": x_ids,
        "y_ids": y_ids,
        "triplets": triplets,
    }


def uniform_sphere_points(n: int, seed: int, radius: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts * radius
