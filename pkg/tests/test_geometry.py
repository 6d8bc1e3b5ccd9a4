import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from conftest import uniform_sphere_points
from stylemetric.config import GEOMETRY_DIM
from stylemetric.geometry import (
    OpenMeshError,
    assemble_geometry,
    compute_curvature_histograms,
    compute_light_field,
    compute_shape_diameter,
    compute_shape_distribution,
    compute_shape_histogram,
    compute_silhouette_descriptors,
    compute_voxel_descriptors,
    extract_geometry,
    fibonacci_sphere,
)
from stylemetric.mesh_io import Model, PointSample, project_silhouettes, sample_surface, voxelize
from stylemetric.primitives import make_box, make_icosphere


def sphere_sample(n=4096, seed=42, radius=1.0):
    pts = uniform_sphere_points(n, seed, radius)
    return PointSample(points=pts, normals=pts / radius, seed=seed)


# ---------------------------------------------------------------------------
# D2 shape distribution


def test_d2_identical_points_all_mass_in_bin0():
    pts = np.tile([[0.3, 0.1, -0.2]], (64, 1))
    s = PointSample(points=pts, normals=np.tile([[0, 0, 1.0]], (64, 1)), seed=0)
    h = compute_shape_distribution(s)
    assert h[0] == 1.0 and h[1:].sum() == 0.0


def test_d2_needs_two_points():
    s = PointSample(points=[[0, 0, 0]], normals=[[0, 0, 1]], seed=0)
    with pytest.raises(ValueError):
        compute_shape_distribution(s)


def test_d2_sphere_matches_monte_carlo_oracle():
    mine = compute_shape_distribution(sphere_sample())
    # independent oracle: fresh uniform sphere-surface pairs, same binning
    rng = np.random.default_rng(777)
    oracle = np.zeros(128)
    for _ in range(4):
        a = rng.normal(size=(500_000, 3))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        b = rng.normal(size=(500_000, 3))
        b /= np.linalg.norm(b, axis=1, keepdims=True)
        oracle += np.histogram(np.linalg.norm(a - b, axis=1), bins=128, range=(0, 2.0))[0]
    oracle /= oracle.sum()
    assert np.abs(mine - oracle).sum() < 0.05


def test_d2_rotation_invariant():
    s = sphere_sample(1024, seed=5)
    rot = Rotation.from_euler("xyz", [31, -47, 112], degrees=True).as_matrix()
    s_rot = PointSample(points=s.points @ rot.T, normals=s.normals @ rot.T, seed=s.seed)
    h1 = compute_shape_distribution(s)
    h2 = compute_shape_distribution(s_rot)
    assert np.abs(h1 - h2).sum() < 1e-9


# ---------------------------------------------------------------------------
# curvature


def _band_mass(hist, lo, hi, vmin, vmax):
    centers = vmin + (np.arange(len(hist)) + 0.5) * (vmax - vmin) / len(hist)
    return hist[(centers >= lo) & (centers <= hi)].sum()


def test_curvature_sphere_analytic(icosphere4):
    gauss, mean, kmax, kmin = compute_curvature_histograms(icosphere4)
    # all histogram range lies inside +-10% of 1.0 for a unit sphere, so the
    # whole mass must be there; verify via the raw estimates instead
    from stylemetric.geometry import _vertex_curvatures

    g, h, _, _, valid = _vertex_curvatures(icosphere4)
    assert np.all(np.abs(g[valid] - 1.0) < 0.1)
    assert np.all(np.abs(h[valid] - 1.0) < 0.1)
    for block in (gauss, mean, kmax, kmin):
        assert block.shape == (128,)
        assert np.isclose(block.sum(), 1.0, atol=1e-9)


def test_curvature_flat_patch_zero(flat_patch):
    gauss, mean, _, _ = compute_curvature_histograms(flat_patch)
    # interior vertices are flat: angle deficits are exactly zero, so the
    # Gaussian mass sits in the single bin holding 0; the cotangent Laplacian
    # leaves ~1e-15 residue that may straddle two adjacent bins around 0
    assert gauss.max() == 1.0
    nz = np.nonzero(mean)[0]
    assert len(nz) <= 2 and nz.max() - nz.min() <= 1
    assert np.isclose(mean.sum(), 1.0, atol=1e-9)


def test_curvature_isolated_vertex_warns():
    m = Model(
        id="iso", object_type="", cluster="",
        vertices=[[0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 5, 5]],
        faces=[[0, 1, 2]],
    )
    with pytest.warns(UserWarning, match="isolated"):
        compute_curvature_histograms(m)


# ---------------------------------------------------------------------------
# shape diameter


def test_sdf_sphere_diameter(icosphere3):
    s = sample_surface(icosphere3, 2048, seed=1)
    h = compute_shape_diameter(icosphere3, s)
    assert _band_mass(h, 1.9, 2.1, 0.0, 2.0) >= 0.9


def test_sdf_nested_spheres_gap():
    outer = make_icosphere(3, radius=2.0)
    inner = make_icosphere(3, radius=1.0)
    nested = Model(
        id="nested", object_type="", cluster="",
        vertices=np.vstack([outer.vertices, inner.vertices]),
        faces=np.vstack([outer.faces, inner.faces + len(outer.vertices)]),
    )
    s = sample_surface(outer, 512, seed=3)  # outer shell only
    h = compute_shape_diameter(nested, s)
    assert _band_mass(h, 0.9, 1.2, 0.0, 4.0) >= 0.9  # rays stop at the inner shell


def test_sdf_cylinder_dominant_2r():
    from stylemetric.primitives import make_cylinder

    cyl = make_cylinder(radius=0.25, length=2.0)
    s = sample_surface(cyl, 2048, seed=2)
    h = compute_shape_diameter(cyl, s)
    assert _band_mass(h, 0.4, 0.6, 0.0, 2.0) >= 0.75


def test_sdf_open_mesh_errors(flat_patch):
    s = sample_surface(flat_patch, 256, seed=1)
    with pytest.raises(OpenMeshError):
        compute_shape_diameter(flat_patch, s)


# ---------------------------------------------------------------------------
# light field descriptor


def test_lfd_length_and_determinism(icosphere3, desk_config):
    a = compute_light_field(icosphere3, desk_config)
    b = compute_light_field(icosphere3, desk_config)
    assert a.shape == (470,)
    assert np.array_equal(a, b)


def test_lfd_sphere_views_agree(icosphere4, desk_config):
    # every dodecahedral view of a sphere sees the same disc; rasterization
    # leaves sub-pixel boundary differences, hence the 0.02 tolerance
    views = compute_light_field(icosphere4, desk_config).reshape(10, 47)
    spread = np.abs(views - views.mean(axis=0)).max()
    assert spread < 0.02


# ---------------------------------------------------------------------------
# voxel descriptors


def test_voxel_blocks_cube(unit_box, desk_config):
    g = voxelize(unit_box, 64)
    out = compute_voxel_descriptors(g, desk_config)
    assert out["gradient"].shape == (192,)
    assert out["gradient_direction"].shape == (128,)
    for h in out.values():
        assert np.isclose(h.sum(), 1.0, atol=1e-9)

    # the six lattice directions nearest +-x/+-y/+-z dominate: they are the
    # top-6 bins and carry the bulk of the mass (cube edges contribute the
    # legitimate diagonal remainder)
    dirs = fibonacci_sphere(128)
    axes = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float)
    nearest = {int(np.argmax(dirs @ a)) for a in axes}
    h = out["gradient_direction"]
    assert set(np.argsort(h)[-6:]) == nearest
    assert h[list(nearest)].sum() >= 0.70


def test_voxel_gradient_rot90_exact(unit_box, desk_config):
    from stylemetric.mesh_io import VoxelGrid

    g = voxelize(unit_box, 48)
    rot = VoxelGrid(
        resolution=48,
        occupancy=np.rot90(g.occupancy, axes=(0, 1)).copy(),
        origin=g.origin,
        cell_size=g.cell_size,
    )
    h1 = compute_voxel_descriptors(g, desk_config)["gradient"]
    h2 = compute_voxel_descriptors(rot, desk_config)["gradient"]
    assert np.abs(h1 - h2).sum() < 1e-9


def test_voxel_model_rotation_within_tolerance(desk_config):
    m = make_box(size=(1.0, 0.55, 0.3))
    rot = Model(
        id="r", object_type="", cluster="",
        vertices=m.vertices[:, [1, 0, 2]] * np.array([1, -1, 1]),  # 90 deg about z
        faces=m.faces.copy(),
    )
    h1 = compute_voxel_descriptors(voxelize(m, 64), desk_config)["gradient"]
    h2 = compute_voxel_descriptors(voxelize(rot, 64), desk_config)["gradient"]
    assert np.abs(h1 - h2).sum() <= 0.05


def test_voxel_empty_grid_errors(desk_config):
    from stylemetric.mesh_io import VoxelGrid

    g = VoxelGrid(resolution=16, occupancy=np.zeros((16, 16, 16), bool), origin=np.zeros(3), cell_size=1.0)
    with pytest.raises(ValueError):
        compute_voxel_descriptors(g, desk_config)


# ---------------------------------------------------------------------------
# silhouette descriptors


def test_silhouette_block_sizes(unit_box, desk_config):
    sils = project_silhouettes(voxelize(unit_box, 64))
    out = compute_silhouette_descriptors(sils, desk_config)
    assert {k: len(v) for k, v in out.items()} == {
        "centroid": 192,
        "fourier": 57,
        "zernike": 108,
        "d2": 192,
        "gradient": 192,
        "gradient_direction": 96,
    }


def test_silhouette_disc_constant_signal(desk_config):
    from stylemetric.mesh_io import Silhouette

    yy, xx = np.mgrid[0:64, 0:64]
    disc = (yy - 32) ** 2 + (xx - 32) ** 2 <= 24**2
    sils = [Silhouette(axis=a, mask=disc) for a in ("x", "y", "z")]
    out = compute_silhouette_descriptors(sils, desk_config)
    sig = out["centroid"][:64]
    assert sig.std() < 0.02
    fourier = out["fourier"][:19]
    assert fourier[0] / fourier.sum() > 0.98


def test_silhouette_requires_canonical_order(unit_box, desk_config):
    sils = list(project_silhouettes(voxelize(unit_box, 32)))
    with pytest.raises(ValueError):
        compute_silhouette_descriptors(sils[::-1], desk_config)


def test_silhouette_empty_mask_zero_blocks(desk_config):
    from stylemetric.mesh_io import Silhouette

    yy, xx = np.mgrid[0:32, 0:32]
    disc = (yy - 16) ** 2 + (xx - 16) ** 2 <= 8**2
    sils = [
        Silhouette(axis="x", mask=np.zeros((32, 32), bool)),
        Silhouette(axis="y", mask=disc),
        Silhouette(axis="z", mask=disc),
    ]
    with pytest.warns(UserWarning, match="empty silhouette"):
        out = compute_silhouette_descriptors(sils, desk_config)
    assert not out["zernike"][:36].any()
    assert out["zernike"][36:].any()


# ---------------------------------------------------------------------------
# shape histogram


def test_shape_histogram_single_shell():
    # radius 0.55 of rmax 1.0 sits strictly inside shell 4 (no bin-edge ties)
    pts = uniform_sphere_points(2000, seed=9, radius=0.55)
    anchor = np.array([[0.0, 0.0, 1.0]])  # fixes rmax = 1.0
    s = PointSample(points=np.vstack([pts, anchor]), normals=np.vstack([pts * 2, anchor]), seed=9)
    h = compute_shape_histogram(s).reshape(8, 24)
    assert h[4].sum() >= 2000 / 2001 - 1e-9
    assert h[[0, 1, 2, 3, 5, 6]].sum() == 0.0


def test_shape_histogram_sector_uniformity():
    pts = uniform_sphere_points(20000, seed=3, radius=0.9)
    anchor = np.array([[0.0, 0.0, 1.0]])
    s = PointSample(points=np.vstack([pts, anchor]), normals=np.vstack([pts, anchor]), seed=3)
    h = compute_shape_histogram(s).reshape(8, 24)
    sectors = h[7][h[7] > 0]
    # the lone anchor point lands in shell 7 too; drop its sector from the ratio
    pts_sector = h[7] * 20001
    occupied = pts_sector[pts_sector > 2]
    assert occupied.max() / occupied.min() < 1.5
    assert len(h.reshape(-1)) == 192


def test_shape_histogram_block_length(icosphere3):
    s = sample_surface(icosphere3, 512, seed=0)
    assert compute_shape_histogram(s).shape == (192,)


# ---------------------------------------------------------------------------
# assembly


def test_assembly_dimension_contract(unit_box, desk_config):
    blocks = extract_geometry(unit_box, desk_config)
    vec = assemble_geometry(blocks)
    assert vec.shape == (GEOMETRY_DIM,) == (2587,)


def test_assembly_rejects_bad_block(unit_box, desk_config):
    blocks = extract_geometry(unit_box, desk_config)
    blocks.sil_fourier = np.zeros(58)
    with pytest.raises(ValueError, match="sil_fourier"):
        assemble_geometry(blocks)


def test_assembly_identical_blocks_identical_vectors(unit_box, desk_config):
    b1 = extract_geometry(unit_box, desk_config)
    b2 = extract_geometry(unit_box, desk_config)
    assert np.array_equal(assemble_geometry(b1), assemble_geometry(b2))
