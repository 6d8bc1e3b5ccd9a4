import numpy as np
import pytest
from PIL import Image
from scipy import ndimage

from stylemetric.mesh_io import (
    MeshLoadError,
    Model,
    load_model,
    load_type_profiles,
    normalize,
    project_silhouettes,
    sample_surface,
    voxelize,
)
from stylemetric.primitives import make_box, write_obj

TRIANGLE_OBJ = """v 0 0 0
v 1 0 0
v 0 1 0
f 1 2 3
"""

QUAD_OBJ = """v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
f 1 2 3 4
"""


def test_load_single_triangle(tmp_path):
    p = tmp_path / "tri.obj"
    p.write_text(TRIANGLE_OBJ)
    m = load_model(p)
    assert len(m.vertices) == 3
    assert len(m.faces) == 1
    assert m.texture_refs == []


def test_quad_split_along_v0_v2(tmp_path):
    p = tmp_path / "quad.obj"
    p.write_text(QUAD_OBJ)
    m = load_model(p)
    assert len(m.faces) == 2
    # both triangles share the (v0, v2) diagonal
    assert set(m.faces[0]) & set(m.faces[1]) == {0, 2}


def test_load_negative_and_slash_indices(tmp_path):
    p = tmp_path / "forms.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3/1/1 -2//2 -1\n")
    m = load_model(p)
    assert np.array_equal(m.faces, [[0, 1, 2]])


def test_texture_resized_to_512(tmp_path):
    img = Image.fromarray(np.full((1024, 1024, 3), 200, dtype=np.uint8))
    img.save(tmp_path / "tex.png")
    (tmp_path / "m.mtl").write_text("newmtl mat\nKd 0.5 0.5 0.5\nmap_Kd tex.png\n")
    (tmp_path / "m.obj").write_text("mtllib m.mtl\n" + TRIANGLE_OBJ.replace("f 1 2 3", "usemtl mat\nf 1 2 3"))
    m = load_model(tmp_path / "m.obj")
    assert len(m.texture_refs) == 1
    assert m.textures[m.texture_refs[0]].pixels.shape == (512, 512, 3)


def test_unreadable_texture_warns_but_loads(tmp_path):
    (tmp_path / "m.mtl").write_text("newmtl mat\nmap_Kd missing.png\n")
    (tmp_path / "m.obj").write_text("mtllib m.mtl\nusemtl mat\n" + TRIANGLE_OBJ)
    with pytest.warns(UserWarning, match="unreadable"):
        m = load_model(tmp_path / "m.obj")
    assert m.texture_refs == []


def test_load_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_model(tmp_path / "nope.obj")
    p = tmp_path / "empty.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\n")
    with pytest.raises(MeshLoadError, match="no faces"):
        load_model(p)
    p2 = tmp_path / "bad.obj"
    p2.write_text("v 0 0 x\nf 1 2 3\n")
    with pytest.raises(MeshLoadError):
        load_model(p2)


def test_face_index_out_of_range():
    with pytest.raises(MeshLoadError, match="out of range"):
        Model(id="m", object_type="", cluster="", vertices=np.zeros((3, 3)), faces=[[0, 1, 5]])


# ---------------------------------------------------------------------------
# normalize


def test_normalize_centers_and_scales():
    m = make_box(center=(5, 5, 5))
    n = normalize(m)
    assert np.allclose(n.vertices.mean(axis=0), 0.0, atol=1e-12)
    assert np.isclose((n.vertices.max(0) - n.vertices.min(0)).max(), 1.0)


def test_normalize_halves_double_cube():
    m = make_box(size=(2, 2, 2))
    n = normalize(m)
    assert np.allclose(n.vertices, m.vertices / 2.0)


def test_normalize_same_profile_same_extent():
    a = normalize(make_box(size=(0.6, 2.4, 1.0)))
    b = normalize(make_box(size=(3.0, 0.5, 0.9)))
    ext_a = (a.vertices.max(0) - a.vertices.min(0)).max()
    ext_b = (b.vertices.max(0) - b.vertices.min(0)).max()
    assert np.isclose(ext_a, ext_b)


def test_normalize_idempotent():
    m = make_box(size=(0.4, 1.7, 0.8), center=(3, -2, 1))
    once = normalize(m)
    twice = normalize(once)
    assert np.allclose(once.vertices, twice.vertices, atol=1e-9)


def test_normalize_profile_rotation(tmp_path):
    profile_file = tmp_path / "profiles.json"
    profile_file.write_text('{"slab": {"up_axis": "+z", "front_axis": "+x", "target_extent": 2.0}}')
    profiles = load_type_profiles(profile_file)
    m = make_box(size=(1.0, 1.0, 0.2), model_id="s", object_type="slab")
    n = normalize(m, profiles)
    extents = n.vertices.max(0) - n.vertices.min(0)
    # the thin axis (+z in the file) must now be +y, and max extent 2.0
    assert np.argmin(extents) == 1
    assert np.isclose(extents.max(), 2.0)


def test_normalize_degenerate_raises():
    flat = Model(
        id="d", object_type="", cluster="",
        vertices=np.zeros((3, 3)), faces=[[0, 1, 2]],
    )
    with pytest.raises(ValueError, match="degenerate"):
        normalize(flat)


def test_normalize_rejects_non_orthogonal_profile():
    m = make_box()
    with pytest.raises(ValueError, match="orthogonal"):
        normalize(m, {"box": {"up_axis": "+y", "front_axis": "-y"}})


# ---------------------------------------------------------------------------
# sample_surface


def test_sampling_deterministic(unit_box):
    s1 = sample_surface(unit_box, 500, seed=9)
    s2 = sample_surface(unit_box, 500, seed=9)
    assert np.array_equal(s1.points, s2.points)
    assert np.array_equal(s1.normals, s2.normals)


def test_sampling_area_weighted():
    # unit square split into two equal triangles
    m = Model(
        id="sq", object_type="", cluster="",
        vertices=[[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]],
        faces=[[0, 1, 2], [0, 2, 3]],
    )
    s = sample_surface(m, 10000, seed=4)
    # points of triangle 0 satisfy x >= y
    n0 = int(np.sum(s.points[:, 0] >= s.points[:, 1]))
    assert abs(n0 - 5000) <= 200


def test_sampling_single_point_on_face(unit_box):
    s = sample_surface(unit_box, 1, seed=0)
    # the point must lie on one of the box planes +-0.5
    dist_to_planes = np.abs(np.abs(s.points[0]) - 0.5).min()
    assert dist_to_planes < 1e-9
    assert np.isclose(np.linalg.norm(s.normals[0]), 1.0, atol=1e-6)


def test_sampling_normals_unit(icosphere3):
    s = sample_surface(icosphere3, 256, seed=2)
    assert np.allclose(np.linalg.norm(s.normals, axis=1), 1.0, atol=1e-6)


# ---------------------------------------------------------------------------
# voxelize / silhouettes


def test_voxelize_default_resolution(unit_box):
    g = voxelize(unit_box)
    assert g.resolution == 300
    assert g.occupancy.shape == (300, 300, 300)


def test_voxelize_min_resolution(unit_box):
    with pytest.raises(ValueError):
        voxelize(unit_box, 4)


def test_voxelize_cube_interior_filled(unit_box):
    g = voxelize(unit_box, 64)
    assert g.solid
    res = g.resolution
    idx = (np.arange(res) + 0.5) * g.cell_size
    centers = np.stack(np.meshgrid(*[idx] * 3, indexing="ij"), axis=-1) + g.origin
    inside = np.all(np.abs(centers) <= 0.5, axis=-1)
    assert g.occupancy[inside].mean() >= 0.9


def test_voxelize_border_empty(unit_box):
    g = voxelize(unit_box, 32)
    occ = g.occupancy
    assert not occ[0].any() and not occ[-1].any()
    assert not occ[:, 0].any() and not occ[:, -1].any()
    assert not occ[:, :, 0].any() and not occ[:, :, -1].any()


def test_voxelize_single_triangle_connected():
    m = Model(
        id="tri", object_type="", cluster="",
        vertices=[[0, 0, 0], [1, 0.2, 0.1], [0.3, 1, 0.7]],
        faces=[[0, 1, 2]],
    )
    g = voxelize(m, 48)
    labels, count = ndimage.label(g.occupancy, structure=np.ones((3, 3, 3)))
    assert count == 1


def test_voxelize_open_mesh_warns_surface_only(flat_patch, caplog):
    import logging

    with caplog.at_level(logging.WARNING):
        g = voxelize(flat_patch, 32)
    assert not g.solid
    assert any("not watertight" in r.message for r in caplog.records)


def test_silhouettes_of_solid_cube(unit_box):
    g = voxelize(unit_box, 64)
    sils = project_silhouettes(g)
    assert [s.axis for s in sils] == ["x", "y", "z"]
    for s in sils:
        ys, xs = np.nonzero(s.mask)
        # projection of a solid cube is a filled rectangle
        filled = s.mask[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1]
        assert filled.all()


def test_silhouette_single_voxel():
    occ = np.zeros((16, 16, 16), dtype=bool)
    occ[5, 7, 9] = True
    from stylemetric.mesh_io import VoxelGrid

    g = VoxelGrid(resolution=16, occupancy=occ, origin=np.zeros(3), cell_size=1.0)
    sx, sy, sz = project_silhouettes(g)
    assert sx.mask.sum() == 1 and sx.mask[7, 9]
    assert sy.mask.sum() == 1 and sy.mask[5, 9]
    assert sz.mask.sum() == 1 and sz.mask[5, 7]


def _l_shape() -> Model:
    a = make_box(size=(1.0, 0.3, 0.25), center=(0, 0, 0))
    b = make_box(size=(0.3, 0.8, 0.25), center=(0.35, 0.55, 0.05))
    verts = np.vstack([a.vertices, b.vertices])
    faces = np.vstack([a.faces, b.faces + len(a.vertices)])
    return Model(id="L", object_type="", cluster="", vertices=verts, faces=faces)


def test_voxelize_axis_permutation_commutes():
    m1 = _l_shape()
    m2 = Model(
        id="Lp", object_type="", cluster="",
        vertices=m1.vertices[:, [1, 2, 0]],  # p' = (p_y, p_z, p_x)
        faces=m1.faces.copy(),
    )
    g1 = voxelize(m1, 48)
    g2 = voxelize(m2, 48)
    # occ2[a,b,c] = occ1[c,a,b]  (new x indexes old y, etc.)
    assert np.array_equal(g2.occupancy, np.transpose(g1.occupancy, (1, 2, 0)))
    s1 = project_silhouettes(g1)
    s2 = project_silhouettes(g2)
    assert np.array_equal(s2[0].mask, s1[1].mask.T)  # new x-sil = old y-sil transposed
    assert np.array_equal(s2[1].mask, s1[2].mask.T)
    assert np.array_equal(s2[2].mask, s1[0].mask)


def test_mirror_grid_silhouettes():
    g1 = voxelize(_l_shape(), 48)
    occ_m = g1.occupancy[::-1, :, :].copy()
    from stylemetric.mesh_io import VoxelGrid

    gm = VoxelGrid(resolution=48, occupancy=occ_m, origin=g1.origin, cell_size=g1.cell_size)
    s1 = project_silhouettes(g1)
    sm = project_silhouettes(gm)
    assert np.array_equal(sm[0].mask, s1[0].mask)  # x-projection unchanged
    assert np.array_equal(sm[1].mask, s1[1].mask[::-1, :])
    assert np.array_equal(sm[2].mask, s1[2].mask[::-1, :])


def test_write_obj_round_trip(tmp_path, icosphere3):
    path = tmp_path / "s.obj"
    write_obj(icosphere3, path)
    m = load_model(path)
    assert len(m.vertices) == len(icosphere3.vertices)
    assert np.array_equal(m.faces, icosphere3.faces)
    assert np.allclose(m.vertices, icosphere3.vertices, atol=1e-8)
