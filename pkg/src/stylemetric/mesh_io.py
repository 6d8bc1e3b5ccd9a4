"""Load, normalize, sample, voxelize, and project textured 3D models.

Supports OBJ geometry with optional MTL materials and image textures. All
operations are pure functions of their inputs (plus an explicit seed where
sampling is involved), so per-model work can run concurrently.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

log = logging.getLogger(__name__)

AXIS_VECTORS = {
    "+x": np.array([1.0, 0.0, 0.0]),
    "-x": np.array([-1.0, 0.0, 0.0]),
    "+y": np.array([0.0, 1.0, 0.0]),
    "-y": np.array([0.0, -1.0, 0.0]),
    "+z": np.array([0.0, 0.0, 1.0]),
    "-z": np.array([0.0, 0.0, -1.0]),
}


class MeshLoadError(ValueError):
    """Raised when a mesh file cannot be parsed into a valid model."""


@dataclass
class TextureImage:
    id: str
    pixels: np.ndarray  # (512, 512, 3) uint8

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.shape != (512, 512, 3):
            raise ValueError(f"texture {self.id}: expected 512x512x3, got {self.pixels.shape}")


@dataclass
class Model:
    id: str
    object_type: str
    cluster: str
    vertices: np.ndarray  # (V, 3) float64
    faces: np.ndarray  # (F, 3) int64
    texture_refs: list[str] = field(default_factory=list)
    material_color: np.ndarray | None = None  # RGB in [0,1]
    textures: dict[str, TextureImage] = field(default_factory=dict)
    face_materials: np.ndarray | None = None  # per-face index into material order, -1 = none
    normalized: bool = False

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64)
        self.faces = np.asarray(self.faces, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshLoadError(f"{self.id}: vertices must be (V,3)")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise MeshLoadError(f"{self.id}: faces must be triangles")
        if len(self.vertices) < 3 or len(self.faces) < 1:
            raise MeshLoadError(f"{self.id}: needs >=3 vertices and >=1 face")
        if self.faces.min() < 0 or self.faces.max() >= len(self.vertices):
            raise MeshLoadError(f"{self.id}: face index out of range")

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def face_areas(self) -> np.ndarray:
        tri = self.vertices[self.faces]
        cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def face_normals(self) -> np.ndarray:
        tri = self.vertices[self.faces]
        cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        norms = np.linalg.norm(cross, axis=1)
        safe = np.where(norms > 1e-30, norms, 1.0)
        n = cross / safe[:, None]
        n[norms <= 1e-30] = np.array([0.0, 0.0, 1.0])
        return n

    def is_watertight(self) -> bool:
        """True when every edge is shared by exactly two faces."""
        edges = np.concatenate(
            [self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]]
        )
        edges = np.sort(edges, axis=1)
        _, counts = np.unique(edges, axis=0, return_counts=True)
        return bool(np.all(counts == 2))


@dataclass
class PointSample:
    points: np.ndarray  # (N, 3)
    normals: np.ndarray  # (N, 3) unit
    seed: int

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.normals = np.asarray(self.normals, dtype=np.float64)


@dataclass
class VoxelGrid:
    resolution: int
    occupancy: np.ndarray  # (R, R, R) bool
    origin: np.ndarray  # (3,)
    cell_size: float
    solid: bool = False  # interior filled (watertight input)

    def __post_init__(self):
        self.occupancy = np.asarray(self.occupancy, dtype=bool)
        self.origin = np.asarray(self.origin, dtype=np.float64)


@dataclass
class Silhouette:
    axis: str  # "x" | "y" | "z"
    mask: np.ndarray  # (R, R) bool

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)


# ---------------------------------------------------------------------------
# OBJ / MTL ingestion


def _parse_face_token(tok: str) -> int:
    # forms: v, v/vt, v//vn, v/vt/vn
    return int(tok.split("/")[0])


def _load_texture(path: Path, tex_id: str, size: int = 512) -> TextureImage:
    with Image.open(path) as img:
        img = img.convert("RGB")
        w, h = img.size
        side = min(w, h)
        left = (w - side) // 2
        top = (h - side) // 2
        img = img.crop((left, top, left + side, top + side))
        img = img.resize((size, size), Image.BILINEAR)
        return TextureImage(id=tex_id, pixels=np.asarray(img, dtype=np.uint8))


def _parse_mtl(path: Path) -> dict[str, dict]:
    """Return material name -> {"color": rgb or None, "texture": filename or None}."""
    materials: dict[str, dict] = {}
    current: dict | None = None
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            key = parts[0].lower()
            if key == "newmtl" and len(parts) >= 2:
                current = {"color": None, "texture": None}
                materials[parts[1]] = current
            elif current is not None and key == "kd" and len(parts) >= 4:
                current["color"] = [float(parts[1]), float(parts[2]), float(parts[3])]
            elif current is not None and key == "map_kd" and len(parts) >= 2:
                current["texture"] = parts[-1]
    return materials


def load_model(
    path: str | Path,
    model_id: str | None = None,
    object_type: str = "",
    cluster: str = "",
) -> Model:
    """Load an OBJ file (with optional MTL + textures) into a Model.

    Quads are split along the (v0, v2) diagonal; larger polygons fan around
    v0. Referenced textures are center-cropped to square and resampled to
    512x512. An unreadable texture is skipped with a warning, not fatal.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"mesh file not found: {path}")
    model_id = model_id or path.stem

    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    face_materials: list[int] = []
    mtl_files: list[str] = []
    material_order: list[str] = []
    current_material = -1

    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshLoadError(f"{path}:{lineno}: malformed vertex")
                try:
                    vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
                except ValueError as exc:
                    raise MeshLoadError(f"{path}:{lineno}: {exc}") from exc
            elif tag == "f":
                if len(parts) < 4:
                    raise MeshLoadError(f"{path}:{lineno}: face needs >=3 vertices")
                try:
                    idx = [_parse_face_token(t) for t in parts[1:]]
                except ValueError as exc:
                    raise MeshLoadError(f"{path}:{lineno}: {exc}") from exc
                # OBJ indices are 1-based; negatives are relative to current count
                idx = [i - 1 if i > 0 else len(vertices) + i for i in idx]
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
                    face_materials.append(current_material)
            elif tag == "mtllib" and len(parts) >= 2:
                mtl_files.append(parts[-1])
            elif tag == "usemtl" and len(parts) >= 2:
                name = parts[1]
                if name not in material_order:
                    material_order.append(name)
                current_material = material_order.index(name)

    if not faces:
        raise MeshLoadError(f"{path}: no faces")

    materials: dict[str, dict] = {}
    for mtl_name in mtl_files:
        mtl_path = path.parent / mtl_name
        if mtl_path.exists():
            materials.update(_parse_mtl(mtl_path))
        else:
            warnings.warn(f"{path}: material library {mtl_name} not found, skipped")

    textures: dict[str, TextureImage] = {}
    texture_refs: list[str] = []
    material_texture: list[str | None] = []
    material_color = None
    for name in material_order:
        mat = materials.get(name, {})
        tex_file = mat.get("texture")
        tex_id = None
        if tex_file:
            tex_path = path.parent / tex_file
            tex_id = f"{model_id}:{tex_file}"
            if tex_id not in textures:
                try:
                    textures[tex_id] = _load_texture(tex_path, tex_id)
                    texture_refs.append(tex_id)
                except (OSError, ValueError) as exc:
                    warnings.warn(f"{path}: texture {tex_file} unreadable ({exc}), skipped")
                    tex_id = None
        material_texture.append(tex_id)
        if material_color is None and mat.get("color") is not None:
            material_color = np.clip(np.asarray(mat["color"], dtype=np.float64), 0.0, 1.0)

    model = Model(
        id=model_id,
        object_type=object_type,
        cluster=cluster,
        vertices=np.asarray(vertices, dtype=np.float64),
        faces=np.asarray(faces, dtype=np.int64),
        texture_refs=texture_refs,
        material_color=material_color,
        textures=textures,
        face_materials=np.asarray(face_materials, dtype=np.int64),
    )
    model.material_texture = material_texture  # per-material texture id or None
    return model


# ---------------------------------------------------------------------------
# Type profiles and normalization


DEFAULT_PROFILE = {"up_axis": "+y", "front_axis": "+z", "target_extent": 1.0}


def load_type_profiles(path: str | Path) -> dict[str, dict]:
    import json

    with open(path, "r", encoding="utf-8") as fh:
        profiles = json.load(fh)
    for name, prof in profiles.items():
        for key in ("up_axis", "front_axis"):
            if prof.get(key, "+y") not in AXIS_VECTORS:
                raise ValueError(f"profile {name}: bad axis {prof.get(key)!r}")
    return profiles


def _profile_rotation(up_axis: str, front_axis: str) -> np.ndarray:
    up = AXIS_VECTORS[up_axis]
    front = AXIS_VECTORS[front_axis]
    if abs(float(np.dot(up, front))) > 1e-9:
        raise ValueError(f"up axis {up_axis} and front axis {front_axis} are not orthogonal")
    right = np.cross(up, front)
    # rows map model axes onto +X/+Y/+Z = (right, up, front)
    return np.stack([right, up, front])


def surface_centroid(m: Model) -> np.ndarray:
    """Area-weighted centroid of the triangle surface."""
    tri = m.vertices[m.faces]
    centers = tri.mean(axis=1)
    areas = m.face_areas()
    total = areas.sum()
    if total <= 1e-30:
        return m.vertices.mean(axis=0)
    return (centers * areas[:, None]).sum(axis=0) / total


def normalize(m: Model, type_profile: dict[str, dict] | None = None) -> Model:
    """Orient per the type profile, center the centroid at the origin, and
    scale the largest bounding-box extent to the profile target.

    A model already normalized keeps its orientation (the profile rotation
    describes the raw-file convention), so the operation is idempotent.
    """
    prof = dict(DEFAULT_PROFILE)
    if type_profile:
        prof.update(type_profile.get(m.object_type, {}))

    verts = m.vertices
    if not m.normalized:
        rot = _profile_rotation(prof["up_axis"], prof["front_axis"])
        verts = verts @ rot.T

    lo, hi = verts.min(axis=0), verts.max(axis=0)
    extent = float((hi - lo).max())
    if extent <= 1e-30:
        raise ValueError(f"{m.id}: degenerate model, zero extent")

    centered = verts - surface_centroid(
        Model(
            id=m.id,
            object_type=m.object_type,
            cluster=m.cluster,
            vertices=verts,
            faces=m.faces,
        )
    )
    scale = float(prof.get("target_extent", 1.0)) / extent
    out = Model(
        id=m.id,
        object_type=m.object_type,
        cluster=m.cluster,
        vertices=centered * scale,
        faces=m.faces.copy(),
        texture_refs=list(m.texture_refs),
        material_color=None if m.material_color is None else m.material_color.copy(),
        textures=dict(m.textures),
        face_materials=None if m.face_materials is None else m.face_materials.copy(),
        normalized=True,
    )
    if hasattr(m, "material_texture"):
        out.material_texture = list(m.material_texture)
    return out


# ---------------------------------------------------------------------------
# Surface sampling


def sample_surface(m: Model, n: int, seed: int) -> PointSample:
    """Draw n area-weighted random surface points with their face normals."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    areas = m.face_areas()
    total = areas.sum()
    if total <= 1e-30:
        raise ValueError(f"{m.id}: zero surface area")
    probs = areas / total
    face_idx = rng.choice(len(m.faces), size=n, p=probs)
    r1 = rng.random(n)
    r2 = rng.random(n)
    # uniform barycentric via sqrt trick
    sqrt_r1 = np.sqrt(r1)
    u = 1.0 - sqrt_r1
    v = sqrt_r1 * (1.0 - r2)
    w = sqrt_r1 * r2
    tri = m.vertices[m.faces[face_idx]]
    points = u[:, None] * tri[:, 0] + v[:, None] * tri[:, 1] + w[:, None] * tri[:, 2]
    normals = m.face_normals()[face_idx]
    return PointSample(points=points, normals=normals, seed=seed)


# ---------------------------------------------------------------------------
# Voxelization


def _splat_surface(m: Model, origin: np.ndarray, cell: float, res: int) -> np.ndarray:
    """Mark every voxel containing a surface point sampled on a sub-cell grid."""
    occ = np.zeros((res, res, res), dtype=bool)
    tri = m.vertices[m.faces]
    edge1 = np.linalg.norm(tri[:, 1] - tri[:, 0], axis=1)
    edge2 = np.linalg.norm(tri[:, 2] - tri[:, 0], axis=1)
    edge3 = np.linalg.norm(tri[:, 2] - tri[:, 1], axis=1)
    longest = np.maximum(edge1, np.maximum(edge2, edge3))
    # barycentric subdivision fine enough that the sample spacing is < cell/2
    divisions = np.maximum(1, np.ceil(longest / (cell * 0.45)).astype(int))

    for d in np.unique(divisions):
        sel = tri[divisions == d]
        steps = np.arange(d + 1) / d
        iu, iv = np.meshgrid(steps, steps, indexing="ij")
        keep = iu + iv <= 1.0 + 1e-12
        u = iu[keep]
        v = iv[keep]
        w = 1.0 - u - v
        pts = (
            u[None, :, None] * sel[:, None, 0]
            + v[None, :, None] * sel[:, None, 1]
            + w[None, :, None] * sel[:, None, 2]
        ).reshape(-1, 3)
        ijk = np.floor((pts - origin) / cell).astype(np.int64)
        # geometry fits in [1, res-2] by construction; boundary-plane points
        # can round into the empty border, so clamp into the valid band
        np.clip(ijk, 1, res - 2, out=ijk)
        occ[ijk[:, 0], ijk[:, 1], ijk[:, 2]] = True
    return occ


def _parity_fill(m: Model, origin: np.ndarray, cell: float, res: int) -> np.ndarray:
    """Solid occupancy by x-axis scanline parity through voxel centers."""
    inside = np.zeros((res, res, res), dtype=bool)
    tri = m.vertices[m.faces]
    y_centers = origin[1] + (np.arange(res) + 0.5) * cell
    z_centers = origin[2] + (np.arange(res) + 0.5) * cell
    # tiny deterministic offsets keep rays off triangle edges; distinct
    # irrational-ratio nudges per axis so diagonal shared edges (y=z) are
    # missed too, else a coplanar quad's two triangles both count a crossing
    eps_y = 1e-7 * cell * np.sqrt(2.0)
    eps_z = 1e-7 * cell * np.sqrt(3.0)

    col_ids: list[np.ndarray] = []
    col_xs: list[np.ndarray] = []
    for t in range(len(tri)):
        p0, p1, p2 = tri[t]
        ymin, ymax = min(p0[1], p1[1], p2[1]), max(p0[1], p1[1], p2[1])
        zmin, zmax = min(p0[2], p1[2], p2[2]), max(p0[2], p1[2], p2[2])
        j0 = max(0, int(np.floor((ymin - origin[1]) / cell - 0.5)))
        j1 = min(res - 1, int(np.ceil((ymax - origin[1]) / cell)))
        k0 = max(0, int(np.floor((zmin - origin[2]) / cell - 0.5)))
        k1 = min(res - 1, int(np.ceil((zmax - origin[2]) / cell)))
        if j1 < j0 or k1 < k0:
            continue
        yy, zz = np.meshgrid(
            y_centers[j0 : j1 + 1] + eps_y, z_centers[k0 : k1 + 1] + eps_z, indexing="ij"
        )
        # 2D barycentric test in (y, z)
        d = (p1[1] - p0[1]) * (p2[2] - p0[2]) - (p2[1] - p0[1]) * (p1[2] - p0[2])
        if abs(d) < 1e-30:
            continue  # triangle parallel to the ray
        a = ((yy - p0[1]) * (p2[2] - p0[2]) - (p2[1] - p0[1]) * (zz - p0[2])) / d
        b = ((p1[1] - p0[1]) * (zz - p0[2]) - (yy - p0[1]) * (p1[2] - p0[2])) / d
        hit = (a >= 0) & (b >= 0) & (a + b <= 1)
        if not hit.any():
            continue
        xs = p0[0] + a * (p1[0] - p0[0]) + b * (p2[0] - p0[0])
        jj, kk = np.nonzero(hit)
        col_ids.append((j0 + jj) * res + (k0 + kk))
        col_xs.append(xs[jj, kk])

    if not col_ids:
        return inside
    cols = np.concatenate(col_ids)
    xs_all = np.concatenate(col_xs)
    order = np.lexsort((xs_all, cols))
    cols = cols[order]
    xs_all = xs_all[order]

    x_centers = origin[0] + (np.arange(res) + 0.5) * cell
    run_starts = np.flatnonzero(np.r_[True, cols[1:] != cols[:-1]])
    run_ends = np.r_[run_starts[1:], len(cols)]
    for s, e in zip(run_starts, run_ends):
        if e - s < 2:
            continue
        col = cols[s]
        parity_in = np.searchsorted(xs_all[s:e], x_centers, side="left") % 2 == 1
        inside[:, col // res, col % res] |= parity_in
    return inside


def voxelize(m: Model, resolution: int = 300) -> VoxelGrid:
    """Surface voxelization plus solid interior fill for watertight meshes.

    The bounding box maps inside the grid with at least a 1-voxel empty
    border. Non-watertight meshes fall back to surface-only occupancy with a
    logged warning.
    """
    if resolution < 8:
        raise ValueError("voxel resolution must be >= 8")
    lo, hi = m.bounding_box()
    extent = float((hi - lo).max())
    if extent <= 1e-30:
        raise ValueError(f"{m.id}: degenerate model")
    cell = extent / (resolution - 2)
    center = (lo + hi) / 2.0
    origin = center - (resolution * cell) / 2.0

    occ = _splat_surface(m, origin, cell, resolution)
    if not occ.any():
        raise ValueError(f"{m.id}: voxelization produced empty grid")

    solid = m.is_watertight()
    if solid:
        occ |= _parity_fill(m, origin, cell, resolution)
    else:
        log.warning("%s: mesh not watertight, surface-only voxelization", m.id)

    # border must stay empty for downstream gradients
    occ[0, :, :] = occ[-1, :, :] = False
    occ[:, 0, :] = occ[:, -1, :] = False
    occ[:, :, 0] = occ[:, :, -1] = False
    return VoxelGrid(resolution=resolution, occupancy=occ, origin=origin, cell_size=cell, solid=solid)


def project_silhouettes(g: VoxelGrid) -> tuple[Silhouette, Silhouette, Silhouette]:
    """Project occupancy along x, y, z; a mask bit is the OR along the ray."""
    return (
        Silhouette(axis="x", mask=g.occupancy.any(axis=0)),
        Silhouette(axis="y", mask=g.occupancy.any(axis=1)),
        Silhouette(axis="z", mask=g.occupancy.any(axis=2)),
    )
