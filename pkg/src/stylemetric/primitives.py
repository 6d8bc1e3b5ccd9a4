"""Synthetic mesh primitives and a small OBJ/MTL demo corpus.

Used by the test suite and by `stylemetric demo-corpus`; real corpora are any
OBJ+MTL collection laid out as <object_type>/<model>.obj.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .mesh_io import Model


def make_box(
    size: tuple[float, float, float] = (1.0, 1.0, 1.0),
    center: tuple[float, float, float] = (0.0, 0.0, 0.0),
    model_id: str = "box",
    object_type: str = "box",
) -> Model:
    sx, sy, sz = (s / 2.0 for s in size)
    cx, cy, cz = center
    verts = np.array(
        [
            [cx - sx, cy - sy, cz - sz],
            [cx + sx, cy - sy, cz - sz],
            [cx + sx, cy + sy, cz - sz],
            [cx - sx, cy + sy, cz - sz],
            [cx - sx, cy - sy, cz + sz],
            [cx + sx, cy - sy, cz + sz],
            [cx + sx, cy + sy, cz + sz],
            [cx - sx, cy + sy, cz + sz],
        ]
    )
    # outward-wound quads split along (v0, v2)
    quads = [
        (0, 3, 2, 1),  # -z
        (4, 5, 6, 7),  # +z
        (0, 1, 5, 4),  # -y
        (2, 3, 7, 6),  # +y
        (1, 2, 6, 5),  # +x
        (0, 4, 7, 3),  # -x
    ]
    faces = []
    for a, b, c, d in quads:
        faces.append([a, b, c])
        faces.append([a, c, d])
    return Model(
        id=model_id, object_type=object_type, cluster="", vertices=verts, faces=np.array(faces)
    )


def make_icosphere(subdivisions: int = 3, radius: float = 1.0, model_id: str = "sphere") -> Model:
    """Unit icosphere by repeated edge-midpoint subdivision, outward winding."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [np.asarray(v, dtype=np.float64) for v in verts]
    verts = [v / np.linalg.norm(v) for v in verts]

    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                m /= np.linalg.norm(m)
                verts.append(m)
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces

    vertices = np.stack(verts) * radius
    return Model(
        id=model_id,
        object_type="sphere",
        cluster="",
        vertices=vertices,
        faces=np.asarray(faces, dtype=np.int64),
    )


def make_cylinder(
    radius: float = 0.25, length: float = 2.0, segments: int = 48, model_id: str = "cylinder"
) -> Model:
    """Closed cylinder along +Z with triangulated caps."""
    ang = 2 * np.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)
    bottom = np.column_stack([ring, np.full(segments, -length / 2)])
    top = np.column_stack([ring, np.full(segments, length / 2)])
    verts = np.vstack([bottom, top, [[0, 0, -length / 2]], [[0, 0, length / 2]]])
    cb, ct = 2 * segments, 2 * segments + 1
    faces = []
    for i in range(segments):
        j = (i + 1) % segments
        faces += [[i, j, segments + i], [j, segments + j, segments + i]]
        faces += [[cb, j, i], [ct, segments + i, segments + j]]
    return Model(
        id=model_id, object_type="cylinder", cluster="", vertices=verts, faces=np.asarray(faces)
    )


def make_grid_patch(n: int = 20, model_id: str = "patch") -> Model:
    """Flat square grid in the XY plane (open mesh; boundary vertices exist)."""
    xs = np.linspace(-0.5, 0.5, n)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    verts = np.stack([gx.ravel(), gy.ravel(), np.zeros(n * n)], axis=1)
    faces = []
    for i in range(n - 1):
        for j in range(n - 1):
            a = i * n + j
            b = a + 1
            c = a + n
            d = c + 1
            faces += [[a, b, c], [b, d, c]]
    return Model(
        id=model_id, object_type="patch", cluster="", vertices=verts, faces=np.asarray(faces)
    )


# ---------------------------------------------------------------------------
# OBJ/MTL writers and the demo corpus


def write_obj(
    m: Model,
    path: str | Path,
    mtl_name: str | None = None,
    texture_file: str | None = None,
    kd: tuple[float, float, float] | None = None,
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if mtl_name:
        lines.append(f"mtllib {path.stem}.mtl")
    for v in m.vertices:
        lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
    if mtl_name:
        lines.append(f"usemtl {mtl_name}")
    for f in m.faces:
        lines.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    if mtl_name:
        mtl_lines = [f"newmtl {mtl_name}"]
        if kd is not None:
            mtl_lines.append(f"Kd {kd[0]:.6g} {kd[1]:.6g} {kd[2]:.6g}")
        if texture_file:
            mtl_lines.append(f"map_Kd {texture_file}")
        (path.parent / f"{path.stem}.mtl").write_text("\n".join(mtl_lines) + "\n", encoding="utf-8")


def _texture_pixels(kind: str, rgb: tuple[int, int, int], size: int = 64) -> np.ndarray:
    base = np.zeros((size, size, 3), dtype=np.uint8)
    r, g, b = rgb
    if kind == "solid":
        base[:] = rgb
    elif kind == "stripes":
        for i in range(size):
            base[i, :] = rgb if (i // 8) % 2 == 0 else (r // 3, g // 3, b // 3)
    elif kind == "checker":
        for i in range(size):
            for j in range(size):
                base[i, j] = rgb if ((i // 8) + (j // 8)) % 2 == 0 else (255 - r, 255 - g, 255 - b)
    return base


def build_demo_corpus(root: str | Path, per_type: int = 8, seed: int = 0) -> Path:
    """Small textured OBJ corpus: boxes and spheres with varied proportions,
    colors, and texture patterns, laid out as <type>/<id>.obj."""
    rng = np.random.default_rng(seed)
    root = Path(root)
    palettes = [(200, 60, 40), (40, 160, 60), (50, 80, 200), (220, 180, 60)]
    kinds = ["solid", "stripes", "checker"]
    for t, builder in (("box", make_box), ("sphere", make_icosphere)):
        for k in range(per_type):
            mid = f"{t}{k:02d}"
            if t == "box":
                size = tuple(0.4 + 0.8 * rng.random(3))
                model = make_box(size=size, model_id=mid, object_type=t)
            else:
                model = make_icosphere(2, radius=0.4 + 0.3 * rng.random(), model_id=mid)
            rgb = palettes[k % len(palettes)]
            kind = kinds[k % len(kinds)]
            tex_name = f"{mid}.png"
            obj_path = root / t / f"{mid}.obj"
            obj_path.parent.mkdir(parents=True, exist_ok=True)
            Image.fromarray(_texture_pixels(kind, rgb)).save(obj_path.parent / tex_name)
            write_obj(model, obj_path, mtl_name="mat0", texture_file=tex_name, kd=tuple(c / 255 for c in rgb))
    return root
