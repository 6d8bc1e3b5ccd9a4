"""Minimal orthographic software rasterizer.

Produces binary silhouette views for the light field descriptor and shaded
PNG thumbnails for the catalog/UI. Views are taken from the 10 non-antipodal
vertices of a regular dodecahedron, in a fixed canonical order.
"""

from __future__ import annotations

import numpy as np

from .mesh_io import Model

_PHI = (1.0 + np.sqrt(5.0)) / 2.0


def dodecahedron_view_directions() -> np.ndarray:
    """10 unit view directions, one per antipodal vertex pair, fixed order."""
    a, b = 1.0, 1.0 / _PHI
    verts = []
    for sx in (1, -1):
        for sy in (1, -1):
            for sz in (1, -1):
                verts.append((sx * a, sy * a, sz * a))
    for s1 in (1, -1):
        for s2 in (1, -1):
            verts.append((0.0, s1 * b, s2 * _PHI))
            verts.append((s1 * b, s2 * _PHI, 0.0))
            verts.append((s1 * _PHI, 0.0, s2 * b))
    verts = np.asarray(verts, dtype=np.float64)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)

    # keep one direction per antipodal pair: lexicographically positive
    keep = []
    for v in verts:
        key = np.round(v, 12)
        if (key[0], key[1], key[2]) > (-key[0], -key[1], -key[2]):
            keep.append(v)
    keep = np.asarray(keep)
    order = np.lexsort((keep[:, 2], keep[:, 1], keep[:, 0]))
    return keep[order]


def view_basis(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right/up vectors orthogonal to the (unit) view direction."""
    d = direction / np.linalg.norm(direction)
    helper = np.array([0.0, 0.0, 1.0])
    if abs(float(np.dot(d, helper))) > 0.999:
        helper = np.array([0.0, 1.0, 0.0])
    right = np.cross(helper, d)
    right /= np.linalg.norm(right)
    up = np.cross(d, right)
    return right, up


def _project(m: Model, direction: np.ndarray, size: int, margin: float = 0.05):
    right, up = view_basis(direction)
    d = direction / np.linalg.norm(direction)
    px = m.vertices @ right
    py = m.vertices @ up
    depth = m.vertices @ d
    lo = np.array([px.min(), py.min()])
    hi = np.array([px.max(), py.max()])
    span = float((hi - lo).max())
    if span <= 1e-30:
        span = 1.0
    pad = span * margin
    scale = (size - 1) / (span + 2 * pad)
    cx = (lo[0] + hi[0]) / 2.0
    cy = (lo[1] + hi[1]) / 2.0
    half = (span + 2 * pad) / 2.0
    sx = (px - (cx - half)) * scale
    sy = (py - (cy - half)) * scale
    return sx, sy, depth


def render_silhouette(m: Model, direction: np.ndarray, size: int = 256) -> np.ndarray:
    """Binary orthographic silhouette of the model along `direction`."""
    sx, sy, _ = _project(m, direction, size)
    mask = np.zeros((size, size), dtype=bool)
    tris = np.stack([sx[m.faces], sy[m.faces]], axis=-1)  # (F, 3, 2)
    for t in range(len(tris)):
        _fill_triangle(mask, tris[t])
    return mask


def _fill_triangle(mask: np.ndarray, tri2d: np.ndarray) -> None:
    size = mask.shape[0]
    x0 = max(0, int(np.floor(tri2d[:, 0].min())))
    x1 = min(size - 1, int(np.ceil(tri2d[:, 0].max())))
    y0 = max(0, int(np.floor(tri2d[:, 1].min())))
    y1 = min(size - 1, int(np.ceil(tri2d[:, 1].max())))
    if x1 < x0 or y1 < y0:
        return
    xs = np.arange(x0, x1 + 1, dtype=np.float64)
    ys = np.arange(y0, y1 + 1, dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    (ax, ay), (bx, by), (cx, cy) = tri2d
    # signed-area barycentrics; dividing by d keeps signs winding-independent
    d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if abs(d) < 1e-30:
        return
    u = ((gx - ax) * (cy - ay) - (gy - ay) * (cx - ax)) / d
    v = ((bx - ax) * (gy - ay) - (by - ay) * (gx - ax)) / d
    inside = (u >= 0) & (v >= 0) & (u + v <= 1)
    # mask rows are y (image row), columns are x
    sub = mask[y0 : y1 + 1, x0 : x1 + 1]
    sub |= inside.T


def render_light_field_views(m: Model, size: int = 256) -> list[np.ndarray]:
    """The 10 canonical binary views used by the light field descriptor."""
    return [render_silhouette(m, d, size) for d in dodecahedron_view_directions()]


def render_thumbnail(m: Model, size: int = 192) -> np.ndarray:
    """Flat-shaded RGB render (painter's algorithm) for catalog thumbnails."""
    direction = np.array([1.0, 1.0, 1.0])
    direction /= np.linalg.norm(direction)
    sx, sy, depth = _project(m, direction, size)
    light = np.array([0.5, 0.7, 0.5])
    light /= np.linalg.norm(light)
    normals = m.face_normals()
    shade = 0.25 + 0.75 * np.abs(normals @ light)

    base = np.array([0.72, 0.72, 0.78])
    if m.material_color is not None:
        base = np.asarray(m.material_color, dtype=np.float64)
    elif m.textures:
        tex = next(iter(m.textures.values()))
        base = tex.pixels.reshape(-1, 3).mean(axis=0) / 255.0

    img = np.full((size, size, 3), 255, dtype=np.uint8)
    zbuf_order = np.argsort(m.vertices[m.faces].mean(axis=1) @ direction)
    tris = np.stack([sx[m.faces], sy[m.faces]], axis=-1)
    for t in zbuf_order:
        tmp = np.zeros((size, size), dtype=bool)
        _fill_triangle(tmp, tris[t])
        color = np.clip(base * shade[t] * 255.0, 0, 255).astype(np.uint8)
        img[tmp] = color
    return img[::-1]  # image rows top-to-bottom
