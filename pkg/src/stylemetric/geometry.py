"""The 13 geometric descriptor blocks (2587 dimensions total).

Histogram blocks are L1-normalized; ranges and bin counts come from
DescriptorConfig so vectors are only comparable under one config.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, fields

import numpy as np
from scipy import ndimage

from .config import GEOMETRY_BLOCKS, DescriptorConfig
from .contours import centroid_distance_signal, fourier_magnitudes
from .mesh_io import Model, PointSample, Silhouette, VoxelGrid, sample_surface, voxelize, project_silhouettes
from .rasterize import render_light_field_views
from .zernike import zernike_magnitudes


class OpenMeshError(ValueError):
    """Raised when too few inward rays hit the surface (open mesh)."""


def _l1(h: np.ndarray) -> np.ndarray:
    s = h.sum()
    return h / s if s > 0 else h


def robust_histogram(values: np.ndarray, bins: int, pct: tuple[float, float] = (1.0, 99.0)) -> np.ndarray:
    """Winsorized histogram over the [pct] percentile range, L1-normalized."""
    values = np.asarray(values, dtype=np.float64)
    values = values[np.isfinite(values)]
    if len(values) == 0:
        return np.zeros(bins)
    lo, hi = np.percentile(values, pct)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    clipped = np.clip(values, lo, hi)
    h, _ = np.histogram(clipped, bins=bins, range=(lo, hi))
    return _l1(h.astype(np.float64))


def fibonacci_sphere(n: int) -> np.ndarray:
    """n near-uniform unit directions (spherical Fibonacci lattice)."""
    i = np.arange(n, dtype=np.float64) + 0.5
    polar = np.arccos(1.0 - 2.0 * i / n)
    azimuth = np.pi * (1.0 + np.sqrt(5.0)) * i
    return np.stack(
        [np.sin(polar) * np.cos(azimuth), np.sin(polar) * np.sin(azimuth), np.cos(polar)],
        axis=1,
    )


# ---------------------------------------------------------------------------
# D2 shape distribution


def compute_shape_distribution(
    s: PointSample,
    bins: int = 128,
    n_pairs: int = 1024 * 1024 // 2,
    seed: int = 11,
    d_max: float | None = None,
) -> np.ndarray:
    """Histogram of random pairwise point distances on [0, bounding-sphere
    diameter], the bounding sphere centered at the origin (model normalized).

    Pass the model's own diameter (2 * max vertex radius) as `d_max` for tight
    bins; corners are then covered exactly rather than up to sampling luck.
    """
    pts = s.points
    n = len(pts)
    if n < 2:
        raise ValueError("shape distribution needs at least 2 points")
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, size=n_pairs)
    # uniform j != i
    j = (i + 1 + rng.integers(0, n - 1, size=n_pairs)) % n
    d = np.linalg.norm(pts[i] - pts[j], axis=1)
    if d_max is None:
        d_max = 2.0 * float(np.linalg.norm(pts, axis=1).max())
    if d_max <= 0:
        h = np.zeros(bins)
        h[0] = 1.0
        return h
    h, _ = np.histogram(np.clip(d, 0.0, d_max), bins=bins, range=(0.0, d_max))
    return _l1(h.astype(np.float64))


# ---------------------------------------------------------------------------
# Curvature histograms


def _mixed_voronoi_areas(verts: np.ndarray, faces: np.ndarray, angles: np.ndarray, areas: np.ndarray) -> np.ndarray:
    """Meyer mixed areas: circumcentric Voronoi cells for non-obtuse faces,
    half/quarter face area at/off the obtuse corner otherwise."""
    n_v = len(verts)
    out = np.zeros(n_v)
    tri = verts[faces]
    sq = np.stack(
        [
            np.sum((tri[:, 2] - tri[:, 1]) ** 2, axis=1),  # edge opposite vertex 0
            np.sum((tri[:, 0] - tri[:, 2]) ** 2, axis=1),
            np.sum((tri[:, 1] - tri[:, 0]) ** 2, axis=1),
        ],
        axis=1,
    )
    cot = 1.0 / np.tan(np.clip(angles, 1e-9, np.pi - 1e-9))
    obtuse = angles > (np.pi / 2 + 1e-12)
    any_obtuse = obtuse.any(axis=1)

    for corner in range(3):
        o1, o2 = (corner + 1) % 3, (corner + 2) % 3
        # Voronoi: (|e_o1|^2 cot(a_o1) + |e_o2|^2 cot(a_o2)) / 8
        voro = (sq[:, o1] * cot[:, o1] + sq[:, o2] * cot[:, o2]) / 8.0
        contrib = np.where(
            any_obtuse,
            np.where(obtuse[:, corner], areas / 2.0, areas / 4.0),
            voro,
        )
        np.add.at(out, faces[:, corner], contrib)
    return out


def _vertex_curvatures(m: Model):
    """Per-vertex (gauss, mean, kmax, kmin) with a validity mask excluding
    boundary and isolated vertices."""
    verts, faces = m.vertices, m.faces
    n_v = len(verts)
    tri = verts[faces]

    e0 = tri[:, 1] - tri[:, 0]
    e1 = tri[:, 2] - tri[:, 1]
    e2 = tri[:, 0] - tri[:, 2]

    def _angle(u, v):
        cu = np.cross(u, v)
        dot = np.einsum("ij,ij->i", u, v)
        return np.arctan2(np.linalg.norm(cu, axis=1), dot)

    angles = np.stack(
        [_angle(e0, -e2), _angle(e1, -e0), _angle(e2, -e1)], axis=1
    )  # at vertices 0,1,2
    areas = m.face_areas()

    angle_sum = np.zeros(n_v)
    for corner in range(3):
        np.add.at(angle_sum, faces[:, corner], angles[:, corner])

    a_mixed = _mixed_voronoi_areas(verts, faces, angles, areas)

    # cotangent Laplacian: edge (i, j) opposite corner k gets cot(angle_k)
    lap = np.zeros((n_v, 3))
    cot = 1.0 / np.tan(np.clip(angles, 1e-9, np.pi - 1e-9))
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        w = cot[:, k][:, None]
        np.add.at(lap, faces[:, i], w * (verts[faces[:, i]] - verts[faces[:, j]]))
        np.add.at(lap, faces[:, j], w * (verts[faces[:, j]] - verts[faces[:, i]]))

    # area-weighted vertex normals for the sign of H
    fnorm = m.face_normals()
    vnorm = np.zeros((n_v, 3))
    for corner in range(3):
        np.add.at(vnorm, faces[:, corner], fnorm * areas[:, None])
    vlen = np.linalg.norm(vnorm, axis=1)
    vnorm = vnorm / np.where(vlen > 1e-30, vlen, 1.0)[:, None]

    safe_area = np.where(a_mixed > 1e-30, a_mixed, 1.0)
    gauss = (2.0 * np.pi - angle_sum) / safe_area
    mean_vec = lap / (2.0 * safe_area)[:, None]
    mean = 0.5 * np.linalg.norm(mean_vec, axis=1)
    sign = np.sign(np.einsum("ij,ij->i", mean_vec, vnorm))
    mean = mean * np.where(sign == 0, 1.0, sign)

    disc = np.sqrt(np.maximum(mean**2 - gauss, 0.0))
    kmax = mean + disc
    kmin = mean - disc

    # validity: attached to >=1 face and not on a boundary edge
    edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    edges = np.sort(edges, axis=1)
    uniq, counts = np.unique(edges, axis=0, return_counts=True)
    boundary_verts = np.unique(uniq[counts != 2])
    attached = np.zeros(n_v, dtype=bool)
    attached[faces.ravel()] = True
    valid = attached & (a_mixed > 1e-30)
    valid[boundary_verts] = False
    if not attached.all():
        warnings.warn(f"{m.id}: {int((~attached).sum())} isolated vertices skipped")
    return gauss, mean, kmax, kmin, valid


def compute_curvature_histograms(
    m: Model, bins: int = 128, pct: tuple[float, float] = (1.0, 99.0)
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Gaussian / mean / max / min principal curvature histograms (angle
    deficit + cotangent Laplacian estimators)."""
    gauss, mean, kmax, kmin, valid = _vertex_curvatures(m)
    if not valid.any():
        zero = np.zeros(bins)
        return zero, zero.copy(), zero.copy(), zero.copy()
    return (
        robust_histogram(gauss[valid], bins, pct),
        robust_histogram(mean[valid], bins, pct),
        robust_histogram(kmax[valid], bins, pct),
        robust_histogram(kmin[valid], bins, pct),
    )


# ---------------------------------------------------------------------------
# Shape diameter function


def _cone_directions(n_rays: int, cone_degrees: float) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic ray directions inside a cone around +Z (before per-point
    rotation), with their angles from the axis."""
    half = np.deg2rad(cone_degrees) / 2.0
    i = np.arange(n_rays, dtype=np.float64) + 0.5
    cos_t = 1.0 - (i / n_rays) * (1.0 - np.cos(half))
    theta = np.arccos(cos_t)
    golden = np.pi * (1.0 + np.sqrt(5.0))
    phi = golden * i
    dirs = np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), cos_t], axis=1
    )
    return dirs, theta


def _basis_from_axis(axis: np.ndarray) -> np.ndarray:
    """(N,3,3) rotation matrices taking +Z to each (unit) axis row."""
    z = axis
    helper = np.where(np.abs(z[:, 2:3]) > 0.9, [[1.0, 0.0, 0.0]], [[0.0, 0.0, 1.0]])
    x = np.cross(helper, z)
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    y = np.cross(z, x)
    return np.stack([x, y, z], axis=2)  # columns are the basis vectors


def cast_rays_min_t(
    origins: np.ndarray, dirs: np.ndarray, m: Model, t_min: float = 1e-9, pair_budget: int = 1 << 22
) -> np.ndarray:
    """Smallest positive hit parameter per ray against all triangles
    (Moller-Trumbore, chunked); inf where nothing is hit.

    Written with explicit float32 component arithmetic: the (rays x
    triangles) blocks dominate extraction time, and avoiding cross/einsum
    temporaries is a ~4x win at desk scale.
    """
    tri = np.asarray(m.vertices[m.faces], dtype=np.float32)
    v0 = np.ascontiguousarray(tri[:, 0].T)  # (3, T)
    e1 = np.ascontiguousarray((tri[:, 1] - tri[:, 0]).T)
    e2 = np.ascontiguousarray((tri[:, 2] - tri[:, 0]).T)
    n_rays = len(origins)
    n_tri = tri.shape[0]
    best = np.full(n_rays, np.inf)
    rows = max(1, pair_budget // max(n_tri, 1))
    for s in range(0, n_rays, rows):
        o = origins[s : s + rows].astype(np.float32)
        d = dirs[s : s + rows].astype(np.float32)
        dx, dy, dz = d[:, 0:1], d[:, 1:2], d[:, 2:3]
        # pvec = d x e2, broadcast (r, T)
        px = dy * e2[2] - dz * e2[1]
        py = dz * e2[0] - dx * e2[2]
        pz = dx * e2[1] - dy * e2[0]
        det = px * e1[0] + py * e1[1] + pz * e1[2]
        ok = np.abs(det) > 1e-12
        inv = np.where(ok, 1.0, 0.0) / np.where(ok, det, 1.0)
        tx = o[:, 0:1] - v0[0]
        ty = o[:, 1:2] - v0[1]
        tz = o[:, 2:3] - v0[2]
        u = (tx * px + ty * py + tz * pz) * inv
        # qvec = tvec x e1
        qx = ty * e1[2] - tz * e1[1]
        qy = tz * e1[0] - tx * e1[2]
        qz = tx * e1[1] - ty * e1[0]
        v = (dx * qx + dy * qy + dz * qz) * inv
        t = (e2[0] * qx + e2[1] * qy + e2[2] * qz) * inv
        hit = ok & (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0) & (t > t_min)
        t = np.where(hit, t, np.inf)
        best[s : s + rows] = t.min(axis=1)
    return best


def _weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    order = np.argsort(values)
    v = values[order]
    w = weights[order]
    cum = np.cumsum(w)
    idx = int(np.searchsorted(cum, 0.5 * cum[-1]))
    return float(v[min(idx, len(v) - 1)])


def compute_shape_diameter(
    m: Model,
    s: PointSample,
    bins: int = 128,
    n_rays: int = 30,
    cone_degrees: float = 60.0,
    min_hit_fraction: float = 0.5,
    point_cap: int = 1024,
) -> np.ndarray:
    """Per-sample local thickness: weighted median of ray lengths cast in a
    cone opposite the surface normal, histogrammed over [0, bbox extent].

    Rays are cast from at most `point_cap` samples (the sample order is
    already random, so the leading subset is unbiased).
    """
    lo, hi = m.bounding_box()
    extent = float((hi - lo).max())
    points = s.points[:point_cap] if point_cap else s.points
    normals = s.normals[: len(points)]
    local_dirs, theta = _cone_directions(n_rays, cone_degrees)
    weights = 1.0 / np.maximum(theta, 1e-6)

    rot = _basis_from_axis(-normals)  # cone axis opposite the normal
    dirs = np.einsum("nij,rj->nri", rot, local_dirs).reshape(-1, 3)
    origins = np.repeat(points, n_rays, axis=0) + dirs * (1e-5 * extent)

    t = cast_rays_min_t(origins, dirs, m, t_min=1e-9).reshape(len(points), n_rays)
    hit = np.isfinite(t)
    hit_fraction = hit.mean()
    if hit_fraction < min_hit_fraction:
        raise OpenMeshError(
            f"{m.id}: only {hit_fraction:.0%} of inward rays hit the surface; mesh looks open"
        )

    sdf = np.array(
        [
            _weighted_median(t[i][hit[i]], np.broadcast_to(weights, (n_rays,))[hit[i]])
            for i in range(len(points))
            if hit[i].any()
        ]
    )
    h, _ = np.histogram(np.clip(sdf, 0.0, extent), bins=bins, range=(0.0, extent))
    return _l1(h.astype(np.float64))


# ---------------------------------------------------------------------------
# Light field descriptor


def compute_light_field(m: Model, config: DescriptorConfig | None = None) -> np.ndarray:
    """10 canonical binary views x (35 Zernike magnitudes + 12 centroid-
    distance Fourier magnitudes) = 470 values in fixed view order."""
    cfg = config or DescriptorConfig()
    views = render_light_field_views(m, cfg.lfd_image_size)
    out = []
    for mask in views:
        zern = zernike_magnitudes(mask, cfg.lfd_zernike_order, skip_dc=True)
        signal = centroid_distance_signal(mask, cfg.sil_boundary_samples)
        four = np.abs(np.fft.rfft(signal))[1 : cfg.lfd_fourier_coeffs + 1] / len(signal)
        if len(four) < cfg.lfd_fourier_coeffs:
            four = np.pad(four, (0, cfg.lfd_fourier_coeffs - len(four)))
        out.append(np.concatenate([zern, four]))
    return np.concatenate(out)


# ---------------------------------------------------------------------------
# Voxel descriptors


def _blurred_gradient(field: np.ndarray, blur: int):
    smooth = ndimage.uniform_filter(field.astype(np.float64), size=blur, mode="constant")
    grads = np.gradient(smooth)
    mag = np.sqrt(sum(g * g for g in grads))
    return grads, mag


def _boundary_voxels(occ: np.ndarray) -> np.ndarray:
    interior = ndimage.binary_erosion(occ, structure=ndimage.generate_binary_structure(3, 1))
    return occ & ~interior


def compute_voxel_descriptors(
    g: VoxelGrid, config: DescriptorConfig | None = None
) -> dict[str, np.ndarray]:
    """Gradient-magnitude histogram (192) and magnitude-weighted gradient
    direction histogram over 128 Fibonacci-lattice directions."""
    cfg = config or DescriptorConfig()
    occ = g.occupancy
    if not occ.any():
        raise ValueError("empty voxel grid")
    grads, mag = _blurred_gradient(occ, cfg.voxel_blur)
    boundary = _boundary_voxels(occ)

    bmag = mag[boundary]
    h_mag, _ = np.histogram(
        np.clip(bmag, 0.0, cfg.voxel_gradient_range),
        bins=cfg.voxel_gradient_bins,
        range=(0.0, cfg.voxel_gradient_range),
    )

    vecs = np.stack([grd[boundary] for grd in grads], axis=1)
    lens = np.linalg.norm(vecs, axis=1)
    keep = lens > 1e-12
    dirs = fibonacci_sphere(cfg.voxel_direction_bins)
    h_dir = np.zeros(cfg.voxel_direction_bins)
    if keep.any():
        unit = vecs[keep] / lens[keep][:, None]
        nearest = np.argmax(unit @ dirs.T, axis=1)
        np.add.at(h_dir, nearest, lens[keep])
    return {
        "gradient": _l1(h_mag.astype(np.float64)),
        "gradient_direction": _l1(h_dir),
    }


# ---------------------------------------------------------------------------
# Silhouette descriptors


def _silhouette_parts(mask: np.ndarray, cfg: DescriptorConfig, seed: int) -> dict[str, np.ndarray]:
    nb = cfg.sil_boundary_samples
    if not mask.any():
        warnings.warn("empty silhouette: zero descriptor sub-blocks")
        return {
            "centroid": np.zeros(nb),
            "fourier": np.zeros(cfg.sil_fourier_coeffs),
            "zernike": np.zeros(len(zernike_magnitudes(np.zeros((2, 2)), cfg.sil_zernike_order))),
            "d2": np.zeros(cfg.sil_d2_bins),
            "gradient": np.zeros(cfg.sil_gradient_bins),
            "gradient_direction": np.zeros(cfg.sil_orientation_bins),
        }

    signal = centroid_distance_signal(mask, nb)
    fourier = fourier_magnitudes(signal, cfg.sil_fourier_coeffs)
    zern = zernike_magnitudes(mask, cfg.sil_zernike_order)

    ys, xs = np.nonzero(mask)
    pix = np.stack([ys, xs], axis=1).astype(np.float64)
    rng = np.random.default_rng(seed)
    n = len(pix)
    if n >= 2:
        i = rng.integers(0, n, size=cfg.sil_d2_pairs)
        j = (i + 1 + rng.integers(0, n - 1, size=cfg.sil_d2_pairs)) % n
        dist = np.linalg.norm(pix[i] - pix[j], axis=1)
    else:
        dist = np.zeros(1)
    diag = np.sqrt(2.0) * mask.shape[0]
    h_d2, _ = np.histogram(np.clip(dist, 0.0, diag), bins=cfg.sil_d2_bins, range=(0.0, diag))

    smooth = ndimage.uniform_filter(mask.astype(np.float64), size=3, mode="constant")
    gy, gx = np.gradient(smooth)
    mag = np.hypot(gy, gx)
    interior = ndimage.binary_erosion(mask, structure=ndimage.generate_binary_structure(2, 1))
    boundary = mask & ~interior
    bmag = mag[boundary]
    h_grad, _ = np.histogram(
        np.clip(bmag, 0.0, cfg.sil_gradient_range),
        bins=cfg.sil_gradient_bins,
        range=(0.0, cfg.sil_gradient_range),
    )
    orient = np.mod(np.arctan2(gy[boundary], gx[boundary]), np.pi)
    h_orient = np.zeros(cfg.sil_orientation_bins)
    if bmag.size:
        idx = np.minimum(
            (orient / np.pi * cfg.sil_orientation_bins).astype(int), cfg.sil_orientation_bins - 1
        )
        np.add.at(h_orient, idx, bmag)

    return {
        "centroid": signal,
        "fourier": fourier,
        "zernike": zern,
        "d2": _l1(h_d2.astype(np.float64)),
        "gradient": _l1(h_grad.astype(np.float64)),
        "gradient_direction": _l1(h_orient),
    }


def compute_silhouette_descriptors(
    sils: tuple[Silhouette, Silhouette, Silhouette] | list[Silhouette],
    config: DescriptorConfig | None = None,
) -> dict[str, np.ndarray]:
    """Per-silhouette sub-blocks concatenated in (x, y, z) order."""
    cfg = config or DescriptorConfig()
    if len(sils) != 3 or [s.axis for s in sils] != ["x", "y", "z"]:
        raise ValueError("expected 3 silhouettes in canonical (x, y, z) order")
    parts = [_silhouette_parts(s.mask, cfg, cfg.sil_d2_seed + k) for k, s in enumerate(sils)]
    return {
        key: np.concatenate([p[key] for p in parts])
        for key in ("centroid", "fourier", "zernike", "d2", "gradient", "gradient_direction")
    }


# ---------------------------------------------------------------------------
# Shape histogram


def compute_shape_histogram(s: PointSample, shells: int = 8, sectors: int = 24) -> np.ndarray:
    """Spherical shell x sector occupancy histogram around the origin."""
    pts = s.points
    if len(pts) < 1:
        raise ValueError("shape histogram needs at least 1 point")
    r = np.linalg.norm(pts, axis=1)
    rmax = r.max()
    if rmax <= 0:
        h = np.zeros(shells * sectors)
        h[0] = 1.0
        return h
    shell = np.minimum((r / rmax * shells).astype(int), shells - 1)
    dirs = fibonacci_sphere(sectors)
    unit = pts / np.where(r > 1e-30, r, 1.0)[:, None]
    sector = np.argmax(unit @ dirs.T, axis=1)
    sector[r <= 1e-30] = 0
    h = np.zeros(shells * sectors)
    np.add.at(h, shell * sectors + sector, 1.0)
    return _l1(h)


# ---------------------------------------------------------------------------
# Assembly


@dataclass
class GeometryBlocks:
    shape_distribution: np.ndarray
    curvature_gauss: np.ndarray
    curvature_mean: np.ndarray
    curvature_max: np.ndarray
    curvature_min: np.ndarray
    shape_diameter: np.ndarray
    light_field: np.ndarray
    voxel_gradient: np.ndarray
    voxel_gradient_direction: np.ndarray
    sil_centroid_distances: np.ndarray
    sil_fourier: np.ndarray
    sil_zernike: np.ndarray
    sil_d2: np.ndarray
    sil_gradient: np.ndarray
    sil_gradient_direction: np.ndarray
    shape_histogram: np.ndarray


def assemble_geometry(blocks: GeometryBlocks) -> np.ndarray:
    """Concatenate blocks in the canonical order; 2587 values."""
    sizes = dict(GEOMETRY_BLOCKS)
    parts = []
    for f in fields(blocks):
        arr = np.asarray(getattr(blocks, f.name), dtype=np.float64)
        if arr.shape != (sizes[f.name],):
            raise ValueError(
                f"block {f.name}: expected length {sizes[f.name]}, got {arr.shape}"
            )
        parts.append(arr)
    return np.concatenate(parts)


def extract_geometry(m: Model, config: DescriptorConfig | None = None) -> GeometryBlocks:
    """Run the full geometric pipeline on a normalized model."""
    cfg = config or DescriptorConfig()
    sample = sample_surface(m, cfg.sample_count, cfg.sample_seed)
    grid = voxelize(m, cfg.voxel_resolution)
    sils = project_silhouettes(grid)

    gauss, mean, kmax, kmin = compute_curvature_histograms(
        m, cfg.curvature_bins, cfg.curvature_percentiles
    )
    voxel = compute_voxel_descriptors(grid, cfg)
    sil = compute_silhouette_descriptors(sils, cfg)
    bounding_diameter = 2.0 * float(np.linalg.norm(m.vertices, axis=1).max())
    return GeometryBlocks(
        shape_distribution=compute_shape_distribution(
            sample, cfg.d2_bins, cfg.d2_pairs, cfg.d2_seed, bounding_diameter
        ),
        curvature_gauss=gauss,
        curvature_mean=mean,
        curvature_max=kmax,
        curvature_min=kmin,
        shape_diameter=compute_shape_diameter(
            m,
            sample,
            cfg.sdf_bins,
            cfg.sdf_rays,
            cfg.sdf_cone_degrees,
            cfg.sdf_min_hit_fraction,
            cfg.sdf_point_cap,
        ),
        light_field=compute_light_field(m, cfg),
        voxel_gradient=voxel["gradient"],
        voxel_gradient_direction=voxel["gradient_direction"],
        sil_centroid_distances=sil["centroid"],
        sil_fourier=sil["fourier"],
        sil_zernike=sil["zernike"],
        sil_d2=sil["d2"],
        sil_gradient=sil["gradient"],
        sil_gradient_direction=sil["gradient_direction"],
        shape_histogram=compute_shape_histogram(sample, cfg.shells, cfg.sectors),
    )
