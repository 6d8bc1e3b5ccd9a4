"""Descriptor configuration: every bin count, range, seed, and sub-block
factorization lives here, so feature vectors are only comparable under an
identical config (enforced through the config hash embedded in feature files).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass


# Block layout of the full feature vector, in assembly order.
# Geometry first (2587 dims), then appearance (141 dims), total 2728.
GEOMETRY_BLOCKS: tuple[tuple[str, int], ...] = (
    ("shape_distribution", 128),
    ("curvature_gauss", 128),
    ("curvature_mean", 128),
    ("curvature_max", 128),
    ("curvature_min", 128),
    ("shape_diameter", 128),
    ("light_field", 470),
    ("voxel_gradient", 192),
    ("voxel_gradient_direction", 128),
    ("sil_centroid_distances", 192),
    ("sil_fourier", 57),
    ("sil_zernike", 108),
    ("sil_d2", 192),
    ("sil_gradient", 192),
    ("sil_gradient_direction", 96),
    ("shape_histogram", 192),
)

APPEARANCE_BLOCKS: tuple[tuple[str, int], ...] = (
    ("dominant_hsv", 3),
    ("hue_hist", 32),
    ("sat_hist", 32),
    ("val_hist", 32),
    ("lbp", 42),
)

FULL_LAYOUT: tuple[tuple[str, int], ...] = GEOMETRY_BLOCKS + APPEARANCE_BLOCKS

GEOMETRY_DIM = sum(n for _, n in GEOMETRY_BLOCKS)
APPEARANCE_DIM = sum(n for _, n in APPEARANCE_BLOCKS)
FULL_DIM = GEOMETRY_DIM + APPEARANCE_DIM

# Coarse grouping used for weight plots: the four curvature histograms count
# as a single family, giving 13 geometric + 5 appearance groups.
PLOT_GROUPS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("shape_distribution", ("shape_distribution",)),
    ("curvature", ("curvature_gauss", "curvature_mean", "curvature_max", "curvature_min")),
    ("shape_diameter", ("shape_diameter",)),
    ("light_field", ("light_field",)),
    ("voxel_gradient", ("voxel_gradient",)),
    ("voxel_gradient_direction", ("voxel_gradient_direction",)),
    ("sil_centroid_distances", ("sil_centroid_distances",)),
    ("sil_fourier", ("sil_fourier",)),
    ("sil_zernike", ("sil_zernike",)),
    ("sil_d2", ("sil_d2",)),
    ("sil_gradient", ("sil_gradient",)),
    ("sil_gradient_direction", ("sil_gradient_direction",)),
    ("shape_histogram", ("shape_histogram",)),
    ("dominant_hsv", ("dominant_hsv",)),
    ("hue_hist", ("hue_hist",)),
    ("sat_hist", ("sat_hist",)),
    ("val_hist", ("val_hist",)),
    ("lbp", ("lbp",)),
)


def block_slices(layout: tuple[tuple[str, int], ...] = FULL_LAYOUT) -> dict[str, slice]:
    """Map block name -> slice into the concatenated vector."""
    out: dict[str, slice] = {}
    offset = 0
    for name, size in layout:
        out[name] = slice(offset, offset + size)
        offset += size
    return out


@dataclass(frozen=True)
class DescriptorConfig:
    """All tunable constants of the extraction pipeline.

    Defaults produce the documented block sizes exactly. ``voxel_resolution``
    defaults to 300; tests run at desk scale (64).
    """

    schema_version: int = 1

    # surface sampling
    sample_count: int = 2048
    sample_seed: int = 7

    # D2 shape distribution
    d2_bins: int = 128
    d2_pairs: int = 1024 * 1024 // 2
    d2_seed: int = 11

    # curvature histograms
    curvature_bins: int = 128
    curvature_percentiles: tuple[float, float] = (1.0, 99.0)

    # shape diameter function
    sdf_bins: int = 128
    sdf_rays: int = 30
    sdf_cone_degrees: float = 60.0  # full opening angle
    sdf_min_hit_fraction: float = 0.5
    sdf_point_cap: int = 1024  # rays are cast from at most this many samples

    # light field descriptor: 10 views x (35 zernike + 12 fourier) = 470
    lfd_views: int = 10
    lfd_image_size: int = 256
    lfd_zernike_order: int = 10
    lfd_fourier_coeffs: int = 12

    # voxelization
    voxel_resolution: int = 300
    voxel_blur: int = 3
    voxel_gradient_bins: int = 192
    voxel_gradient_range: float = 0.87  # max central-difference magnitude of a [0,1] field
    voxel_direction_bins: int = 128

    # silhouette descriptors (per-silhouette sizes; x3 silhouettes)
    sil_boundary_samples: int = 64
    sil_fourier_coeffs: int = 19
    sil_zernike_order: int = 10  # 36 magnitudes
    sil_d2_bins: int = 64
    sil_d2_pairs: int = 32768
    sil_d2_seed: int = 13
    sil_gradient_bins: int = 64
    sil_gradient_range: float = 0.75
    sil_orientation_bins: int = 32

    # shape histogram: 8 shells x 24 sectors
    shells: int = 8
    sectors: int = 24

    # appearance
    texture_size: int = 512
    dominant_colors: int = 5
    kmeans_iters: int = 20
    kmeans_seed: int = 3
    hsv_bins: int = 32
    lbp_scales: tuple[tuple[int, int], ...] = ((8, 1), (12, 2), (16, 3))

    def config_hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DescriptorConfig":
        d = dict(d)
        for key in ("curvature_percentiles",):
            if key in d and isinstance(d[key], list):
                d[key] = tuple(d[key])
        if "lbp_scales" in d and isinstance(d["lbp_scales"], list):
            d["lbp_scales"] = tuple(tuple(s) for s in d["lbp_scales"])
        return cls(**d)
