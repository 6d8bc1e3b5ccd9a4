"""Color and texture descriptors: dominant HSV, per-channel HSV histograms,
and multi-scale rotation-invariant uniform local binary patterns (141 dims)."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .config import APPEARANCE_BLOCKS, DescriptorConfig
from .mesh_io import TextureImage


def _l1(h: np.ndarray) -> np.ndarray:
    s = h.sum()
    return h / s if s > 0 else h


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Vectorized RGB -> HSV, all channels in [0, 1] (H in [0, 1))."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    delta = maxc - minc
    v = maxc
    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    safe = np.where(delta > 0, delta, 1.0)
    h = np.zeros_like(maxc)
    h = np.where(maxc == r, ((g - b) / safe) % 6.0, h)
    h = np.where((maxc == g) & (g != r), (b - r) / safe + 2.0, h)
    h = np.where((maxc == b) & (b != r) & (b != g), (r - g) / safe + 4.0, h)
    h = np.where(delta > 0, h / 6.0, 0.0)
    return np.stack([h % 1.0, s, v], axis=-1)


def _weighted_kmeans(colors: np.ndarray, counts: np.ndarray, k: int, iters: int, seed: int):
    """Lloyd iterations over unique colors weighted by pixel counts
    (numerically identical to k-means over all pixels), k-means++ init."""
    rng = np.random.default_rng(seed)
    n = len(colors)
    base_p = counts / counts.sum()
    centers = np.empty((k, 3))
    centers[0] = colors[rng.choice(n, p=base_p)]
    d2min = ((colors - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        scores = d2min * counts
        total = scores.sum()
        if total <= 0:
            centers[c] = colors[rng.choice(n, p=base_p)]
        else:
            centers[c] = colors[rng.choice(n, p=scores / total)]
            d2min = np.minimum(d2min, ((colors - centers[c]) ** 2).sum(axis=1))

    assign = np.zeros(n, dtype=int)
    for _ in range(iters):
        d2 = ((colors[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
        assign = np.argmin(d2, axis=1)
        for c in range(k):
            sel = assign == c
            w = counts[sel]
            if w.sum() > 0:
                centers[c] = (colors[sel] * w[:, None]).sum(axis=0) / w.sum()
    cluster_w = np.array([counts[assign == c].sum() for c in range(k)], dtype=np.float64)
    return centers, cluster_w / cluster_w.sum()


def _circular_hue_mean(hues: np.ndarray, weights: np.ndarray) -> float:
    ang = hues * 2.0 * np.pi
    x = float(np.sum(weights * np.cos(ang)))
    y = float(np.sum(weights * np.sin(ang)))
    if x * x + y * y < 1e-24:
        return 0.0
    return float(np.arctan2(y, x) / (2.0 * np.pi) % 1.0)


def compute_dominant_hsv(t: TextureImage, config: DescriptorConfig | None = None) -> np.ndarray:
    """Pixel-count-weighted average HSV of the top five k-means colors."""
    cfg = config or DescriptorConfig()
    pixels = t.pixels.reshape(-1, 3)
    colors, counts = np.unique(pixels, axis=0, return_counts=True)
    centers, weights = _weighted_kmeans(
        colors.astype(np.float64) / 255.0,
        counts.astype(np.float64),
        cfg.dominant_colors,
        cfg.kmeans_iters,
        cfg.kmeans_seed,
    )
    hsv = rgb_to_hsv(np.clip(centers, 0.0, 1.0))
    h = _circular_hue_mean(hsv[:, 0], weights)
    s = float(np.sum(weights * hsv[:, 1]))
    v = float(np.sum(weights * hsv[:, 2]))
    return np.array([h, s, v])


def compute_hsv_histograms(t: TextureImage, bins: int = 32) -> np.ndarray:
    """Hue/saturation/value histograms (hue weighted by saturation), each
    L1-normalized, concatenated to 96 values."""
    hsv = rgb_to_hsv(t.pixels.reshape(-1, 3).astype(np.float64) / 255.0)
    h, s, v = hsv[:, 0], hsv[:, 1], hsv[:, 2]

    def _bin(x):
        return np.minimum((x * bins).astype(int), bins - 1)

    hue_hist = np.zeros(bins)
    np.add.at(hue_hist, _bin(h), s)  # achromatic pixels contribute only their S
    sat_hist = np.bincount(_bin(s), minlength=bins).astype(np.float64)
    val_hist = np.bincount(_bin(v), minlength=bins).astype(np.float64)
    return np.concatenate([_l1(hue_hist), _l1(sat_hist), _l1(val_hist)])


def _luma(pixels: np.ndarray) -> np.ndarray:
    p = pixels.astype(np.float64)
    return 0.299 * p[..., 0] + 0.587 * p[..., 1] + 0.114 * p[..., 2]


def _bilinear_shifted(gray: np.ndarray, dy: float, dx: float, margin: int) -> np.ndarray:
    """gray sampled at (i+dy, j+dx) for every (i, j) in the margin-inset
    region, via bilinear interpolation with fixed fractional offsets."""
    h, w = gray.shape
    y0 = int(np.floor(dy))
    x0 = int(np.floor(dx))
    fy = dy - y0
    fx = dx - x0

    def sub(oy, ox):
        return gray[margin + oy : h - margin + oy, margin + ox : w - margin + ox]

    return (
        (1 - fy) * (1 - fx) * sub(y0, x0)
        + (1 - fy) * fx * sub(y0, x0 + 1)
        + fy * (1 - fx) * sub(y0 + 1, x0)
        + fy * fx * sub(y0 + 1, x0 + 1)
    )


def lbp_riu2_histogram(gray: np.ndarray, p: int, r: int) -> np.ndarray:
    """Rotation-invariant uniform LBP histogram: P+2 bins, L1-normalized.

    Neighbors strictly greater than the center set a bit, so constant regions
    map to the all-zero pattern (bin 0).
    """
    margin = int(np.ceil(r)) + 1
    if gray.shape[0] <= 2 * margin or gray.shape[1] <= 2 * margin:
        out = np.zeros(p + 2)
        out[0] = 1.0
        return out
    center = gray[margin:-margin, margin:-margin]
    bits = np.empty((p,) + center.shape, dtype=bool)
    for k in range(p):
        ang = 2.0 * np.pi * k / p
        dy = -r * np.sin(ang)
        dx = r * np.cos(ang)
        val = _bilinear_shifted(gray, dy, dx, margin)
        bits[k] = (val - center) > 1e-7
    ones = bits.sum(axis=0)
    transitions = (bits != np.roll(bits, 1, axis=0)).sum(axis=0)
    codes = np.where(transitions <= 2, ones, p + 1)
    hist = np.bincount(codes.ravel(), minlength=p + 2).astype(np.float64)
    return _l1(hist)


def compute_lbp(t: TextureImage, scales: tuple[tuple[int, int], ...] = ((8, 1), (12, 2), (16, 3))) -> np.ndarray:
    """Multi-scale riu2 LBP on the luma channel: (8+2)+(12+2)+(16+2) = 42."""
    gray = _luma(t.pixels)
    return np.concatenate([lbp_riu2_histogram(gray, p, r) for p, r in scales])


@dataclass
class AppearanceBlocks:
    dominant_hsv: np.ndarray  # 3
    hue_hist: np.ndarray  # 32
    sat_hist: np.ndarray  # 32
    val_hist: np.ndarray  # 32
    lbp: np.ndarray  # 42

    def concat(self) -> np.ndarray:
        sizes = dict(APPEARANCE_BLOCKS)
        parts = []
        for f in fields(self):
            arr = np.asarray(getattr(self, f.name), dtype=np.float64)
            if arr.shape != (sizes[f.name],):
                raise ValueError(f"block {f.name}: expected length {sizes[f.name]}, got {arr.shape}")
            parts.append(arr)
        return np.concatenate(parts)


def compute_appearance(t: TextureImage, config: DescriptorConfig | None = None) -> AppearanceBlocks:
    cfg = config or DescriptorConfig()
    hsv_hists = compute_hsv_histograms(t, cfg.hsv_bins)
    b = cfg.hsv_bins
    return AppearanceBlocks(
        dominant_hsv=compute_dominant_hsv(t, cfg),
        hue_hist=hsv_hists[:b],
        sat_hist=hsv_hists[b : 2 * b],
        val_hist=hsv_hists[2 * b :],
        lbp=compute_lbp(t, cfg.lbp_scales),
    )


def combine_textures(
    blocks: list[AppearanceBlocks],
    weights: np.ndarray | None = None,
    lbp_scales: tuple[tuple[int, int], ...] = ((8, 1), (12, 2), (16, 3)),
) -> AppearanceBlocks:
    """Coverage-weighted combination: histograms averaged then re-normalized
    (the LBP block per scale, since each scale is its own histogram),
    dominant HSV averaged (circularly for hue)."""
    if not blocks:
        raise ValueError("no appearance blocks to combine")
    if weights is None:
        weights = np.full(len(blocks), 1.0 / len(blocks))
    weights = np.asarray(weights, dtype=np.float64)
    if len(weights) != len(blocks) or abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError("weights must match blocks and sum to 1")

    def avg(name):
        return sum(w * np.asarray(getattr(b, name)) for w, b in zip(weights, blocks))

    lbp = avg("lbp")
    offset = 0
    for p, _ in lbp_scales:
        lbp[offset : offset + p + 2] = _l1(lbp[offset : offset + p + 2])
        offset += p + 2

    doms = np.stack([b.dominant_hsv for b in blocks])
    h = _circular_hue_mean(doms[:, 0], weights)
    s = float(np.sum(weights * doms[:, 1]))
    v = float(np.sum(weights * doms[:, 2]))
    return AppearanceBlocks(
        dominant_hsv=np.array([h, s, v]),
        hue_hist=_l1(avg("hue_hist")),
        sat_hist=_l1(avg("sat_hist")),
        val_hist=_l1(avg("val_hist")),
        lbp=lbp,
    )


def solid_texture(rgb01: np.ndarray | tuple[float, float, float], tex_id: str = "solid", size: int = 512) -> TextureImage:
    """Synthetic solid-color texture (fallback for untextured models)."""
    rgb = np.clip(np.asarray(rgb01, dtype=np.float64), 0.0, 1.0)
    pixels = np.tile((rgb * 255.0).round().astype(np.uint8), (size, size, 1))
    return TextureImage(id=tex_id, pixels=pixels)
