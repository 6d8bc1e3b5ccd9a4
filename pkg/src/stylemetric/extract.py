"""Full feature extraction: model file -> normalized model -> 2728-dim vector."""

from __future__ import annotations

import numpy as np

from .appearance import AppearanceBlocks, combine_textures, compute_appearance, solid_texture
from .config import FULL_DIM, FULL_LAYOUT, DescriptorConfig
from .geometry import assemble_geometry, extract_geometry
from .mesh_io import Model, normalize
from .metric import FeatureVector

NEUTRAL_GRAY = (0.5, 0.5, 0.5)


def texture_area_weights(m: Model) -> tuple[list[str], np.ndarray]:
    """Texture ids with surface-area coverage fractions from the per-face
    material assignment; uniform when no assignment exists."""
    tex_ids = list(m.texture_refs)
    if not tex_ids:
        return [], np.zeros(0)
    if m.face_materials is None or not hasattr(m, "material_texture"):
        return tex_ids, np.full(len(tex_ids), 1.0 / len(tex_ids))

    areas = m.face_areas()
    by_tex = {tid: 0.0 for tid in tex_ids}
    for mat_idx, tid in enumerate(m.material_texture):
        if tid in by_tex:
            by_tex[tid] += float(areas[m.face_materials == mat_idx].sum())
    total = sum(by_tex.values())
    if total <= 0:
        return tex_ids, np.full(len(tex_ids), 1.0 / len(tex_ids))
    return tex_ids, np.array([by_tex[t] / total for t in tex_ids])


def extract_appearance(m: Model, config: DescriptorConfig | None = None) -> tuple[AppearanceBlocks, bool]:
    """Appearance blocks for a model, combining textures by surface coverage.

    Untextured models fall back to a solid texture from the material color,
    or a neutral gray when no color exists; the returned flag marks that
    fallback ("no appearance information").
    """
    cfg = config or DescriptorConfig()
    tex_ids, weights = texture_area_weights(m)
    if tex_ids:
        blocks = [compute_appearance(m.textures[t], cfg) for t in tex_ids]
        return combine_textures(blocks, weights, cfg.lbp_scales), False
    if m.material_color is not None:
        tex = solid_texture(m.material_color, f"{m.id}:material", cfg.texture_size)
        return compute_appearance(tex, cfg), True
    tex = solid_texture(NEUTRAL_GRAY, f"{m.id}:neutral", cfg.texture_size)
    return compute_appearance(tex, cfg), True


def extract_features(
    m: Model,
    config: DescriptorConfig | None = None,
    type_profile: dict | None = None,
) -> tuple[FeatureVector, dict]:
    """Extract the full descriptor for one model.

    Returns the feature vector plus extraction metadata (normalization state,
    appearance fallback flag).
    """
    cfg = config or DescriptorConfig()
    model = m if m.normalized else normalize(m, type_profile)
    geo = assemble_geometry(extract_geometry(model, cfg))
    app_blocks, no_appearance = extract_appearance(model, cfg)
    values = np.concatenate([geo, app_blocks.concat()])
    if values.shape != (FULL_DIM,):
        raise AssertionError(f"feature vector has {values.shape}, expected {FULL_DIM}")
    fv = FeatureVector(model_id=model.id, config_hash=cfg.config_hash(), values=values)
    meta = {
        "object_type": model.object_type,
        "cluster": model.cluster,
        "no_appearance": no_appearance,
        "layout": [list(b) for b in FULL_LAYOUT],
    }
    return fv, meta
