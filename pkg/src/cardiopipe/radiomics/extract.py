"""Per-structure radiomic feature extraction from a volume + labelmap."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GeometryMismatch
from ..volgrid import ALL_STRUCTURE_CODES, STRUCTURE_ABBREV, LabelMap, VolumeGrid, extract_structure_mask, same_geometry
from .discretize import discretize
from .firstorder import FIRST_ORDER_NAMES, first_order_features
from .shape import SHAPE_NAMES, shape3d_features
from .texture import (
    GLCM_NAMES,
    GLDM_NAMES,
    GLRLM_NAMES,
    GLSZM_NAMES,
    NGTDM_NAMES,
    glcm_features,
    gldm_features,
    glrlm_features,
    glszm_features,
    ngtdm_features,
)
from .vector import FeatureVector

FAMILY_NAMES = {
    "firstorder": FIRST_ORDER_NAMES,
    "shape": SHAPE_NAMES,
    "glcm": GLCM_NAMES,
    "glrlm": GLRLM_NAMES,
    "glszm": GLSZM_NAMES,
    "ngtdm": NGTDM_NAMES,
    "gldm": GLDM_NAMES,
}
FAMILY_ORDER = ("firstorder", "shape", "glcm", "glrlm", "glszm", "ngtdm", "gldm")


@dataclass
class RadiomicsConfig:
    bin_width: float = 25.0   # HU
    gldm_alpha: float = 0.0

    def __post_init__(self):
        if self.bin_width <= 0:
            raise ValueError(f"bin_width must be positive, got {self.bin_width}")


def feature_names_for_structure(code: int) -> list[str]:
    abbrev = STRUCTURE_ABBREV[code]
    names = []
    for family in FAMILY_ORDER:
        names.extend(f"{abbrev}_{family}_{n}" for n in FAMILY_NAMES[family])
    return names


def all_feature_names() -> list[str]:
    names = []
    for code in ALL_STRUCTURE_CODES:
        names.extend(feature_names_for_structure(code))
    return names


def extract_structure_features(
    vol: VolumeGrid, labelmap: LabelMap, code: int, config: RadiomicsConfig
) -> FeatureVector:
    """All seven families for one structure; NaN-filled when it is empty."""
    mask = extract_structure_mask(labelmap, code)
    names = feature_names_for_structure(code)
    if mask.empty:
        return FeatureVector(names, np.full(len(names), np.nan))
    disc = discretize(vol, mask, config.bin_width)
    parts = [
        first_order_features(vol, mask, disc),
        shape3d_features(mask),
        glcm_features(disc),
        glrlm_features(disc),
        glszm_features(disc),
        ngtdm_features(disc),
        gldm_features(disc, config.gldm_alpha),
    ]
    values = np.concatenate([p.values for p in parts])
    return FeatureVector(names, values)


def extract_radiomics(
    vol: VolumeGrid, labelmap: LabelMap, config: RadiomicsConfig | None = None
) -> FeatureVector:
    """Concatenated per-structure features for all 7 cardiac structures."""
    if not same_geometry(vol, labelmap):
        raise GeometryMismatch("volume and labelmap geometry differ")
    config = config or RadiomicsConfig()
    parts = [
        extract_structure_features(vol, labelmap, code, config)
        for code in ALL_STRUCTURE_CODES
    ]
    return FeatureVector.concat(parts)
