"""Per-structure radiomic features: first-order, shape, and five texture families."""

from .discretize import DiscretizedRegion, discretize
from .extract import (
    FAMILY_NAMES,
    FAMILY_ORDER,
    RadiomicsConfig,
    all_feature_names,
    extract_radiomics,
    extract_structure_features,
    feature_names_for_structure,
)
from .firstorder import FIRST_ORDER_NAMES, first_order_features
from .shape import SHAPE_NAMES, shape3d_features, surface_area
from .texture import (
    DIRECTIONS_13,
    GLCM_NAMES,
    GLDM_NAMES,
    GLRLM_NAMES,
    GLSZM_NAMES,
    NGTDM_NAMES,
    TextureMatrix,
    glcm_features,
    glcm_matrices,
    gldm_features,
    gldm_matrix,
    glrlm_features,
    glrlm_matrices,
    glszm_features,
    glszm_matrix,
    ngtdm_features,
    ngtdm_table,
)
from .vector import FeatureVector

__all__ = [
    "DiscretizedRegion",
    "discretize",
    "RadiomicsConfig",
    "extract_radiomics",
    "extract_structure_features",
    "feature_names_for_structure",
    "all_feature_names",
    "FeatureVector",
    "TextureMatrix",
    "first_order_features",
    "shape3d_features",
    "surface_area",
    "glcm_features",
    "glrlm_features",
    "glszm_features",
    "ngtdm_features",
    "gldm_features",
    "glcm_matrices",
    "glrlm_matrices",
    "glszm_matrix",
    "ngtdm_table",
    "gldm_matrix",
    "FAMILY_NAMES",
    "FAMILY_ORDER",
    "FIRST_ORDER_NAMES",
    "SHAPE_NAMES",
    "GLCM_NAMES",
    "GLRLM_NAMES",
    "GLSZM_NAMES",
    "NGTDM_NAMES",
    "GLDM_NAMES",
    "DIRECTIONS_13",
]
