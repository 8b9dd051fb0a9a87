"""Per-structure SVD features of masked displacement fields.

Each structure's in-mask displacement vectors form a K x 3 matrix whose
singular values, scaled by 1/sqrt(K) so they are comparable across structure
sizes, summarize the deformation toward the atlas. The mean displacement
magnitude is emitted alongside as an explicitly interpretable extra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atlasreg import DisplacementField
from .errors import EmptyMask, InvalidNSvd
from .radiomics.vector import FeatureVector
from .volgrid import (
    ALL_STRUCTURE_CODES,
    STRUCTURE_ABBREV,
    LabelMap,
    StructureMask,
    extract_structure_mask,
    require_same_geometry,
)


@dataclass(frozen=True)
class StructureDisplacementMatrix:
    """K x 3 displacement rows (mm) at mask voxels, lexicographic order."""

    structure_code: int
    matrix: np.ndarray
    centroid_offset: np.ndarray  # column mean, mm

    @property
    def voxel_count(self) -> int:
        return self.matrix.shape[0]


def mask_displacements(
    disp: DisplacementField, mask: StructureMask
) -> StructureDisplacementMatrix:
    require_same_geometry(disp, mask, "field and mask")
    if mask.empty:
        raise EmptyMask(f"structure {mask.structure_code} has no voxels")
    coords = np.argwhere(mask.data)  # lexicographic (x, then y, then z)
    rows = disp.vectors[coords[:, 0], coords[:, 1], coords[:, 2]]
    return StructureDisplacementMatrix(
        structure_code=mask.structure_code,
        matrix=rows,
        centroid_offset=rows.mean(axis=0),
    )


def svd_features(
    sdm: StructureDisplacementMatrix, n_svd: int, center: bool = False
) -> FeatureVector:
    """sigma_i / sqrt(K) for i <= n_svd (zero-padded past the rank) plus the
    mean displacement magnitude; optionally mean-centered first."""
    if n_svd not in (1, 2, 3):
        raise InvalidNSvd(f"n_svd must be 1, 2 or 3, got {n_svd}")
    m = sdm.matrix
    k = m.shape[0]
    mean_mag = float(np.sqrt(np.sum(m**2, axis=1)).mean())
    if center:
        m = m - m.mean(axis=0)
    sigma = np.linalg.svd(m, compute_uv=False)
    scaled = np.zeros(3)
    scaled[: sigma.size] = sigma / np.sqrt(k)
    names = [f"sv{i + 1}" for i in range(n_svd)] + ["meanmag"]
    values = np.append(scaled[:n_svd], mean_mag)
    return FeatureVector(names, values)


def geometric_feature_names(n_svd: int) -> list[str]:
    names = []
    for code in ALL_STRUCTURE_CODES:
        abbrev = STRUCTURE_ABBREV[code]
        names.extend(f"{abbrev}_geom_sv{i + 1}" for i in range(n_svd))
        names.append(f"{abbrev}_geom_meanmag")
    return names


def extract_geometric(
    disp: DisplacementField, labelmap: LabelMap, n_svd: int = 3, center: bool = False
) -> FeatureVector:
    """Concatenated SVD features over structures 1..7; empty structures
    yield NaN sentinels."""
    if n_svd not in (1, 2, 3):
        raise InvalidNSvd(f"n_svd must be 1, 2 or 3, got {n_svd}")
    require_same_geometry(disp, labelmap, "field and labelmap")
    parts = []
    for code in ALL_STRUCTURE_CODES:
        abbrev = STRUCTURE_ABBREV[code]
        mask = extract_structure_mask(labelmap, code)
        if mask.empty:
            names = [f"sv{i + 1}" for i in range(n_svd)] + ["meanmag"]
            fv = FeatureVector(names, np.full(n_svd + 1, np.nan))
        else:
            fv = svd_features(mask_displacements(disp, mask), n_svd, center)
        parts.append(fv.prefixed(f"{abbrev}_geom_"))
    return FeatureVector.concat(parts)
