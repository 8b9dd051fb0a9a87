"""3D shape descriptors of a structure mask.

Surface area comes from the boundary-face mesh: every voxel face exposed to
background (or to the volume edge) contributes its rectangle. This is fully
deterministic and is the surface definition used by Sphericity and
Compactness below.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from ..errors import DegenerateShapeWarning, EmptyMask
from ..volgrid import StructureMask
from .vector import FeatureVector

SHAPE_NAMES = (
    "VoxelVolume",
    "MeshSurfaceArea",
    "Sphericity",
    "Compactness",
    "Elongation",
    "Flatness",
    "MajorAxisLength",
    "MinorAxisLength",
    "LeastAxisLength",
    "Maximum3DDiameter",
)


def _exposed_face_counts(mask: np.ndarray) -> dict[int, int]:
    """Count boundary faces per axis (both directions pooled)."""
    counts = {}
    for axis in range(3):
        m = np.moveaxis(mask, axis, 0)
        interior = m[:-1] & ~m[1:]          # face on the +axis side
        interior_neg = m[1:] & ~m[:-1]      # face on the -axis side
        edge = int(np.count_nonzero(m[0])) + int(np.count_nonzero(m[-1]))
        counts[axis] = int(interior.sum()) + int(interior_neg.sum()) + edge
    return counts


def boundary_voxels(mask: np.ndarray) -> np.ndarray:
    """Mask voxels with at least one of their 6 face neighbours outside."""
    boundary = np.zeros_like(mask)
    for axis in range(3):
        m = np.moveaxis(mask, axis, 0)
        b = np.moveaxis(boundary, axis, 0)
        b[0] |= m[0]
        b[-1] |= m[-1]
        b[:-1] |= m[:-1] & ~m[1:]
        b[1:] |= m[1:] & ~m[:-1]
    return boundary


def surface_area(mask: StructureMask) -> float:
    """Boundary-face mesh area in mm^2."""
    sx, sy, sz = mask.spacing
    face = {0: sy * sz, 1: sx * sz, 2: sx * sy}
    counts = _exposed_face_counts(mask.data)
    return float(sum(counts[a] * face[a] for a in range(3)))


def _max_diameter(points: np.ndarray) -> float:
    """Largest pairwise distance between physical boundary-voxel centers."""
    if points.shape[0] < 2:
        return 0.0
    if points.shape[0] > 16:
        try:
            hull = ConvexHull(points)
            points = points[hull.vertices]
        except QhullError:
            pass  # coplanar/collinear sets: fall through to all-pairs
    return float(pdist(points).max())


def shape3d_features(mask: StructureMask) -> FeatureVector:
    """Volume, surface, sphericity/compactness and PCA axis descriptors.

    Axis lengths are 4*sqrt(eigenvalue) of the physical voxel-coordinate
    covariance. Degenerate masks (single voxel, collinear or coplanar)
    produce a DegenerateShapeWarning; features are still returned with
    Elongation/Flatness falling back to 1 when the leading eigenvalue is 0.
    """
    if mask.empty:
        raise EmptyMask(f"structure {mask.structure_code} has no voxels")
    spacing = np.asarray(mask.spacing)
    coords = np.argwhere(mask.data) * spacing
    n = coords.shape[0]

    volume = n * float(np.prod(spacing))
    area = surface_area(mask)
    sphericity = float(np.pi ** (1.0 / 3.0) * (6.0 * volume) ** (2.0 / 3.0) / area)
    compactness = float(36.0 * np.pi * volume**2 / area**3)

    centered = coords - coords.mean(axis=0)
    cov = centered.T @ centered / n
    eigvals = np.linalg.eigvalsh(cov)[::-1]
    eigvals = np.clip(eigvals, 0.0, None)
    l1, l2, l3 = eigvals
    degenerate = n == 1 or l3 <= 1e-12 * max(l1, 1.0)
    if degenerate:
        warnings.warn(
            f"structure {mask.structure_code}: single-voxel or (co)planar mask",
            DegenerateShapeWarning,
            stacklevel=2,
        )
    elongation = float(np.sqrt(l2 / l1)) if l1 > 0 else 1.0
    flatness = float(np.sqrt(l3 / l1)) if l1 > 0 else 1.0

    surf_pts = np.argwhere(boundary_voxels(mask.data)) * spacing
    diameter = _max_diameter(surf_pts)

    values = [
        volume,
        area,
        sphericity,
        compactness,
        elongation,
        flatness,
        float(4.0 * np.sqrt(l1)),
        float(4.0 * np.sqrt(l2)),
        float(4.0 * np.sqrt(l3)),
        diameter,
    ]
    return FeatureVector(list(SHAPE_NAMES), np.array(values))
