"""Segmentation quality metrics: Dice, Hausdorff and surface distances.

Surfaces are 6-connectivity boundary voxels; all distances are Euclidean in
mm (exact distance transform over the grid) and symmetric: HD is the larger
directed maximum, HD95 the 95th percentile and ASD the mean of the pooled
directed surface-to-surface distances.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import distance_transform_edt

from .errors import EmptySurface
from .radiomics.shape import boundary_voxels
from .volgrid import (
    ALL_STRUCTURE_CODES,
    STRUCTURE_ABBREV,
    LabelMap,
    StructureMask,
    extract_structure_mask,
    require_same_geometry,
)


@dataclass
class StructureMetrics:
    dsc: float
    hd: float  # mm; NaN when undefined (structure empty on one side)
    hd95: float
    asd: float
    pred_empty: bool
    gt_empty: bool

    @property
    def distances_defined(self) -> bool:
        return not (self.pred_empty or self.gt_empty)


@dataclass
class SegMetricsReport:
    per_structure: dict[int, StructureMetrics]
    global_dsc: float
    global_hd: float
    global_hd95: float
    global_asd: float

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["structure", "dsc", "hd", "hd95", "asd", "flags"])
            for code in ALL_STRUCTURE_CODES:
                m = self.per_structure[code]
                flags = []
                if m.pred_empty:
                    flags.append("pred_empty")
                if m.gt_empty:
                    flags.append("gt_empty")
                writer.writerow(
                    [
                        STRUCTURE_ABBREV[code],
                        f"{m.dsc:.6f}",
                        "" if np.isnan(m.hd) else f"{m.hd:.6f}",
                        "" if np.isnan(m.hd95) else f"{m.hd95:.6f}",
                        "" if np.isnan(m.asd) else f"{m.asd:.6f}",
                        "|".join(flags),
                    ]
                )
            writer.writerow(
                [
                    "global",
                    f"{self.global_dsc:.6f}",
                    "" if np.isnan(self.global_hd) else f"{self.global_hd:.6f}",
                    "" if np.isnan(self.global_hd95) else f"{self.global_hd95:.6f}",
                    "" if np.isnan(self.global_asd) else f"{self.global_asd:.6f}",
                    "",
                ]
            )


def dice(a: StructureMask, b: StructureMask) -> float:
    """2|A n B| / (|A| + |B|); 1.0 when both empty, 0.0 when exactly one is."""
    require_same_geometry(a, b, "masks")
    na, nb = a.voxel_count, b.voxel_count
    if na == 0 and nb == 0:
        return 1.0
    if na == 0 or nb == 0:
        return 0.0
    overlap = int(np.count_nonzero(a.data & b.data))
    return 2.0 * overlap / (na + nb)


def surface_distances(a: StructureMask, b: StructureMask) -> tuple[float, float, float]:
    """(hd, hd95, asd) in mm between the 6-connectivity boundary voxel sets."""
    require_same_geometry(a, b, "masks")
    if a.empty or b.empty:
        raise EmptySurface("surface distances need two nonempty masks")
    surf_a = boundary_voxels(a.data)
    surf_b = boundary_voxels(b.data)
    spacing = a.spacing
    # EDT of the complement gives, at every voxel, the distance to the nearest
    # surface voxel of the other mask.
    dist_to_b = distance_transform_edt(~surf_b, sampling=spacing)
    dist_to_a = distance_transform_edt(~surf_a, sampling=spacing)
    d_ab = dist_to_b[surf_a]
    d_ba = dist_to_a[surf_b]
    pooled = np.concatenate([d_ab, d_ba])
    hd = float(max(d_ab.max(), d_ba.max()))
    hd95 = float(np.percentile(pooled, 95))
    asd = float(pooled.mean())
    return hd, hd95, asd


def evaluate_segmentation(pred: LabelMap, gt: LabelMap) -> SegMetricsReport:
    """Per-structure and global metrics for codes 1..7.

    Structures empty in both labelmaps score dsc 1 with zero distances;
    structures empty in exactly one score dsc 0 with undefined (NaN)
    distances that are excluded from the global distance means.
    """
    require_same_geometry(pred, gt, "labelmaps")
    per = {}
    for code in ALL_STRUCTURE_CODES:
        mp = extract_structure_mask(pred, code)
        mg = extract_structure_mask(gt, code)
        d = dice(mp, mg)
        if mp.empty and mg.empty:
            per[code] = StructureMetrics(1.0, 0.0, 0.0, 0.0, True, True)
        elif mp.empty or mg.empty:
            per[code] = StructureMetrics(
                0.0, np.nan, np.nan, np.nan, mp.empty, mg.empty
            )
        else:
            hd, hd95, asd = surface_distances(mp, mg)
            per[code] = StructureMetrics(d, hd, hd95, asd, False, False)
    dscs = [m.dsc for m in per.values()]
    defined = [m for m in per.values() if m.distances_defined or (m.pred_empty and m.gt_empty)]
    if defined:
        g_hd = float(np.mean([m.hd for m in defined]))
        g_hd95 = float(np.mean([m.hd95 for m in defined]))
        g_asd = float(np.mean([m.asd for m in defined]))
    else:
        g_hd = g_hd95 = g_asd = float("nan")
    return SegMetricsReport(
        per_structure=per,
        global_dsc=float(np.mean(dscs)),
        global_hd=g_hd,
        global_hd95=g_hd95,
        global_asd=g_asd,
    )
