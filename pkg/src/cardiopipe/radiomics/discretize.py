"""Fixed-bin-width gray-level discretization of a masked region."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyMask, GeometryMismatch
from ..volgrid import StructureMask, VolumeGrid, same_geometry


@dataclass(frozen=True)
class DiscretizedRegion:
    """Gray levels 1..n_levels over the mask voxels.

    `levels` and `coords` are aligned, in lexicographic voxel order
    (x-major, then y, then z). `shape` keeps the originating grid dims so
    texture matrices can rebuild the 3D level volume.
    """

    levels: np.ndarray          # int32 (K,), values in 1..n_levels
    n_levels: int
    bin_width: float
    coords: np.ndarray          # int64 (K, 3) lattice coordinates
    spacing: tuple[float, float, float]
    shape: tuple[int, int, int]

    @property
    def voxel_count(self) -> int:
        return int(self.levels.size)

    def level_volume(self) -> np.ndarray:
        """Dense int32 grid with levels inside the mask and 0 outside."""
        vol = np.zeros(self.shape, dtype=np.int32)
        vol[self.coords[:, 0], self.coords[:, 1], self.coords[:, 2]] = self.levels
        return vol


def discretize(vol: VolumeGrid, mask: StructureMask, bin_width: float) -> DiscretizedRegion:
    """Min-anchored fixed-width binning: level = floor((I - min)/w) + 1."""
    if bin_width <= 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    if not same_geometry(vol, mask):
        raise GeometryMismatch("volume and mask geometry differ")
    if mask.empty:
        raise EmptyMask(f"structure {mask.structure_code} has no voxels")
    coords = np.argwhere(mask.data)
    intensities = vol.data[mask.data]
    levels = np.floor((intensities - intensities.min()) / bin_width).astype(np.int32) + 1
    return DiscretizedRegion(
        levels=levels,
        n_levels=int(levels.max()),
        bin_width=float(bin_width),
        coords=coords,
        spacing=vol.spacing,
        shape=vol.dims,
    )
