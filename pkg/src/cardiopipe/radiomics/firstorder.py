"""First-order intensity statistics over a masked region."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyMask
from ..volgrid import StructureMask, VolumeGrid
from .discretize import DiscretizedRegion
from .vector import FeatureVector

FIRST_ORDER_NAMES = (
    "Mean",
    "Variance",
    "Skewness",
    "Kurtosis",
    "Entropy",
    "Minimum",
    "Maximum",
    "Median",
    "Energy",
    "RootMeanSquared",
)


def first_order_features(
    vol: VolumeGrid, mask: StructureMask, disc: DiscretizedRegion
) -> FeatureVector:
    """Population moments of the raw intensities plus discretized entropy.

    Entropy uses the gray-level histogram of `disc` with log base 2;
    skewness and kurtosis are 0 by convention when the variance is 0.
    """
    if mask.empty:
        raise EmptyMask(f"structure {mask.structure_code} has no voxels")
    x = vol.data[mask.data]
    n = x.size
    mean = float(x.mean())
    centered = x - mean
    var = float(np.mean(centered**2))
    if var > 0:
        sd = np.sqrt(var)
        skew = float(np.mean(centered**3) / sd**3)
        kurt = float(np.mean(centered**4) / var**2)
    else:
        skew = 0.0
        kurt = 0.0
    counts = np.bincount(disc.levels, minlength=disc.n_levels + 1)[1:]
    p = counts[counts > 0] / n
    entropy = float(-np.sum(p * np.log2(p)))
    energy = float(np.sum(x**2))
    values = [
        mean,
        var,
        skew,
        kurt,
        entropy,
        float(x.min()),
        float(x.max()),
        float(np.median(x)),
        energy,
        float(np.sqrt(energy / n)),
    ]
    return FeatureVector(list(FIRST_ORDER_NAMES), np.array(values))
