"""Shared fixtures and helpers."""

from __future__ import annotations

import numpy as np
import pytest

from cardiopipe.volgrid import LabelMap, StructureMask, VolumeGrid


def make_volume(data, spacing=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)) -> VolumeGrid:
    return VolumeGrid(np.asarray(data, dtype=np.float64), spacing, origin)


def make_mask(data, spacing=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0), code=1) -> StructureMask:
    return StructureMask(np.asarray(data, dtype=bool), spacing, origin, structure_code=code)


def full_mask(shape, spacing=(1.0, 1.0, 1.0)) -> StructureMask:
    return make_mask(np.ones(shape, dtype=bool), spacing)


def ball_mask(shape, center, radius, spacing=(1.0, 1.0, 1.0)) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(n) for n in shape], indexing="ij")
    d2 = sum((g - c) ** 2 for g, c in zip(grids, center))
    return d2 <= radius**2


def random_region(rng, max_side=8, n_levels_max=8):
    """Random volume + random nonempty mask for oracle sweeps."""
    shape = tuple(int(rng.integers(3, max_side + 1)) for _ in range(3))
    vol = rng.integers(0, n_levels_max, size=shape).astype(np.float64) * 25.0
    mask = rng.random(shape) < 0.7
    if not mask.any():
        mask[tuple(int(rng.integers(0, s)) for s in shape)] = True
    return make_volume(vol), make_mask(mask)


def assert_feature_close(value, expected, rtol=1e-9, atol=1e-12, name=""):
    assert np.isfinite(value), f"{name}: non-finite value {value}"
    assert abs(value - expected) <= atol + rtol * abs(expected), (
        f"{name}: {value} != {expected} (diff {abs(value - expected):.3e})"
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
