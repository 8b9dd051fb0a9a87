"""Deformable labelmap-to-atlas registration and atlas construction.

Registration is a classical demons-style scheme: one-hot label channels are
Gaussian-smoothed, a sum-of-squared-differences data term is minimized by
multi-resolution gradient descent with a fixed step size and backtracking
halving, and both the per-iteration update and the accumulated field are
Gaussian-regularized (fluid / diffusion). Accepted iterations never increase
the data energy.

Displacement fields store forward subject-to-atlas vectors in mm on world
axes: the anatomy at voxel x of the subject corresponds to atlas position
x + u(x). `warp` therefore samples the subject at x - u(x) (backward
warping) to produce an atlas-space image.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import gaussian_filter, map_coordinates, zoom

from .errors import EmptyCohort, GeometryMismatch
from .volgrid import (
    LabelMap,
    VolumeGrid,
    _DT_FLOAT32,
    _as_triple,
    read_nifti_array,
    require_same_geometry,
    write_nifti_array,
)

N_CHANNELS = 8  # background + 7 structures


@dataclass(frozen=True)
class SoftLabelImage:
    """Per-voxel probabilities over background + 7 structures."""

    channels: np.ndarray  # (nx, ny, nz, 8) float64, sums to 1 per voxel
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.channels, dtype=np.float64))
        if arr.ndim != 4 or arr.shape[3] != N_CHANNELS:
            raise ValueError(f"expected (nx, ny, nz, {N_CHANNELS}) channels, got {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "channels", arr)
        object.__setattr__(self, "spacing", _as_triple(self.spacing, "spacing"))
        object.__setattr__(self, "origin", _as_triple(self.origin, "origin"))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.channels.shape[:3]

    def argmax_labelmap(self) -> LabelMap:
        """Hard labelmap; ties resolve to the lowest structure code."""
        return LabelMap(
            np.argmax(self.channels, axis=3).astype(np.uint8),
            spacing=self.spacing,
            origin=self.origin,
        )


@dataclass(frozen=True)
class DisplacementField:
    """Forward subject-to-atlas displacement, mm on world axes."""

    vectors: np.ndarray  # (nx, ny, nz, 3) float64
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    converged: bool = True
    final_energy: float = 0.0

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.vectors, dtype=np.float64))
        if arr.ndim != 4 or arr.shape[3] != 3:
            raise ValueError(f"expected (nx, ny, nz, 3) vectors, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("displacement field contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "vectors", arr)
        object.__setattr__(self, "spacing", _as_triple(self.spacing, "spacing"))
        object.__setattr__(self, "origin", _as_triple(self.origin, "origin"))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.vectors.shape[:3]

    def magnitudes(self) -> np.ndarray:
        return np.sqrt(np.sum(self.vectors**2, axis=3))


@dataclass
class RegistrationParams:
    label_sigma: float = 1.0       # voxels; smoothing of one-hot channels
    sigma_fluid: float = 1.0       # voxels; smoothing of each update
    sigma_diffusion: float = 1.5   # voxels; smoothing of the running field
    levels: int = 3
    iterations_per_level: int = 100
    tolerance: float = 1e-6        # relative energy decrease for convergence
    step_size: float = 1.0         # max voxel displacement per raw update
    min_step: float = 1.0 / 64.0


@dataclass
class Atlas:
    soft: SoftLabelImage
    hard: LabelMap
    iterations: int
    cohort_size: int


def to_soft_labels(labelmap: LabelMap, smoothing_sigma: float = 0.0) -> SoftLabelImage:
    """One-hot encoding, optional per-channel Gaussian smoothing (sigma in mm),
    then per-voxel renormalization."""
    if smoothing_sigma < 0:
        raise ValueError("smoothing_sigma must be >= 0")
    onehot = np.zeros(labelmap.dims + (N_CHANNELS,), dtype=np.float64)
    for code in range(N_CHANNELS):
        onehot[..., code] = labelmap.data == code
    if smoothing_sigma > 0:
        sig = [smoothing_sigma / s for s in labelmap.spacing]
        for code in range(N_CHANNELS):
            onehot[..., code] = gaussian_filter(onehot[..., code], sigma=sig, mode="nearest")
        onehot /= onehot.sum(axis=3, keepdims=True)
    return SoftLabelImage(onehot, spacing=labelmap.spacing, origin=labelmap.origin)


# ---------------------------------------------------------------------------
# Demons core (voxel units, backward-warp parameterization)
# ---------------------------------------------------------------------------

def _warp_channels(channels: np.ndarray, u_back: np.ndarray) -> np.ndarray:
    """Sample channels at x + u_back (u_back in voxels)."""
    dims = channels.shape[:3]
    idx = np.meshgrid(*(np.arange(n, dtype=np.float64) for n in dims), indexing="ij")
    coords = [idx[a] + u_back[..., a] for a in range(3)]
    out = np.empty_like(channels)
    for c in range(channels.shape[3]):
        out[..., c] = map_coordinates(channels[..., c], coords, order=1, mode="nearest")
    return out


def _ssd(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum((a - b) ** 2))


def _smooth_vec(u: np.ndarray, sigma: float) -> np.ndarray:
    if sigma <= 0:
        return u
    out = np.empty_like(u)
    for a in range(3):
        out[..., a] = gaussian_filter(u[..., a], sigma=sigma, mode="nearest")
    return out


def _demons_level(moving, fixed, u_back, params, is_finest):
    """Run one resolution level; returns (u_back, energy, converged)."""
    n_ch = moving.shape[3]
    warped = _warp_channels(moving, u_back)
    energy = _ssd(warped, fixed)
    e0 = max(energy, 1e-12)
    step = params.step_size
    converged = True
    last_decrease = 0.0
    for _ in range(params.iterations_per_level):
        if energy <= 0:
            break
        residual = warped - fixed
        force = np.zeros(u_back.shape)
        for c in range(n_ch):
            g = np.gradient(warped[..., c])
            for a in range(3):
                force[..., a] += residual[..., c] * g[a]
        max_mag = float(np.sqrt(np.sum(force**2, axis=3)).max())
        if max_mag <= 0:
            break
        force *= -1.0 / max_mag
        accepted = False
        while step >= params.min_step:
            update = _smooth_vec(force * step, params.sigma_fluid)
            u_try = _smooth_vec(u_back + update, params.sigma_diffusion)
            warped_try = _warp_channels(moving, u_try)
            e_try = _ssd(warped_try, fixed)
            if e_try <= energy:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        last_decrease = energy - e_try
        u_back, warped, energy = u_try, warped_try, e_try
        step = min(step * 1.2, 2.0)
        if last_decrease <= params.tolerance * e0:
            break
    else:
        # iteration budget exhausted while still improving
        converged = not is_finest or (last_decrease <= params.tolerance * e0)
    return u_back, energy, converged


def _downsample_channels(channels: np.ndarray, factor: float) -> np.ndarray:
    out_list = [
        zoom(channels[..., c], factor, order=1, mode="nearest", grid_mode=False)
        for c in range(channels.shape[3])
    ]
    out = np.stack(out_list, axis=3)
    total = out.sum(axis=3, keepdims=True)
    return out / np.where(total > 0, total, 1.0)


def _upsample_field(u: np.ndarray, target_dims) -> np.ndarray:
    src_dims = u.shape[:3]
    factors = [target_dims[a] / src_dims[a] for a in range(3)]
    out = np.empty(tuple(target_dims) + (3,))
    for a in range(3):
        comp = zoom(u[..., a], factors, order=1, mode="nearest", grid_mode=False)
        out[..., a] = comp * factors[a]  # voxel-unit vectors rescale with the grid
    return out


def register(
    moving: SoftLabelImage, fixed: SoftLabelImage, params: RegistrationParams | None = None
) -> DisplacementField:
    """Estimate the displacement field aligning `moving` onto `fixed`.

    The returned field is the forward moving-to-fixed displacement in mm;
    `converged=False` flags a registration that hit the iteration budget
    while the energy was still decreasing faster than the tolerance.
    """
    params = params or RegistrationParams()
    require_same_geometry(moving, fixed, "moving and fixed")

    mov = np.array(moving.channels)
    fix = np.array(fixed.channels)
    if params.label_sigma > 0:
        for arr in (mov, fix):
            for c in range(N_CHANNELS):
                arr[..., c] = gaussian_filter(arr[..., c], sigma=params.label_sigma, mode="nearest")
    # drop channels empty in both inputs; they contribute nothing to SSD
    active = [
        c for c in range(N_CHANNELS) if mov[..., c].any() or fix[..., c].any()
    ]
    mov, fix = mov[..., active], fix[..., active]

    dims = moving.dims
    factors = [2 ** (params.levels - 1 - l) for l in range(params.levels)]  # coarse->fine
    u_back = None
    energy, converged = 0.0, True
    for factor in factors:
        if factor > 1 and min(dims) // factor < 4:
            continue
        if factor == 1:
            mov_l, fix_l = mov, fix
        else:
            mov_l = _downsample_channels(mov, 1.0 / factor)
            fix_l = _downsample_channels(fix, 1.0 / factor)
        level_dims = mov_l.shape[:3]
        if u_back is None:
            u_back = np.zeros(level_dims + (3,))
        elif u_back.shape[:3] != level_dims:
            u_back = _upsample_field(u_back, level_dims)
        u_back, energy, converged = _demons_level(
            mov_l, fix_l, u_back, params, is_finest=(factor == 1)
        )
    if u_back is None:
        u_back = np.zeros(dims + (3,))
    if u_back.shape[:3] != dims:
        u_back = _upsample_field(u_back, dims)
    # backward-warp voxel vectors -> forward mm vectors
    vectors = -u_back * np.asarray(moving.spacing)
    return DisplacementField(
        vectors,
        spacing=moving.spacing,
        origin=moving.origin,
        converged=converged,
        final_energy=energy,
    )


def warp(image, disp: DisplacementField):
    """Backward-warp a LabelMap or SoftLabelImage with the field.

    Hard labels use nearest-neighbour lookup (out-of-volume samples become
    background); soft channels use trilinear interpolation followed by
    per-voxel renormalization.
    """
    require_same_geometry(image, disp, "image and field")
    spacing = np.asarray(disp.spacing)
    u_back = -disp.vectors / spacing
    dims = disp.dims
    idx = np.meshgrid(*(np.arange(n, dtype=np.float64) for n in dims), indexing="ij")
    coords = [idx[a] + u_back[..., a] for a in range(3)]
    if isinstance(image, LabelMap):
        out = map_coordinates(image.data, coords, order=0, mode="constant", cval=0)
        return LabelMap(out, spacing=disp.spacing, origin=image.origin)
    if isinstance(image, SoftLabelImage):
        out = np.empty_like(image.channels)
        for c in range(N_CHANNELS):
            out[..., c] = map_coordinates(image.channels[..., c], coords, order=1, mode="nearest")
        out = np.clip(out, 0.0, None)
        total = out.sum(axis=3, keepdims=True)
        out = out / np.where(total > 0, total, 1.0)
        return SoftLabelImage(out, spacing=disp.spacing, origin=image.origin)
    raise TypeError(f"cannot warp object of type {type(image).__name__}")


def build_atlas(
    cohort: list[LabelMap],
    iterations: int = 2,
    params: RegistrationParams | None = None,
    max_workers: int = 1,
) -> tuple[Atlas, list[DisplacementField]]:
    """Iterative unbiased atlas construction from (healthy) labelmaps.

    The atlas starts as the voxel-wise mean of one-hot labels. Each
    iteration registers every subject to the current atlas, averages the
    warped soft labels, and recenters the fields by subtracting their
    cohort mean so the atlas does not drift toward any subject.
    """
    if not cohort:
        raise EmptyCohort("atlas construction needs at least one labelmap")
    params = params or RegistrationParams()
    first = cohort[0]
    for other in cohort[1:]:
        require_same_geometry(first, other, "cohort labelmaps")

    softs = [to_soft_labels(l, 0.0) for l in cohort]
    atlas_soft = SoftLabelImage(
        np.mean([s.channels for s in softs], axis=0),
        spacing=first.spacing,
        origin=first.origin,
    )
    fields = [
        DisplacementField(np.zeros(first.dims + (3,)), first.spacing, first.origin)
        for _ in cohort
    ]
    for _ in range(iterations):
        fields = _register_cohort(softs, atlas_soft, params, max_workers)
        warped = [warp(s, f) for s, f in zip(softs, fields)]
        atlas_soft = SoftLabelImage(
            np.mean([w.channels for w in warped], axis=0),
            spacing=first.spacing,
            origin=first.origin,
        )
        mean_vec = np.mean([f.vectors for f in fields], axis=0)
        fields = [replace(f, vectors=f.vectors - mean_vec) for f in fields]
    atlas = Atlas(
        soft=atlas_soft,
        hard=atlas_soft.argmax_labelmap(),
        iterations=iterations,
        cohort_size=len(cohort),
    )
    return atlas, fields


def _register_cohort(softs, atlas_soft, params, max_workers):
    if max_workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(_register_job, [(s, atlas_soft, params) for s in softs]))
    return [register(s, atlas_soft, params) for s in softs]


def _register_job(args):
    moving, fixed, params = args
    return register(moving, fixed, params)


def jacobian_determinant(disp: DisplacementField) -> VolumeGrid:
    """det(I + grad u) per voxel, central differences in voxel units."""
    u_vox = disp.vectors / np.asarray(disp.spacing)
    jac = np.empty(disp.dims + (3, 3))
    for a in range(3):
        grads = np.gradient(u_vox[..., a])
        for b in range(3):
            jac[..., a, b] = grads[b]
    for a in range(3):
        jac[..., a, a] += 1.0
    det = (
        jac[..., 0, 0] * (jac[..., 1, 1] * jac[..., 2, 2] - jac[..., 1, 2] * jac[..., 2, 1])
        - jac[..., 0, 1] * (jac[..., 1, 0] * jac[..., 2, 2] - jac[..., 1, 2] * jac[..., 2, 0])
        + jac[..., 0, 2] * (jac[..., 1, 0] * jac[..., 2, 1] - jac[..., 1, 1] * jac[..., 2, 0])
    )
    return VolumeGrid(det, spacing=disp.spacing, origin=disp.origin)


# ---------------------------------------------------------------------------
# Field / soft-label NIfTI I/O (3- and 8-channel float32)
# ---------------------------------------------------------------------------

def save_field(disp: DisplacementField, path) -> None:
    write_nifti_array(path, disp.vectors, disp.spacing, disp.origin, _DT_FLOAT32)


def load_field(path) -> DisplacementField:
    data, spacing, origin, _ = read_nifti_array(path)
    if data.ndim != 4 or data.shape[3] != 3:
        raise GeometryMismatch(f"{path}: expected a 3-channel displacement field")
    return DisplacementField(data, spacing=spacing, origin=origin)


def save_soft_labels(soft: SoftLabelImage, path) -> None:
    write_nifti_array(path, soft.channels, soft.spacing, soft.origin, _DT_FLOAT32)


def load_soft_labels(path) -> SoftLabelImage:
    data, spacing, origin, _ = read_nifti_array(path)
    if data.ndim != 4 or data.shape[3] != N_CHANNELS:
        raise GeometryMismatch(f"{path}: expected an {N_CHANNELS}-channel soft labelmap")
    total = data.sum(axis=3, keepdims=True)
    data = data / np.where(total > 0, total, 1.0)  # float32 storage renormalization
    return SoftLabelImage(data, spacing=spacing, origin=origin)
