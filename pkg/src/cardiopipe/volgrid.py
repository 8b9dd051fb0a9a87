"""Volumetric data model and NIfTI-1 I/O.

Grids are axis-aligned: arrays are indexed ``[x, y, z]`` and the world
position of voxel ``(i, j, k)`` is ``origin + (i, j, k) * spacing`` (mm).
Only little-endian single-file NIfTI-1 (.nii / .nii.gz) is supported, with
scalar datatypes uint8, int16, int32, float32, float64. Oblique or rotated
affines are rejected; the header affine is honoured for spacing and origin
only.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import map_coordinates

from .errors import (
    EmptyMask,
    GeometryMismatch,
    InvalidCode,
    InvalidSpacing,
    MalformedHeader,
    UnsupportedDatatype,
)

# Fixed structure code table for cardiac CT labelmaps.
STRUCTURE_NAMES = {
    1: "left ventricle",
    2: "left-ventricular myocardium",
    3: "right ventricle",
    4: "left atrium",
    5: "right atrium",
    6: "aorta",
    7: "pulmonary trunk",
}
STRUCTURE_ABBREV = {1: "LV", 2: "MYO", 3: "RV", 4: "LA", 5: "RA", 6: "AO", 7: "PT"}
ALL_STRUCTURE_CODES = tuple(range(1, 8))

_GEOM_ATOL = 1e-6


def _as_triple(x, name: str) -> tuple[float, float, float]:
    t = tuple(float(v) for v in x)
    if len(t) != 3:
        raise ValueError(f"{name} must have 3 components, got {len(t)}")
    return t


@dataclass(frozen=True)
class VolumeGrid:
    """Scalar 3D voxel grid (CT intensities in HU), float64 storage."""

    data: np.ndarray
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if arr.ndim != 3:
            raise ValueError(f"expected 3D data, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("volume contains non-finite values")
        sp = _as_triple(self.spacing, "spacing")
        if any(s <= 0 for s in sp):
            raise InvalidSpacing(f"spacing must be positive, got {sp}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "spacing", sp)
        object.__setattr__(self, "origin", _as_triple(self.origin, "origin"))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape

    @property
    def voxel_volume(self) -> float:
        """Volume of one voxel in mm^3."""
        return float(np.prod(self.spacing))


@dataclass(frozen=True)
class LabelMap:
    """Integer structure-code grid, codes 0 (background) .. 7."""

    data: np.ndarray
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 3:
            raise ValueError(f"expected 3D data, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == np.round(arr)):
                raise ValueError("labelmap values must be integers")
        arr = np.ascontiguousarray(arr, dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() > 7):
            raise ValueError("labelmap codes must lie in 0..7")
        arr = arr.astype(np.uint8)
        sp = _as_triple(self.spacing, "spacing")
        if any(s <= 0 for s in sp):
            raise InvalidSpacing(f"spacing must be positive, got {sp}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "spacing", sp)
        object.__setattr__(self, "origin", _as_triple(self.origin, "origin"))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape


@dataclass(frozen=True)
class StructureMask:
    """Binary occupancy grid for a single structure code."""

    data: np.ndarray
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]
    structure_code: int = 0

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=bool))
        if arr.ndim != 3:
            raise ValueError(f"expected 3D data, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "spacing", _as_triple(self.spacing, "spacing"))
        object.__setattr__(self, "origin", _as_triple(self.origin, "origin"))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape

    @property
    def voxel_count(self) -> int:
        return int(np.count_nonzero(self.data))

    @property
    def empty(self) -> bool:
        return self.voxel_count == 0


def same_geometry(a, b) -> bool:
    return (
        a.dims == b.dims
        and np.allclose(a.spacing, b.spacing, atol=_GEOM_ATOL)
        and np.allclose(a.origin, b.origin, atol=_GEOM_ATOL)
    )


def require_same_geometry(a, b, what: str = "inputs") -> None:
    if not same_geometry(a, b):
        raise GeometryMismatch(
            f"{what} differ: dims {a.dims} vs {b.dims}, "
            f"spacing {a.spacing} vs {b.spacing}, origin {a.origin} vs {b.origin}"
        )


def extract_structure_mask(labelmap: LabelMap, code: int) -> StructureMask:
    """Binary mask of voxels equal to `code` (1..7)."""
    if code not in ALL_STRUCTURE_CODES:
        raise InvalidCode(f"structure code must be in 1..7, got {code}")
    return StructureMask(
        data=labelmap.data == code,
        spacing=labelmap.spacing,
        origin=labelmap.origin,
        structure_code=code,
    )


def resample_to_spacing(vol, target_spacing):
    """Resample onto an axis-aligned grid with the given spacing.

    VolumeGrid uses trilinear interpolation, LabelMap nearest-neighbour.
    The new grid keeps the same origin; its dims are chosen so the physical
    extent is preserved to within one voxel.
    """
    target = _as_triple(target_spacing, "target_spacing")
    if any(t <= 0 for t in target):
        raise InvalidSpacing(f"target spacing must be positive, got {target}")
    old = vol.spacing
    dims = vol.dims
    new_dims = tuple(
        max(1, int(np.floor(dims[a] * old[a] / target[a] + 0.5))) for a in range(3)
    )
    # New voxel centers expressed in old index coordinates.
    axes = [np.arange(new_dims[a]) * target[a] / old[a] for a in range(3)]
    grid = np.meshgrid(*axes, indexing="ij")
    coords = np.stack(grid)
    if isinstance(vol, LabelMap):
        out = map_coordinates(vol.data, coords, order=0, mode="nearest")
        return LabelMap(out, spacing=target, origin=vol.origin)
    out = map_coordinates(vol.data, coords, order=1, mode="nearest")
    return VolumeGrid(out, spacing=target, origin=vol.origin)


# ---------------------------------------------------------------------------
# NIfTI-1 reading / writing
# ---------------------------------------------------------------------------

_DT_UINT8, _DT_INT16, _DT_INT32, _DT_FLOAT32, _DT_FLOAT64 = 2, 4, 8, 16, 64
_NUMPY_DTYPES = {
    _DT_UINT8: np.dtype("<u1"),
    _DT_INT16: np.dtype("<i2"),
    _DT_INT32: np.dtype("<i4"),
    _DT_FLOAT32: np.dtype("<f4"),
    _DT_FLOAT64: np.dtype("<f8"),
}
_INTEGER_CODES = (_DT_UINT8, _DT_INT16, _DT_INT32)
_INTENT_VECTOR = 1007
_HDR_SIZE = 348
_VOX_OFFSET = 352


def _read_bytes(path) -> bytes:
    with open(path, "rb") as f:
        head = f.read(2)
        f.seek(0)
        if head == b"\x1f\x8b":
            with gzip.GzipFile(fileobj=f) as g:
                return g.read()
        return f.read()


def _parse_header(raw: bytes, path) -> dict:
    if len(raw) < _HDR_SIZE:
        raise MalformedHeader(f"{path}: file shorter than a NIfTI-1 header")
    (sizeof_hdr,) = struct.unpack_from("<i", raw, 0)
    if sizeof_hdr != _HDR_SIZE:
        raise MalformedHeader(
            f"{path}: sizeof_hdr={sizeof_hdr}, expected 348 (little-endian NIfTI-1)"
        )
    magic = raw[344:348]
    if magic == b"ni1\x00":
        raise MalformedHeader(f"{path}: two-file NIfTI (.hdr/.img) is not supported")
    if magic != b"n+1\x00":
        raise MalformedHeader(f"{path}: bad magic {magic!r}")
    dim = struct.unpack_from("<8h", raw, 40)
    datatype, bitpix = struct.unpack_from("<hh", raw, 70)
    pixdim = struct.unpack_from("<8f", raw, 76)
    vox_offset, scl_slope, scl_inter = struct.unpack_from("<fff", raw, 108)
    qform_code, sform_code = struct.unpack_from("<hh", raw, 252)
    quat = struct.unpack_from("<6f", raw, 256)
    srow = np.array(struct.unpack_from("<12f", raw, 280)).reshape(3, 4)

    ndim = dim[0]
    if ndim < 1 or ndim > 5:
        raise MalformedHeader(f"{path}: unsupported dim[0]={ndim}")
    spatial = [dim[i] if i <= ndim else 1 for i in (1, 2, 3)]
    if any(d <= 0 for d in spatial):
        raise MalformedHeader(f"{path}: degenerate spatial dims {tuple(spatial)}")
    channels = 1
    if ndim == 4:
        channels = dim[4]
    elif ndim == 5:
        if dim[4] != 1:
            raise MalformedHeader(f"{path}: 4D time series are not supported")
        channels = dim[5]
    if channels <= 0:
        raise MalformedHeader(f"{path}: degenerate channel count {channels}")

    if datatype not in _NUMPY_DTYPES:
        raise UnsupportedDatatype(f"{path}: datatype code {datatype} not supported")
    np_dtype = _NUMPY_DTYPES[datatype]
    if bitpix != np_dtype.itemsize * 8:
        raise MalformedHeader(
            f"{path}: bitpix {bitpix} inconsistent with datatype {datatype}"
        )

    if sform_code > 0:
        rot = srow[:, :3]
        diag = np.diag(rot)
        off = rot - np.diag(diag)
        if np.max(np.abs(off)) > 1e-4 * (np.max(np.abs(diag)) + 1.0):
            raise MalformedHeader(f"{path}: non-axis-aligned sform affine")
        spacing = np.abs(diag)
        origin = srow[:, 3]
    elif qform_code > 0:
        b, c, d = quat[0], quat[1], quat[2]
        if max(abs(b), abs(c), abs(d)) > 1e-6:
            raise MalformedHeader(f"{path}: rotated qform affine not supported")
        spacing = np.abs(np.asarray(pixdim[1:4], dtype=np.float64))
        origin = np.asarray(quat[3:6], dtype=np.float64)
    else:
        spacing = np.abs(np.asarray(pixdim[1:4], dtype=np.float64))
        origin = np.zeros(3)
    if np.any(spacing <= 0) or not np.all(np.isfinite(spacing)):
        raise MalformedHeader(f"{path}: non-positive voxel spacing {tuple(spacing)}")

    offset = int(round(vox_offset))
    if offset < _HDR_SIZE:
        raise MalformedHeader(f"{path}: vox_offset {vox_offset} < 348")

    return {
        "dims": tuple(int(d) for d in spatial),
        "channels": int(channels),
        "dtype": np_dtype,
        "datatype_code": datatype,
        "offset": offset,
        "slope": float(scl_slope),
        "inter": float(scl_inter),
        "spacing": tuple(float(s) for s in spacing),
        "origin": tuple(float(o) for o in origin),
    }


def read_nifti_array(path):
    """Low-level reader: returns (data, spacing, origin, datatype_code).

    `data` is float64 with shape (nx, ny, nz) for scalar files or
    (nx, ny, nz, c) for multi-channel (vector intent) files; header
    slope/intercept rescaling is applied when present.
    """
    raw = _read_bytes(path)
    hdr = _parse_header(raw, path)
    nx, ny, nz = hdr["dims"]
    c = hdr["channels"]
    count = nx * ny * nz * c
    nbytes = count * hdr["dtype"].itemsize
    if len(raw) < hdr["offset"] + nbytes:
        raise MalformedHeader(f"{path}: file truncated (expected {nbytes} data bytes)")
    flat = np.frombuffer(raw, dtype=hdr["dtype"], count=count, offset=hdr["offset"])
    data = flat.reshape((nx, ny, nz, c), order="F").astype(np.float64)
    slope, inter = hdr["slope"], hdr["inter"]
    if slope != 0.0 and not (slope == 1.0 and inter == 0.0):
        data = data * slope + inter
    if not np.all(np.isfinite(data)):
        raise MalformedHeader(f"{path}: non-finite voxel values")
    if c == 1:
        data = data[..., 0]
    return data, hdr["spacing"], hdr["origin"], hdr["datatype_code"]


def _build_header(dims, channels, spacing, origin, datatype_code, intent_code) -> bytes:
    hdr = bytearray(_HDR_SIZE)
    struct.pack_into("<i", hdr, 0, _HDR_SIZE)
    if channels == 1:
        dim = (3, dims[0], dims[1], dims[2], 1, 1, 1, 1)
    else:
        dim = (5, dims[0], dims[1], dims[2], 1, channels, 1, 1)
    struct.pack_into("<8h", hdr, 40, *dim)
    struct.pack_into("<h", hdr, 68, intent_code)
    np_dtype = _NUMPY_DTYPES[datatype_code]
    struct.pack_into("<hh", hdr, 70, datatype_code, np_dtype.itemsize * 8)
    pixdim = (1.0, spacing[0], spacing[1], spacing[2], 0.0, 0.0, 0.0, 0.0)
    struct.pack_into("<8f", hdr, 76, *pixdim)
    struct.pack_into("<fff", hdr, 108, float(_VOX_OFFSET), 1.0, 0.0)
    struct.pack_into("<b", hdr, 123, 2)  # NIFTI_UNITS_MM
    struct.pack_into("<24s", hdr, 148, b"cardiopipe")
    struct.pack_into("<hh", hdr, 252, 0, 1)  # qform off, sform scanner-anat
    struct.pack_into("<4f", hdr, 280, spacing[0], 0.0, 0.0, origin[0])
    struct.pack_into("<4f", hdr, 296, 0.0, spacing[1], 0.0, origin[1])
    struct.pack_into("<4f", hdr, 312, 0.0, 0.0, spacing[2], origin[2])
    struct.pack_into("<4s", hdr, 344, b"n+1\x00")
    return bytes(hdr)


def write_nifti_array(path, data, spacing, origin, datatype_code, intent_code=0):
    """Low-level writer for scalar (3D) or multi-channel (4D) arrays.

    Output is byte-deterministic: gzip streams carry no timestamp or name.
    """
    arr = np.asarray(data)
    if arr.ndim == 3:
        dims, channels = arr.shape, 1
    elif arr.ndim == 4:
        dims, channels = arr.shape[:3], arr.shape[3]
        if intent_code == 0:
            intent_code = _INTENT_VECTOR
    else:
        raise ValueError(f"expected 3D or 4D array, got shape {arr.shape}")
    hdr = _build_header(dims, channels, spacing, origin, datatype_code, intent_code)
    stored = arr.astype(_NUMPY_DTYPES[datatype_code], copy=False)
    if stored.ndim == 4:
        stored = stored.reshape(dims + (1, channels))
    payload = hdr + b"\x00" * (_VOX_OFFSET - _HDR_SIZE) + stored.tobytes(order="F")
    path = str(path)
    if path.endswith(".gz"):
        with open(path, "wb") as f:
            with gzip.GzipFile(fileobj=f, mode="wb", mtime=0) as g:
                g.write(payload)
    else:
        with open(path, "wb") as f:
            f.write(payload)


def load_volume(path) -> VolumeGrid:
    """Load a scalar NIfTI-1 volume; slope/intercept rescaled to HU."""
    data, spacing, origin, _ = read_nifti_array(path)
    if data.ndim != 3:
        raise UnsupportedDatatype(f"{path}: expected a scalar volume, got multi-channel")
    return VolumeGrid(data, spacing=spacing, origin=origin)


def load_labelmap(path) -> LabelMap:
    """Load an integer-stored NIfTI-1 labelmap with codes 0..7."""
    data, spacing, origin, dtype_code = read_nifti_array(path)
    if data.ndim != 3:
        raise UnsupportedDatatype(f"{path}: expected a scalar labelmap, got multi-channel")
    if dtype_code not in _INTEGER_CODES:
        raise UnsupportedDatatype(f"{path}: labelmap must be stored as integers")
    if data.size and (data.min() < 0 or data.max() > 7):
        raise UnsupportedDatatype(f"{path}: labelmap codes outside 0..7")
    return LabelMap(data, spacing=spacing, origin=origin)


def save_volume(vol, path) -> None:
    """Write a VolumeGrid as float32 or a LabelMap as uint8 NIfTI-1."""
    if isinstance(vol, LabelMap):
        write_nifti_array(path, vol.data, vol.spacing, vol.origin, _DT_UINT8)
    elif isinstance(vol, VolumeGrid):
        write_nifti_array(path, vol.data, vol.spacing, vol.origin, _DT_FLOAT32)
    else:
        raise TypeError(f"cannot save object of type {type(vol).__name__}")
