"""Gray-level texture matrices and their features.

All five families work on the discretized level volume (levels 1..N_g inside
the mask, 0 outside) and only ever pair in-mask voxels. Directional families
(GLCM, GLRLM) use the 13 unique distance-1 directions in 3D and average
features over directions; GLSZM zones and GLDM/NGTDM neighbourhoods use
26-connectivity.

Degenerate conventions: a region with no valid voxel pairs (e.g. a single
voxel) yields Contrast=0, Correlation=1, Homogeneity=1, Energy=1, Entropy=0
for GLCM; NGTDM Coarseness is capped at 1e6.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .discretize import DiscretizedRegion
from .vector import FeatureVector

NGTDM_COARSENESS_CAP = 1e6

GLCM_NAMES = (
    "Contrast",
    "Correlation",
    "Homogeneity",
    "Energy",
    "Entropy",
    "ClusterShade",
    "ClusterProminence",
)
GLRLM_NAMES = (
    "ShortRunEmphasis",
    "LongRunEmphasis",
    "GrayLevelNonUniformity",
    "RunLengthNonUniformity",
    "RunPercentage",
)
GLSZM_NAMES = (
    "SmallAreaEmphasis",
    "LargeAreaEmphasis",
    "ZoneEntropy",
    "GrayLevelNonUniformity",
    "SizeZoneNonUniformity",
)
NGTDM_NAMES = ("Coarseness", "Contrast", "Busyness", "Complexity", "Strength")
GLDM_NAMES = (
    "SmallDependenceEmphasis",
    "LargeDependenceEmphasis",
    "DependenceEntropy",
    "GrayLevelNonUniformity",
)


def unique_directions() -> list[tuple[int, int, int]]:
    """The 13 distance-1 directions, canonicalized (first nonzero > 0)."""
    dirs = []
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                if (dx, dy, dz) == (0, 0, 0):
                    continue
                first = next(c for c in (dx, dy, dz) if c != 0)
                if first > 0:
                    dirs.append((dx, dy, dz))
    return sorted(dirs)


DIRECTIONS_13 = tuple(unique_directions())
ALL_OFFSETS_26 = tuple(
    (dx, dy, dz)
    for dx in (-1, 0, 1)
    for dy in (-1, 0, 1)
    for dz in (-1, 0, 1)
    if (dx, dy, dz) != (0, 0, 0)
)


@dataclass
class TextureMatrix:
    family: str
    matrix: np.ndarray
    metadata: dict = field(default_factory=dict)


def _offset_slices(shape, offset):
    """Slices (src, dst) so that arr[src] pairs voxel v with arr[dst] at v+offset."""
    src, dst = [], []
    for n, step in zip(shape, offset):
        if step == 0:
            src.append(slice(0, n))
            dst.append(slice(0, n))
        elif step > 0:
            src.append(slice(0, n - step))
            dst.append(slice(step, n))
        else:
            src.append(slice(-step, n))
            dst.append(slice(0, n + step))
    return tuple(src), tuple(dst)


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


# ---------------------------------------------------------------------------
# GLCM
# ---------------------------------------------------------------------------

def glcm_matrices(disc: DiscretizedRegion) -> list[TextureMatrix]:
    """Symmetric co-occurrence count matrices, one per direction."""
    level_vol = disc.level_volume()
    ng = disc.n_levels
    out = []
    for d in DIRECTIONS_13:
        src, dst = _offset_slices(disc.shape, d)
        a = level_vol[src].ravel()
        b = level_vol[dst].ravel()
        valid = (a > 0) & (b > 0)
        ai, bi = a[valid] - 1, b[valid] - 1
        counts = np.bincount(ai * ng + bi, minlength=ng * ng).reshape(ng, ng)
        counts = counts + counts.T
        out.append(
            TextureMatrix("GLCM", counts.astype(np.float64), {"direction": d, "distance": 1})
        )
    return out


def _glcm_features_single(p: np.ndarray) -> np.ndarray:
    ng = p.shape[0]
    i = np.arange(1, ng + 1)
    ii, jj = np.meshgrid(i, i, indexing="ij")
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mu_x = float(np.sum(i * px))
    mu_y = float(np.sum(i * py))
    sd_x = float(np.sqrt(np.sum(px * (i - mu_x) ** 2)))
    sd_y = float(np.sqrt(np.sum(py * (i - mu_y) ** 2)))
    contrast = float(np.sum((ii - jj) ** 2 * p))
    if sd_x * sd_y > 0:
        correlation = float((np.sum(ii * jj * p) - mu_x * mu_y) / (sd_x * sd_y))
    else:
        correlation = 1.0
    homogeneity = float(np.sum(p / (1.0 + (ii - jj) ** 2)))
    energy = float(np.sum(p**2))
    entropy = _entropy_bits(p.ravel())
    dev = ii + jj - mu_x - mu_y
    shade = float(np.sum(dev**3 * p))
    prominence = float(np.sum(dev**4 * p))
    return np.array([contrast, correlation, homogeneity, energy, entropy, shade, prominence])


def glcm_features(disc: DiscretizedRegion) -> FeatureVector:
    """Direction-averaged co-occurrence features (in-mask pairs only)."""
    per_dir = []
    for tm in glcm_matrices(disc):
        total = tm.matrix.sum()
        if total == 0:
            continue
        per_dir.append(_glcm_features_single(tm.matrix / total))
    if per_dir:
        values = np.mean(per_dir, axis=0)
    else:
        values = np.array([0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    return FeatureVector(list(GLCM_NAMES), values)


# ---------------------------------------------------------------------------
# GLRLM
# ---------------------------------------------------------------------------

def _runs_along(disc: DiscretizedRegion, d) -> tuple[np.ndarray, np.ndarray]:
    """(level, length) of every maximal same-level run along direction d."""
    coords = disc.coords
    levels = disc.levels
    axis = next(a for a in range(3) if d[a] != 0)  # canonical: d[axis] == +1
    others = [a for a in range(3) if a != axis]
    pos = coords[:, axis]
    key1 = coords[:, others[0]] - d[others[0]] * pos
    key2 = coords[:, others[1]] - d[others[1]] * pos
    order = np.lexsort((pos, key2, key1))
    lv, po = levels[order], pos[order]
    k1, k2 = key1[order], key2[order]
    k = lv.size
    new_run = np.ones(k, dtype=bool)
    new_run[1:] = (
        (k1[1:] != k1[:-1])
        | (k2[1:] != k2[:-1])
        | (po[1:] != po[:-1] + 1)
        | (lv[1:] != lv[:-1])
    )
    starts = np.flatnonzero(new_run)
    lengths = np.diff(np.append(starts, k))
    return lv[starts], lengths


def glrlm_matrices(disc: DiscretizedRegion) -> list[TextureMatrix]:
    """Run-length count matrices R[level, length], one per direction."""
    ng = disc.n_levels
    out = []
    for d in DIRECTIONS_13:
        run_levels, run_lengths = _runs_along(disc, d)
        width = int(run_lengths.max())
        mat = np.zeros((ng, width))
        np.add.at(mat, (run_levels - 1, run_lengths - 1), 1.0)
        out.append(TextureMatrix("GLRLM", mat, {"direction": d}))
    return out


def _glrlm_features_single(mat: np.ndarray, n_voxels: int) -> np.ndarray:
    nr = mat.sum()
    j = np.arange(1, mat.shape[1] + 1)
    sre = float(np.sum(mat / j**2) / nr)
    lre = float(np.sum(mat * j**2) / nr)
    gln = float(np.sum(mat.sum(axis=1) ** 2) / nr)
    rln = float(np.sum(mat.sum(axis=0) ** 2) / nr)
    rp = float(nr / n_voxels)
    return np.array([sre, lre, gln, rln, rp])


def glrlm_features(disc: DiscretizedRegion) -> FeatureVector:
    """Direction-averaged run-length features."""
    per_dir = [
        _glrlm_features_single(tm.matrix, disc.voxel_count)
        for tm in glrlm_matrices(disc)
    ]
    return FeatureVector(list(GLRLM_NAMES), np.mean(per_dir, axis=0))


# ---------------------------------------------------------------------------
# GLSZM
# ---------------------------------------------------------------------------

def glszm_matrix(disc: DiscretizedRegion) -> TextureMatrix:
    """Zone count matrix S[level, size]; zones are 26-connected components."""
    level_vol = disc.level_volume()
    structure = np.ones((3, 3, 3), dtype=bool)
    zones: list[tuple[int, int]] = []
    for lvl in range(1, disc.n_levels + 1):
        labeled, n = ndimage.label(level_vol == lvl, structure=structure)
        if n:
            sizes = np.bincount(labeled.ravel())[1:]
            zones.extend((lvl, int(s)) for s in sizes)
    max_size = max(s for _, s in zones)
    mat = np.zeros((disc.n_levels, max_size))
    for lvl, size in zones:
        mat[lvl - 1, size - 1] += 1.0
    return TextureMatrix("GLSZM", mat, {"connectivity": 26})


def glszm_features(disc: DiscretizedRegion) -> FeatureVector:
    mat = glszm_matrix(disc).matrix
    nz = mat.sum()
    z = np.arange(1, mat.shape[1] + 1)
    sae = float(np.sum(mat / z**2) / nz)
    lae = float(np.sum(mat * z**2) / nz)
    entropy = _entropy_bits(mat.ravel() / nz)
    gln = float(np.sum(mat.sum(axis=1) ** 2) / nz)
    szn = float(np.sum(mat.sum(axis=0) ** 2) / nz)
    return FeatureVector(list(GLSZM_NAMES), np.array([sae, lae, entropy, gln, szn]))


# ---------------------------------------------------------------------------
# NGTDM
# ---------------------------------------------------------------------------

def ngtdm_table(disc: DiscretizedRegion) -> tuple[np.ndarray, np.ndarray]:
    """Per-level (s_i, n_i): summed |level - neighbourhood mean| and counts.

    Only voxels with at least one in-mask neighbour among the 26 contribute.
    """
    level_vol = disc.level_volume().astype(np.float64)
    in_mask = level_vol > 0
    nbr_sum = np.zeros(disc.shape)
    nbr_cnt = np.zeros(disc.shape)
    for d in ALL_OFFSETS_26:
        src, dst = _offset_slices(disc.shape, d)
        neighbour = level_vol[dst]
        inside = neighbour > 0
        nbr_sum[src] += np.where(inside, neighbour, 0.0)
        nbr_cnt[src] += inside
    valid = in_mask & (nbr_cnt > 0)
    diff = np.zeros(disc.shape)
    diff[valid] = np.abs(level_vol[valid] - nbr_sum[valid] / nbr_cnt[valid])
    idx = level_vol[valid].astype(np.int64) - 1
    s = np.bincount(idx, weights=diff[valid], minlength=disc.n_levels)
    n = np.bincount(idx, minlength=disc.n_levels).astype(np.float64)
    return s, n


def ngtdm_features(disc: DiscretizedRegion) -> FeatureVector:
    s, n = ngtdm_table(disc)
    n_vp = n.sum()
    if n_vp == 0:
        return FeatureVector(
            list(NGTDM_NAMES), np.array([NGTDM_COARSENESS_CAP, 0.0, 0.0, 0.0, 0.0])
        )
    p = n / n_vp
    i = np.arange(1, disc.n_levels + 1, dtype=np.float64)
    present = p > 0
    n_gp = int(np.count_nonzero(present))

    dens = float(np.sum(p * s))
    coarseness = min(NGTDM_COARSENESS_CAP, 1.0 / dens) if dens > 0 else NGTDM_COARSENESS_CAP

    ii, jj = np.meshgrid(i, i, indexing="ij")
    pi, pj = np.meshgrid(p, p, indexing="ij")
    both = np.outer(present, present)
    if n_gp > 1:
        pair_term = float(np.sum((pi * pj * (ii - jj) ** 2)[both]))
        contrast = pair_term / (n_gp * (n_gp - 1)) * float(s.sum()) / n_vp
    else:
        contrast = 0.0

    ipi = i * p
    busy_den = float(np.sum(np.abs(np.subtract.outer(ipi, ipi))[both]))
    busyness = dens / busy_den if busy_den > 0 else 0.0

    si, sj = np.meshgrid(p * s, p * s, indexing="ij")
    with np.errstate(invalid="ignore", divide="ignore"):
        cmplx_terms = np.abs(ii - jj) * (si + sj) / (pi + pj)
    complexity = float(np.sum(cmplx_terms[both])) / n_vp

    s_tot = float(s.sum())
    if s_tot > 0:
        strength = float(np.sum(((pi + pj) * (ii - jj) ** 2)[both])) / s_tot
    else:
        strength = 0.0

    return FeatureVector(
        list(NGTDM_NAMES), np.array([coarseness, contrast, busyness, complexity, strength])
    )


# ---------------------------------------------------------------------------
# GLDM
# ---------------------------------------------------------------------------

def gldm_matrix(disc: DiscretizedRegion, alpha: float = 0.0) -> TextureMatrix:
    """Dependence count matrix D[level, k+1].

    k(x) = number of 26-neighbours inside the mask whose gray level differs
    from x by at most alpha; every mask voxel contributes one count.
    """
    level_vol = disc.level_volume()
    in_mask = level_vol > 0
    dep = np.zeros(disc.shape, dtype=np.int64)
    for d in ALL_OFFSETS_26:
        src, dst = _offset_slices(disc.shape, d)
        qualifies = (level_vol[dst] > 0) & (
            np.abs(level_vol[dst] - level_vol[src]) <= alpha
        )
        dep[src] += qualifies
    k = dep[in_mask]
    lv = level_vol[in_mask]
    mat = np.zeros((disc.n_levels, int(k.max()) + 1))
    np.add.at(mat, (lv - 1, k), 1.0)
    return TextureMatrix("GLDM", mat, {"alpha": alpha, "connectivity": 26})


def gldm_features(disc: DiscretizedRegion, alpha: float = 0.0) -> FeatureVector:
    mat = gldm_matrix(disc, alpha).matrix
    nz = mat.sum()
    j = np.arange(1, mat.shape[1] + 1)  # dependence + 1
    sde = float(np.sum(mat / j**2) / nz)
    lde = float(np.sum(mat * j**2) / nz)
    entropy = _entropy_bits(mat.ravel() / nz)
    gln = float(np.sum(mat.sum(axis=1) ** 2) / nz)
    return FeatureVector(list(GLDM_NAMES), np.array([sde, lde, entropy, gln]))
