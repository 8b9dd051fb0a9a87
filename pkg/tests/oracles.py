"""Independent brute-force oracles.

Everything here recomputes features straight from their definitions with
plain Python loops over voxels, pairs, runs, zones and neighbourhoods. No
code is shared with the library implementations; agreement between the two
is what the oracle tests assert.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np

# 13 canonical distance-1 directions (first nonzero component positive),
# sorted — mirrors the documented direction set.
def directions_13():
    out = []
    for d in product((-1, 0, 1), repeat=3):
        if d == (0, 0, 0):
            continue
        first = next(c for c in d if c != 0)
        if first > 0:
            out.append(d)
    return sorted(out)


def offsets_26():
    return [d for d in product((-1, 0, 1), repeat=3) if d != (0, 0, 0)]


def in_bounds(v, shape):
    return all(0 <= v[a] < shape[a] for a in range(3))


def levels_grid(levels, coords, shape):
    """Dict voxel -> gray level for the masked region."""
    return {tuple(c): int(l) for c, l in zip(coords, levels)}


# ---------------------------------------------------------------------------
# First order
# ---------------------------------------------------------------------------

def first_order_oracle(intensities, levels):
    x = [float(v) for v in intensities]
    n = len(x)
    mean = sum(x) / n
    var = sum((v - mean) ** 2 for v in x) / n
    if var > 0:
        sd = math.sqrt(var)
        skew = sum((v - mean) ** 3 for v in x) / n / sd**3
        kurt = sum((v - mean) ** 4 for v in x) / n / var**2
    else:
        skew = 0.0
        kurt = 0.0
    counts = {}
    for l in levels:
        counts[int(l)] = counts.get(int(l), 0) + 1
    entropy = -sum((c / n) * math.log2(c / n) for c in counts.values())
    energy = sum(v * v for v in x)
    return {
        "Mean": mean,
        "Variance": var,
        "Skewness": skew,
        "Kurtosis": kurt,
        "Entropy": entropy,
        "Minimum": min(x),
        "Maximum": max(x),
        "Median": float(np.median(np.array(x))),
        "Energy": energy,
        "RootMeanSquared": math.sqrt(energy / n),
    }


# ---------------------------------------------------------------------------
# Shape
# ---------------------------------------------------------------------------

def shape_oracle(mask, spacing):
    """Voxel-by-voxel recomputation of all ten shape descriptors."""
    sx, sy, sz = spacing
    vox = [tuple(v) for v in np.argwhere(mask)]
    voxset = set(vox)
    shape = mask.shape
    n = len(vox)

    volume = n * sx * sy * sz
    face_area = {0: sy * sz, 1: sx * sz, 2: sx * sy}
    area = 0.0
    for v in vox:
        for axis in range(3):
            for sign in (-1, 1):
                w = list(v)
                w[axis] += sign
                w = tuple(w)
                if not in_bounds(w, shape) or w not in voxset:
                    area += face_area[axis]
    sphericity = math.pi ** (1 / 3) * (6 * volume) ** (2 / 3) / area
    compactness = 36 * math.pi * volume**2 / area**3

    pts = np.array(vox, dtype=float) * np.array(spacing)
    mean = pts.mean(axis=0)
    cov = np.zeros((3, 3))
    for p in pts:
        d = p - mean
        cov += np.outer(d, d)
    cov /= n
    eig = sorted(np.linalg.eigvalsh(cov), reverse=True)
    l1, l2, l3 = (max(e, 0.0) for e in eig)
    elong = math.sqrt(l2 / l1) if l1 > 0 else 1.0
    flat = math.sqrt(l3 / l1) if l1 > 0 else 1.0

    surf = []
    for v in vox:
        exposed = False
        for axis in range(3):
            for sign in (-1, 1):
                w = list(v)
                w[axis] += sign
                w = tuple(w)
                if not in_bounds(w, shape) or w not in voxset:
                    exposed = True
        if exposed:
            surf.append(np.array(v, dtype=float) * np.array(spacing))
    diam = 0.0
    for i in range(len(surf)):
        for j in range(i + 1, len(surf)):
            diam = max(diam, float(np.linalg.norm(surf[i] - surf[j])))

    return {
        "VoxelVolume": volume,
        "MeshSurfaceArea": area,
        "Sphericity": sphericity,
        "Compactness": compactness,
        "Elongation": elong,
        "Flatness": flat,
        "MajorAxisLength": 4 * math.sqrt(l1),
        "MinorAxisLength": 4 * math.sqrt(l2),
        "LeastAxisLength": 4 * math.sqrt(l3),
        "Maximum3DDiameter": diam,
    }


# ---------------------------------------------------------------------------
# GLCM
# ---------------------------------------------------------------------------

def glcm_oracle(levels, coords, shape, n_levels):
    grid = levels_grid(levels, coords, shape)
    per_dir = []
    for d in directions_13():
        P = np.zeros((n_levels, n_levels))
        for v, li in grid.items():
            w = (v[0] + d[0], v[1] + d[1], v[2] + d[2])
            if w in grid:
                lj = grid[w]
                P[li - 1, lj - 1] += 1
                P[lj - 1, li - 1] += 1
        total = P.sum()
        if total == 0:
            continue
        p = P / total
        contrast = correlation_num = homog = energy = entropy = 0.0
        mu_x = mu_y = 0.0
        for i in range(n_levels):
            for j in range(n_levels):
                mu_x += (i + 1) * p[i, j]
                mu_y += (j + 1) * p[i, j]
        var_x = var_y = 0.0
        for i in range(n_levels):
            for j in range(n_levels):
                var_x += p[i, j] * (i + 1 - mu_x) ** 2
                var_y += p[i, j] * (j + 1 - mu_y) ** 2
        shade = prom = 0.0
        for i in range(n_levels):
            for j in range(n_levels):
                pij = p[i, j]
                contrast += (i - j) ** 2 * pij
                correlation_num += (i + 1) * (j + 1) * pij
                homog += pij / (1 + (i - j) ** 2)
                energy += pij**2
                if pij > 0:
                    entropy -= pij * math.log2(pij)
                dev = (i + 1) + (j + 1) - mu_x - mu_y
                shade += dev**3 * pij
                prom += dev**4 * pij
        sd = math.sqrt(var_x) * math.sqrt(var_y)
        corr = (correlation_num - mu_x * mu_y) / sd if sd > 0 else 1.0
        per_dir.append([contrast, corr, homog, energy, entropy, shade, prom])
    if not per_dir:
        vals = [0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0]
    else:
        vals = np.mean(per_dir, axis=0).tolist()
    names = ["Contrast", "Correlation", "Homogeneity", "Energy", "Entropy",
             "ClusterShade", "ClusterProminence"]
    return dict(zip(names, vals))


# ---------------------------------------------------------------------------
# GLRLM
# ---------------------------------------------------------------------------

def glrlm_runs_oracle(levels, coords, shape, direction):
    """Enumerate maximal same-level runs along one direction."""
    grid = levels_grid(levels, coords, shape)
    d = direction
    runs = []
    for v, li in grid.items():
        prev = (v[0] - d[0], v[1] - d[1], v[2] - d[2])
        if prev in grid and grid[prev] == li:
            continue  # not a run start
        length = 1
        w = (v[0] + d[0], v[1] + d[1], v[2] + d[2])
        while w in grid and grid[w] == li:
            length += 1
            w = (w[0] + d[0], w[1] + d[1], w[2] + d[2])
        runs.append((li, length))
    return runs


def glrlm_oracle(levels, coords, shape, n_levels):
    n_vox = len(levels)
    per_dir = []
    for d in directions_13():
        runs = glrlm_runs_oracle(levels, coords, shape, d)
        nr = len(runs)
        sre = sum(1.0 / l**2 for _, l in runs) / nr
        lre = sum(float(l**2) for _, l in runs) / nr
        by_level = {}
        by_len = {}
        for li, l in runs:
            by_level[li] = by_level.get(li, 0) + 1
            by_len[l] = by_len.get(l, 0) + 1
        gln = sum(c**2 for c in by_level.values()) / nr
        rln = sum(c**2 for c in by_len.values()) / nr
        rp = nr / n_vox
        per_dir.append([sre, lre, gln, rln, rp])
    vals = np.mean(per_dir, axis=0).tolist()
    names = ["ShortRunEmphasis", "LongRunEmphasis", "GrayLevelNonUniformity",
             "RunLengthNonUniformity", "RunPercentage"]
    return dict(zip(names, vals))


# ---------------------------------------------------------------------------
# GLSZM
# ---------------------------------------------------------------------------

def glszm_zones_oracle(levels, coords, shape):
    """Flood-fill zones of equal level under 26-connectivity."""
    grid = levels_grid(levels, coords, shape)
    seen = set()
    zones = []
    for start in sorted(grid):
        if start in seen:
            continue
        lvl = grid[start]
        stack = [start]
        seen.add(start)
        size = 0
        while stack:
            v = stack.pop()
            size += 1
            for d in offsets_26():
                w = (v[0] + d[0], v[1] + d[1], v[2] + d[2])
                if w in grid and w not in seen and grid[w] == lvl:
                    seen.add(w)
                    stack.append(w)
        zones.append((lvl, size))
    return zones


def glszm_oracle(levels, coords, shape, n_levels):
    zones = glszm_zones_oracle(levels, coords, shape)
    nz = len(zones)
    sae = sum(1.0 / s**2 for _, s in zones) / nz
    lae = sum(float(s**2) for _, s in zones) / nz
    cell = {}
    for lvl, s in zones:
        cell[(lvl, s)] = cell.get((lvl, s), 0) + 1
    entropy = -sum((c / nz) * math.log2(c / nz) for c in cell.values())
    by_level = {}
    by_size = {}
    for lvl, s in zones:
        by_level[lvl] = by_level.get(lvl, 0) + 1
        by_size[s] = by_size.get(s, 0) + 1
    gln = sum(c**2 for c in by_level.values()) / nz
    szn = sum(c**2 for c in by_size.values()) / nz
    names = ["SmallAreaEmphasis", "LargeAreaEmphasis", "ZoneEntropy",
             "GrayLevelNonUniformity", "SizeZoneNonUniformity"]
    return dict(zip(names, [sae, lae, entropy, gln, szn]))


# ---------------------------------------------------------------------------
# NGTDM
# ---------------------------------------------------------------------------

def ngtdm_oracle_table(levels, coords, shape, n_levels):
    grid = levels_grid(levels, coords, shape)
    s = [0.0] * n_levels
    n = [0] * n_levels
    for v, li in grid.items():
        nbrs = []
        for d in offsets_26():
            w = (v[0] + d[0], v[1] + d[1], v[2] + d[2])
            if w in grid:
                nbrs.append(grid[w])
        if nbrs:
            a = sum(nbrs) / len(nbrs)
            s[li - 1] += abs(li - a)
            n[li - 1] += 1
    return s, n


def ngtdm_oracle(levels, coords, shape, n_levels, cap=1e6):
    s, n = ngtdm_oracle_table(levels, coords, shape, n_levels)
    n_vp = sum(n)
    names = ["Coarseness", "Contrast", "Busyness", "Complexity", "Strength"]
    if n_vp == 0:
        return dict(zip(names, [cap, 0.0, 0.0, 0.0, 0.0]))
    p = [c / n_vp for c in n]
    present = [i for i in range(n_levels) if p[i] > 0]
    n_gp = len(present)

    dens = sum(p[i] * s[i] for i in range(n_levels))
    coarseness = min(cap, 1.0 / dens) if dens > 0 else cap

    if n_gp > 1:
        pair = sum(
            p[i] * p[j] * (i - j) ** 2 for i in present for j in present
        )
        contrast = pair / (n_gp * (n_gp - 1)) * sum(s) / n_vp
    else:
        contrast = 0.0

    busy_den = sum(
        abs((i + 1) * p[i] - (j + 1) * p[j]) for i in present for j in present
    )
    busyness = dens / busy_den if busy_den > 0 else 0.0

    complexity = sum(
        abs(i - j) * (p[i] * s[i] + p[j] * s[j]) / (p[i] + p[j])
        for i in present
        for j in present
    ) / n_vp

    s_tot = sum(s)
    if s_tot > 0:
        strength = sum(
            (p[i] + p[j]) * (i - j) ** 2 for i in present for j in present
        ) / s_tot
    else:
        strength = 0.0
    return dict(zip(names, [coarseness, contrast, busyness, complexity, strength]))


# ---------------------------------------------------------------------------
# GLDM
# ---------------------------------------------------------------------------

def gldm_oracle(levels, coords, shape, n_levels, alpha=0.0):
    grid = levels_grid(levels, coords, shape)
    deps = []
    for v, li in grid.items():
        k = 0
        for d in offsets_26():
            w = (v[0] + d[0], v[1] + d[1], v[2] + d[2])
            if w in grid and abs(grid[w] - li) <= alpha:
                k += 1
        deps.append((li, k))
    nz = len(deps)
    sde = sum(1.0 / (k + 1) ** 2 for _, k in deps) / nz
    lde = sum(float((k + 1) ** 2) for _, k in deps) / nz
    cell = {}
    by_level = {}
    for li, k in deps:
        cell[(li, k)] = cell.get((li, k), 0) + 1
        by_level[li] = by_level.get(li, 0) + 1
    entropy = -sum((c / nz) * math.log2(c / nz) for c in cell.values())
    gln = sum(c**2 for c in by_level.values()) / nz
    names = ["SmallDependenceEmphasis", "LargeDependenceEmphasis",
             "DependenceEntropy", "GrayLevelNonUniformity"]
    return dict(zip(names, [sde, lde, entropy, gln]))


# ---------------------------------------------------------------------------
# Surface distances (all-pairs)
# ---------------------------------------------------------------------------

def surface_voxels_oracle(mask):
    """6-connectivity boundary voxels of a binary mask."""
    out = []
    voxset = {tuple(v) for v in np.argwhere(mask)}
    for v in sorted(voxset):
        for axis in range(3):
            for sign in (-1, 1):
                w = list(v)
                w[axis] += sign
                w = tuple(w)
                if not in_bounds(w, mask.shape) or w not in voxset:
                    out.append(v)
                    break
            else:
                continue
            break
    return out


def surface_distance_oracle(mask_a, mask_b, spacing):
    """All-pairs HD / HD95 / ASD between 6-connectivity boundary sets."""
    sp = np.asarray(spacing, dtype=float)
    pa = np.array(surface_voxels_oracle(mask_a), dtype=float) * sp
    pb = np.array(surface_voxels_oracle(mask_b), dtype=float) * sp
    d_ab = []
    for p in pa:
        d_ab.append(min(float(np.linalg.norm(p - q)) for q in pb))
    d_ba = []
    for q in pb:
        d_ba.append(min(float(np.linalg.norm(q - p)) for p in pa))
    pooled = np.array(d_ab + d_ba)
    hd = float(max(max(d_ab), max(d_ba)))
    hd95 = float(np.percentile(pooled, 95))
    asd = float(pooled.mean())
    return hd, hd95, asd


# ---------------------------------------------------------------------------
# Misc numeric oracles
# ---------------------------------------------------------------------------

def trilinear_oracle(arr, x, y, z):
    """Pointwise trilinear interpolation with edge clamping."""
    nx, ny, nz = arr.shape
    x = min(max(x, 0.0), nx - 1.0)
    y = min(max(y, 0.0), ny - 1.0)
    z = min(max(z, 0.0), nz - 1.0)
    x0, y0, z0 = int(math.floor(x)), int(math.floor(y)), int(math.floor(z))
    x1, y1, z1 = min(x0 + 1, nx - 1), min(y0 + 1, ny - 1), min(z0 + 1, nz - 1)
    fx, fy, fz = x - x0, y - y0, z - z0
    val = 0.0
    for ix, wx in ((x0, 1 - fx), (x1, fx)):
        for iy, wy in ((y0, 1 - fy), (y1, fy)):
            for iz, wz in ((z0, 1 - fz), (z1, fz)):
                if wx and wy and wz:
                    val += wx * wy * wz * arr[ix, iy, iz]
    return val


def gram_singular_values_oracle(matrix):
    """Singular values of a K x 3 matrix via its 3 x 3 Gram matrix."""
    m = np.asarray(matrix, dtype=float)
    gram = m.T @ m
    eig = np.linalg.eigvalsh(gram)[::-1]
    return np.sqrt(np.clip(eig, 0.0, None))
