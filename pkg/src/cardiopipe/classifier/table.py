"""Feature tables (subjects x features) with CSV I/O and standardization.

CSV layout: header row `subject_id,<feature columns...>,label`; missing
feature values (empty structures) are empty cells and become NaN in memory.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass

import numpy as np

from ..errors import ColumnMismatch

_GEOM_RE = re.compile(r"_geom_")
_SV_RE = re.compile(r"_geom_sv(\d+)$")


@dataclass
class FeatureTable:
    subject_ids: list[str]
    columns: list[str]
    x: np.ndarray  # (n, d) float64, NaN = missing
    y: np.ndarray  # (n,) int, 0 healthy / 1 diseased

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        n, d = self.x.shape
        if len(self.subject_ids) != n or self.y.size != n:
            raise ValueError("row count mismatch between ids, features and labels")
        if len(self.columns) != d:
            raise ValueError("column count mismatch")
        if len(set(self.subject_ids)) != n:
            raise ValueError("subject ids must be unique")
        if not np.isin(self.y, (0, 1)).all():
            raise ValueError("labels must be binary 0/1")

    @property
    def n_subjects(self) -> int:
        return self.x.shape[0]

    def subset(self, rows) -> "FeatureTable":
        rows = np.asarray(rows)
        return FeatureTable(
            [self.subject_ids[i] for i in rows],
            list(self.columns),
            self.x[rows],
            self.y[rows],
        )

    def select_columns(self, names: list[str]) -> "FeatureTable":
        idx = [self.columns.index(n) for n in names]
        return FeatureTable(list(self.subject_ids), list(names), self.x[:, idx], self.y)

    def select_feature_set(self, selector: str, n_svd: int = 3) -> "FeatureTable":
        """Filter columns by feature family: radiomic, geometric or combined.

        Geometric singular-value columns beyond n_svd are dropped so the
        hyperparameter has effect on the combined and geometric sets.
        """
        if selector not in ("radiomic", "geometric", "combined"):
            raise ValueError(f"unknown feature set {selector!r}")
        keep = []
        for name in self.columns:
            is_geom = bool(_GEOM_RE.search(name))
            if selector == "radiomic" and is_geom:
                continue
            if selector == "geometric" and not is_geom:
                continue
            m = _SV_RE.search(name)
            if m and int(m.group(1)) > n_svd:
                continue
            keep.append(name)
        return self.select_columns(keep)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["subject_id"] + self.columns + ["label"])
            for i, sid in enumerate(self.subject_ids):
                cells = ["" if np.isnan(v) else repr(v) for v in self.x[i]]
                writer.writerow([sid] + cells + [int(self.y[i])])

    @staticmethod
    def read_csv(path) -> "FeatureTable":
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        header = rows[0]
        if header[0] != "subject_id" or header[-1] != "label":
            raise ValueError(f"{path}: expected subject_id ... label columns")
        columns = header[1:-1]
        ids, xs, ys = [], [], []
        for row in rows[1:]:
            if not row:
                continue
            ids.append(row[0])
            xs.append([float(c) if c != "" else np.nan for c in row[1:-1]])
            ys.append(int(row[-1]))
        return FeatureTable(ids, columns, np.array(xs, dtype=np.float64), np.array(ys))


def merge_tables(a: FeatureTable, b: FeatureTable) -> FeatureTable:
    """Column-wise merge of two tables over the same subjects (same order)."""
    if a.subject_ids != b.subject_ids:
        raise ColumnMismatch("tables cover different subjects")
    if not np.array_equal(a.y, b.y):
        raise ColumnMismatch("tables disagree on labels")
    return FeatureTable(
        list(a.subject_ids),
        list(a.columns) + list(b.columns),
        np.hstack([a.x, b.x]),
        a.y,
    )


@dataclass
class ScalerParams:
    """Train-fold column statistics: imputation means and z-score params."""

    mean: np.ndarray
    std: np.ndarray       # population std; 0 marks a zero-variance column
    fill: np.ndarray      # imputation value per column (train mean, 0 if all-NaN)
    columns: list[str]


def fit_scaler(train: FeatureTable) -> ScalerParams:
    x = train.x
    with np.errstate(invalid="ignore"):
        fill = np.nanmean(x, axis=0)
    fill = np.where(np.isnan(fill), 0.0, fill)
    imputed = np.where(np.isnan(x), fill, x)
    mean = imputed.mean(axis=0)
    std = imputed.std(axis=0)
    return ScalerParams(mean=mean, std=std, fill=fill, columns=list(train.columns))


def apply_scaler(params: ScalerParams, table: FeatureTable) -> FeatureTable:
    if list(table.columns) != params.columns:
        raise ColumnMismatch("table columns differ from scaler columns")
    x = np.where(np.isnan(table.x), params.fill, table.x)
    safe_std = np.where(params.std > 0, params.std, 1.0)
    z = (x - params.mean) / safe_std
    z[:, params.std == 0] = 0.0  # zero-variance columns carry no signal
    return FeatureTable(list(table.subject_ids), list(table.columns), z, table.y)


def standardize(train: FeatureTable, apply_to: FeatureTable) -> tuple[FeatureTable, ScalerParams]:
    """Z-score `apply_to` using statistics fitted on `train` only."""
    params = fit_scaler(train)
    return apply_scaler(params, apply_to), params
