"""Named feature vectors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class FeatureVector:
    """Ordered (name, value) pairs; NaN marks a not-available sentinel."""

    names: list[str] = field(default_factory=list)
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if len(self.names) != self.values.size:
            raise ValueError("names and values length mismatch")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(zip(self.names, self.values.tolist()))

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in self}

    def prefixed(self, prefix: str) -> "FeatureVector":
        return FeatureVector([prefix + n for n in self.names], self.values.copy())

    @staticmethod
    def concat(parts: list["FeatureVector"]) -> "FeatureVector":
        names: list[str] = []
        values: list[np.ndarray] = []
        for p in parts:
            names.extend(p.names)
            values.append(p.values)
        return FeatureVector(names, np.concatenate(values) if values else np.zeros(0))
