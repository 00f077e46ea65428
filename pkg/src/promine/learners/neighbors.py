"""k-nearest neighbors with z-scored numeric distance and mismatch distance
for discrete columns.

Boundary ties are split fractionally: rows strictly inside the k-th
distance vote fully, rows exactly at it share the remaining vote equally.
That keeps predictions invariant to training-row order.
"""

from __future__ import annotations

import numpy as np

from ..dataset import NUMERIC, Dataset
from .base import TrainedClassifier, encode_column, fit_level_map


class KNearestNeighbors(TrainedClassifier):
    algorithm = "knn"

    def __init__(self, seed: int = 0, k: int = 3) -> None:
        super().__init__(seed=seed)
        self.k = k

    def _fit(self, dataset: Dataset) -> None:
        self.stats_: dict[str, tuple[float, float]] = {}
        self.levels_map_ = fit_level_map(dataset)
        self.train_numeric_: dict[str, np.ndarray] = {}
        self.train_codes_: dict[str, np.ndarray] = {}
        for col in dataset.columns:
            if col.kind == NUMERIC:
                sd = float(col.values.std(ddof=0))
                mean = float(col.values.mean())
                self.stats_[col.name] = (mean, sd if sd > 0 else 1.0)
                self.train_numeric_[col.name] = (col.values - mean) / self.stats_[col.name][1]
            else:
                self.train_codes_[col.name] = encode_column(col, self.levels_map_[col.name])
        self.train_labels_ = dataset.target.copy()

    def _distances(self, dataset: Dataset) -> np.ndarray:
        n_train = len(self.train_labels_)
        dist = np.zeros((dataset.n_rows, n_train))
        for name, (mean, sd) in self.stats_.items():
            q = (dataset.column(name).values - mean) / sd
            dist += np.abs(q[:, None] - self.train_numeric_[name][None, :])
        for name, codes in self.train_codes_.items():
            q = encode_column(dataset.column(name), self.levels_map_[name])
            dist += (q[:, None] != codes[None, :]).astype(float)
        return dist

    def _predict_proba(self, dataset: Dataset) -> np.ndarray:
        dist = self._distances(dataset)
        k = min(self.k, dist.shape[1])
        out = np.empty((dataset.n_rows, 2))
        for i in range(dataset.n_rows):
            row = dist[i]
            kth = np.partition(row, k - 1)[k - 1]
            inner = row < kth
            boundary = row == kth
            votes = np.zeros(2)
            for cls in (0, 1):
                votes[cls] = (inner & (self.train_labels_ == cls)).sum()
            remaining = k - inner.sum()
            n_boundary = boundary.sum()
            if n_boundary:
                for cls in (0, 1):
                    votes[cls] += remaining * (boundary & (self.train_labels_ == cls)).sum() / n_boundary
            out[i] = votes / k
        return out

    def _fitted_doc(self) -> dict:
        return {
            "k": self.k,
            "stats": {k: list(v) for k, v in self.stats_.items()},
            "levels_map": {k: (list(v) if v is not None else None) for k, v in self.levels_map_.items()},
            "train_numeric": {k: v.tolist() for k, v in self.train_numeric_.items()},
            "train_codes": {k: v.tolist() for k, v in self.train_codes_.items()},
            "train_labels": self.train_labels_.tolist(),
        }

    def _load_fitted(self, doc: dict) -> None:
        self.k = doc["k"]
        self.stats_ = {k: (v[0], v[1]) for k, v in doc["stats"].items()}
        self.levels_map_ = {
            k: (tuple(v) if v is not None else None) for k, v in doc["levels_map"].items()
        }
        self.train_numeric_ = {k: np.asarray(v, dtype=float) for k, v in doc["train_numeric"].items()}
        self.train_codes_ = {k: np.asarray(v, dtype=int) for k, v in doc["train_codes"].items()}
        self.train_labels_ = np.asarray(doc["train_labels"], dtype=int)
