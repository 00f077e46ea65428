"""Random forest over the C4.5-style base tree: bootstrap rows plus a
log2-sized random feature subset at every split, unpruned trees, averaged
leaf distributions."""

from __future__ import annotations

import math

import numpy as np

from ..dataset import Dataset
from .base import TrainedClassifier, fit_level_map
from .tree import _Node, grow_tree, row_arrays, tree_predict_counts


class RandomForest(TrainedClassifier):
    algorithm = "random_forest"

    def __init__(self, seed: int = 0, n_trees: int = 30, bootstrap: bool = True) -> None:
        super().__init__(seed=seed)
        self.n_trees = n_trees
        self.bootstrap = bootstrap

    def _fit(self, dataset: Dataset) -> None:
        rng = np.random.default_rng(self.seed)
        self.levels_map_ = fit_level_map(dataset)
        n_features = len(dataset.columns)
        subset = min(n_features, int(math.ceil(math.log2(max(2, n_features)) + 1)))
        self.trees_: list[_Node] = []
        for _ in range(self.n_trees):
            tree_rng = np.random.default_rng(rng.integers(0, 2**63 - 1))
            if self.bootstrap:
                idx = tree_rng.integers(0, dataset.n_rows, size=dataset.n_rows)
                sample = dataset.take(idx)
            else:
                sample = dataset
            if sample.target.min() == sample.target.max():
                # Degenerate bootstrap draw: a root-only tree carries the prior.
                self.trees_.append(_Node(np.bincount(sample.target, minlength=2).astype(float)))
                continue
            self.trees_.append(
                grow_tree(
                    sample,
                    min_instances=1,
                    rng=tree_rng,
                    n_feature_sample=subset,
                )
            )

    def _predict_proba(self, dataset: Dataset) -> np.ndarray:
        arrays = row_arrays(dataset, self.levels_map_)
        out = np.zeros((dataset.n_rows, 2))
        for i in range(dataset.n_rows):
            row = {name: arr[i] for name, arr in arrays.items()}
            for tree in self.trees_:
                counts = tree_predict_counts(tree, row)
                total = counts.sum()
                out[i] += counts / total if total > 0 else np.array([0.5, 0.5])
        return out / len(self.trees_)

    def _fitted_doc(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "bootstrap": self.bootstrap,
            "levels_map": {k: (list(v) if v is not None else None) for k, v in self.levels_map_.items()},
            "trees": [t.to_doc() for t in self.trees_],
        }

    def _load_fitted(self, doc: dict) -> None:
        self.n_trees = doc["n_trees"]
        self.bootstrap = doc["bootstrap"]
        self.levels_map_ = {
            k: (tuple(v) if v is not None else None) for k, v in doc["levels_map"].items()
        }
        self.trees_ = [_Node.from_doc(t) for t in doc["trees"]]
