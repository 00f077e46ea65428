"""Naive Bayes and averaged one-dependence estimators.

Count-based likelihoods use Laplace smoothing with alpha = 1; class priors
are plain relative frequencies. Numeric features get Gaussian likelihoods
in Naive Bayes; the one-dependence model requires discrete features and
discretizes numerics on the fly against the training labels.
"""

from __future__ import annotations

import logging

import numpy as np

from ..dataset import BINNED, CATEGORICAL, NUMERIC, Column, Dataset
from ..preprocess import apply_cuts, caim_discretize
from .base import LearnerError, TrainedClassifier, encode_column, fit_level_map

logger = logging.getLogger(__name__)

ALPHA = 1.0
VAR_FLOOR = 1e-9


class NaiveBayes(TrainedClassifier):
    """Independent per-feature likelihoods: counts for discrete columns,
    Gaussians for numeric ones."""

    algorithm = "naive_bayes"

    def __init__(self, seed: int = 0, alpha: float = ALPHA) -> None:
        super().__init__(seed=seed)
        self.alpha = alpha

    def _fit(self, dataset: Dataset) -> None:
        y = dataset.target
        self.priors_ = self.class_counts_ / self.class_counts_.sum()
        self.levels_map_ = fit_level_map(dataset)
        self.tables_: dict[str, np.ndarray] = {}
        self.gaussians_: dict[str, np.ndarray] = {}
        for col in dataset.columns:
            if col.kind == NUMERIC:
                params = np.zeros((2, 2))
                for cls in (0, 1):
                    values = col.values[y == cls]
                    params[cls, 0] = values.mean()
                    params[cls, 1] = max(values.var(ddof=0), VAR_FLOOR)
                self.gaussians_[col.name] = params
            else:
                codes = encode_column(col, self.levels_map_[col.name])
                n_levels = col.n_levels
                table = np.zeros((2, n_levels))
                for cls in (0, 1):
                    table[cls] = np.bincount(codes[y == cls], minlength=n_levels)
                self.tables_[col.name] = table

    def _joint_log_likelihood(self, dataset: Dataset) -> np.ndarray:
        jll = np.tile(np.log(self.priors_), (dataset.n_rows, 1))
        for col in dataset.columns:
            if col.name in self.gaussians_:
                params = self.gaussians_[col.name]
                for cls in (0, 1):
                    mean, var = params[cls]
                    jll[:, cls] += -0.5 * (np.log(2.0 * np.pi * var) + (col.values - mean) ** 2 / var)
            else:
                table = self.tables_[col.name]
                counts = table.sum(axis=1, keepdims=True)
                loglik = np.log(table + self.alpha) - np.log(counts + self.alpha * table.shape[1])
                codes = encode_column(col, self.levels_map_[col.name])
                known = (codes >= 0) & (codes < table.shape[1])
                if not known.all():
                    logger.info("naive_bayes: %d unseen level(s) in %s treated as prior-only",
                                int((~known).sum()), col.name)
                for cls in (0, 1):
                    jll[known, cls] += loglik[cls, codes[known]]
        return jll

    def _predict_proba(self, dataset: Dataset) -> np.ndarray:
        jll = self._joint_log_likelihood(dataset)
        jll -= jll.max(axis=1, keepdims=True)
        probs = np.exp(jll)
        return probs / probs.sum(axis=1, keepdims=True)

    def _fitted_doc(self) -> dict:
        return {
            "alpha": self.alpha,
            "priors": self.priors_.tolist(),
            "levels_map": {k: (list(v) if v is not None else None) for k, v in self.levels_map_.items()},
            "tables": {k: v.tolist() for k, v in self.tables_.items()},
            "gaussians": {k: v.tolist() for k, v in self.gaussians_.items()},
        }

    def _load_fitted(self, doc: dict) -> None:
        self.alpha = doc["alpha"]
        self.priors_ = np.asarray(doc["priors"], dtype=float)
        self.levels_map_ = {
            k: (tuple(v) if v is not None else None) for k, v in doc["levels_map"].items()
        }
        self.tables_ = {k: np.asarray(v, dtype=float) for k, v in doc["tables"].items()}
        self.gaussians_ = {k: np.asarray(v, dtype=float) for k, v in doc["gaussians"].items()}


class Aode(TrainedClassifier):
    """Average of one-dependence estimators, one per parent feature.

    Each estimator models P(class, parent) * prod_j P(child_j | class,
    parent), with the class-parent joint factored exactly as Naive Bayes
    does (plain prior times smoothed likelihood), so on a single-feature
    dataset the average degenerates to Naive Bayes predictions.
    """

    algorithm = "aode"

    def __init__(self, seed: int = 0, alpha: float = ALPHA) -> None:
        super().__init__(seed=seed)
        self.alpha = alpha

    def _fit(self, dataset: Dataset) -> None:
        y = dataset.target
        self.cuts_: dict[str, tuple[float, ...]] = {}
        self.levels_map_ = fit_level_map(dataset)
        codes = {}
        levels = {}
        for col in dataset.columns:
            if col.kind == NUMERIC:
                cuts = caim_discretize(col.values, y).cuts
                self.cuts_[col.name] = cuts
                codes[col.name] = apply_cuts(col.values, cuts)
                levels[col.name] = len(cuts) + 1
            else:
                codes[col.name] = encode_column(col, self.levels_map_[col.name])
                levels[col.name] = col.n_levels
        self.levels_ = levels
        self.priors_ = self.class_counts_ / self.class_counts_.sum()

        names = list(dataset.feature_names)
        self.parent_tables_: dict[str, np.ndarray] = {}
        self.pair_tables_: dict[tuple[str, str], np.ndarray] = {}
        for p in names:
            vp = levels[p]
            table = np.zeros((2, vp))
            for cls in (0, 1):
                table[cls] = np.bincount(codes[p][y == cls], minlength=vp)
            self.parent_tables_[p] = table
        for i, p in enumerate(names):
            for j, c in enumerate(names):
                if i == j:
                    continue
                vp, vc = levels[p], levels[c]
                flat = (codes[p] * vc + codes[c]) + y * (vp * vc)
                counts = np.bincount(flat, minlength=2 * vp * vc).reshape(2, vp, vc)
                self.pair_tables_[(p, c)] = counts.astype(float)

    def _encode(self, dataset: Dataset) -> dict[str, np.ndarray]:
        out = {}
        for col in dataset.columns:
            if col.name in self.cuts_:
                out[col.name] = apply_cuts(col.values, self.cuts_[col.name])
            else:
                codes = encode_column(col, self.levels_map_[col.name])
                out[col.name] = np.where(codes < self.levels_[col.name], codes, -1)
        return out

    def _predict_proba(self, dataset: Dataset) -> np.ndarray:
        codes = self._encode(dataset)
        names = list(self.feature_names)
        n = dataset.n_rows
        # Estimators are averaged on the probability scale; the smoothed
        # factors are bounded well away from zero, so no log-sum-exp needed.
        joint = np.zeros((n, 2))
        n_parents = np.zeros(n)
        class_totals = self.class_counts_
        for p in names:
            pv = codes[p]
            parent_table = self.parent_tables_[p]
            vp = self.levels_[p]
            mask = pv >= 0
            if mask.any():
                observed = parent_table[:, pv[mask]].sum(axis=0) > 0
                full = np.zeros(n, dtype=bool)
                full[np.flatnonzero(mask)[observed]] = True
                mask = full
            if not mask.any():
                continue  # unseen parent value everywhere: skip this estimator
            pvm = pv[mask]
            log_est = np.zeros((int(mask.sum()), 2))
            for cls in (0, 1):
                parent_count = parent_table[cls, pvm]
                log_est[:, cls] = np.log(self.priors_[cls]) + np.log(
                    (parent_count + self.alpha) / (class_totals[cls] + self.alpha * vp)
                )
            for c in names:
                if c == p:
                    continue
                cv = codes[c][mask]
                vc = self.levels_[c]
                pair = self.pair_tables_[(p, c)]
                known = cv >= 0  # unseen child level: prior-only contribution
                if not known.any():
                    continue
                for cls in (0, 1):
                    parent_count = parent_table[cls, pvm[known]]
                    log_est[known, cls] += np.log(
                        (pair[cls, pvm[known], cv[known]] + self.alpha)
                        / (parent_count + self.alpha * vc)
                    )
            joint[mask] += np.exp(log_est)
            n_parents[mask] += 1

        out = np.tile(self.priors_, (n, 1))
        has = n_parents > 0
        totals = joint[has].sum(axis=1, keepdims=True)
        out[has] = joint[has] / totals
        return out

    def _fitted_doc(self) -> dict:
        return {
            "alpha": self.alpha,
            "priors": self.priors_.tolist(),
            "levels": self.levels_,
            "levels_map": {k: (list(v) if v is not None else None) for k, v in self.levels_map_.items()},
            "cuts": {k: list(v) for k, v in self.cuts_.items()},
            "parent_tables": {k: v.tolist() for k, v in self.parent_tables_.items()},
            "pair_tables": {f"{p}\t{c}": v.tolist() for (p, c), v in self.pair_tables_.items()},
        }

    def _load_fitted(self, doc: dict) -> None:
        self.alpha = doc["alpha"]
        self.priors_ = np.asarray(doc["priors"], dtype=float)
        self.levels_ = {k: int(v) for k, v in doc["levels"].items()}
        self.levels_map_ = {
            k: (tuple(v) if v is not None else None) for k, v in doc["levels_map"].items()
        }
        self.cuts_ = {k: tuple(v) for k, v in doc["cuts"].items()}
        self.parent_tables_ = {k: np.asarray(v, dtype=float) for k, v in doc["parent_tables"].items()}
        self.pair_tables_ = {}
        for key, v in doc["pair_tables"].items():
            p, c = key.split("\t")
            self.pair_tables_[(p, c)] = np.asarray(v, dtype=float)
