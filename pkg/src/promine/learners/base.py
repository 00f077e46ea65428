"""Shared classifier contract: probabilistic prediction over a fixed schema.

Every model fits on a Dataset whose target is binary, exposes
``predict_proba`` returning a (n, 2) row-stochastic matrix, and rejects
rows whose schema fingerprint differs from the one seen at fit time.
Class prediction breaks exact probability ties toward the negative class
and logs the event.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod

import numpy as np

from ..dataset import BINNED, CATEGORICAL, NUMERIC, Dataset, SchemaError

logger = logging.getLogger(__name__)


class LearnerError(ValueError):
    pass


class TrainedClassifier(ABC):
    """Base for every algorithm in the zoo."""

    algorithm: str = "abstract"

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed
        self.fingerprint: str | None = None
        self.classes_ = (0, 1)
        self._prior_only: np.ndarray | None = None

    # -- fitting ------------------------------------------------------------

    def fit(self, dataset: Dataset) -> "TrainedClassifier":
        if dataset.n_rows == 0:
            raise LearnerError("cannot fit on an empty dataset")
        self.fingerprint = dataset.schema_fingerprint()
        self.feature_names = dataset.feature_names
        counts = np.bincount(dataset.target, minlength=2).astype(float)
        self.class_counts_ = counts
        if counts.min() == 0:
            # Degenerate training data: fall back to a prior-only model.
            self._prior_only = counts / counts.sum()
            logger.warning("%s: single-class training data, fitted prior-only model", self.algorithm)
            return self
        self._prior_only = None
        self._fit(dataset)
        return self

    @abstractmethod
    def _fit(self, dataset: Dataset) -> None:
        ...

    # -- prediction ---------------------------------------------------------

    def predict_proba(self, dataset: Dataset) -> np.ndarray:
        self._check_schema(dataset)
        if self._prior_only is not None:
            return np.tile(self._prior_only, (dataset.n_rows, 1))
        probs = self._predict_proba(dataset)
        if not np.all(probs >= -1e-12) or not np.allclose(probs.sum(axis=1), 1.0, atol=1e-9):
            raise LearnerError(f"{self.algorithm}: produced an invalid distribution")
        return np.clip(probs, 0.0, 1.0)

    @abstractmethod
    def _predict_proba(self, dataset: Dataset) -> np.ndarray:
        ...

    def predict(self, dataset: Dataset) -> np.ndarray:
        probs = self.predict_proba(dataset)
        ties = probs[:, 0] == probs[:, 1]
        if ties.any():
            logger.info("%s: %d probability tie(s) broken toward the negative class",
                        self.algorithm, int(ties.sum()))
        return (probs[:, 1] > probs[:, 0]).astype(int)

    def _check_schema(self, dataset: Dataset) -> None:
        if self.fingerprint is None:
            raise LearnerError(f"{self.algorithm}: model is not fitted")
        if dataset.schema_fingerprint() != self.fingerprint:
            raise SchemaError(
                f"{self.algorithm}: rows do not match the training schema "
                f"(expected features {list(self.feature_names)})"
            )

    # -- serialization ------------------------------------------------------

    def _base_doc(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "fingerprint": self.fingerprint,
            "feature_names": list(self.feature_names),
            "class_counts": self.class_counts_.tolist(),
            "prior_only": None if self._prior_only is None else self._prior_only.tolist(),
        }

    def _load_base(self, doc: dict) -> None:
        self.seed = doc["seed"]
        self.fingerprint = doc["fingerprint"]
        self.feature_names = tuple(doc["feature_names"])
        self.class_counts_ = np.asarray(doc["class_counts"], dtype=float)
        prior = doc.get("prior_only")
        self._prior_only = None if prior is None else np.asarray(prior, dtype=float)

    def to_doc(self) -> dict:
        doc = self._base_doc()
        doc["fitted"] = {} if self._prior_only is not None else self._fitted_doc()
        return doc

    def _fitted_doc(self) -> dict:
        raise NotImplementedError(f"{self.algorithm} does not serialize")

    def _load_fitted(self, doc: dict) -> None:
        raise NotImplementedError(f"{self.algorithm} does not serialize")

    @classmethod
    def from_doc(cls, doc: dict) -> "TrainedClassifier":
        model = cls(seed=doc["seed"])
        model._load_base(doc)
        if model._prior_only is None:
            model._load_fitted(doc["fitted"])
        return model


# ---------------------------------------------------------------------------
# Numeric matrix encoding (one-hot categoricals, z-scored numerics)
# ---------------------------------------------------------------------------

class MatrixEncoder:
    """Maps mixed columns to a float matrix for the numeric-only learners.

    Numeric columns are optionally standardized with fit-time statistics;
    discrete columns one-hot encode over fit-time levels, with unseen levels
    mapping to the all-zero block.
    """

    def __init__(self, standardize: bool = False) -> None:
        self.standardize = standardize

    def fit(self, dataset: Dataset) -> "MatrixEncoder":
        self.spec: list[tuple[str, str, tuple]] = []
        self.levels: dict[str, tuple[str, ...] | None] = fit_level_map(dataset)
        self.width = 0
        for col in dataset.columns:
            if col.kind == NUMERIC:
                if self.standardize:
                    sd = float(col.values.std(ddof=0))
                    stats = (float(col.values.mean()), sd if sd > 0 else 1.0)
                else:
                    stats = (0.0, 1.0)
                self.spec.append((col.name, NUMERIC, stats))
                self.width += 1
            else:
                n_levels = col.n_levels
                self.spec.append((col.name, col.kind, (n_levels,)))
                self.width += n_levels
        return self

    def transform(self, dataset: Dataset) -> np.ndarray:
        out = np.zeros((dataset.n_rows, self.width))
        offset = 0
        for name, kind, extra in self.spec:
            col = dataset.column(name)
            if kind == NUMERIC:
                mean, sd = extra
                out[:, offset] = (col.values - mean) / sd
                offset += 1
            else:
                (n_levels,) = extra
                codes = encode_column(col, self.levels[name])
                codes = np.where(codes < n_levels, codes, -1)
                valid = codes >= 0
                out[np.flatnonzero(valid), offset + codes[valid]] = 1.0
                offset += n_levels
        return out

    def to_doc(self) -> dict:
        return {
            "standardize": self.standardize,
            "spec": [[name, kind, list(extra)] for name, kind, extra in self.spec],
            "levels": {k: (list(v) if v is not None else None) for k, v in self.levels.items()},
            "width": self.width,
        }

    @staticmethod
    def from_doc(doc: dict) -> "MatrixEncoder":
        enc = MatrixEncoder(standardize=doc["standardize"])
        enc.spec = [(name, kind, tuple(extra)) for name, kind, extra in doc["spec"]]
        enc.levels = {k: (tuple(v) if v is not None else None) for k, v in doc["levels"].items()}
        enc.width = doc["width"]
        return enc


def discrete_and_numeric(dataset: Dataset) -> tuple[list, list]:
    """Split columns into (discrete, numeric) lists."""
    disc = [c for c in dataset.columns if c.kind in (CATEGORICAL, BINNED)]
    num = [c for c in dataset.columns if c.kind == NUMERIC]
    return disc, num


def fit_level_map(dataset: Dataset) -> dict:
    """Fit-time level order per discrete column (None marks binned columns,
    whose integer ids are already aligned by the schema's cut points)."""
    levels: dict[str, tuple[str, ...] | None] = {}
    for col in dataset.columns:
        if col.kind == CATEGORICAL:
            levels[col.name] = col.levels
        elif col.kind == BINNED:
            levels[col.name] = None
    return levels


def encode_column(col, levels) -> np.ndarray:
    """Integer codes against the fit-time levels; unseen values code to -1."""
    if levels is None:
        return col.values.astype(int)
    index = {lvl: i for i, lvl in enumerate(levels)}
    return np.asarray([index.get(v, -1) for v in col.values], dtype=int)
