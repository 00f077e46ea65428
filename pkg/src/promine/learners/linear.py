"""Iteratively reweighted logistic regression and the least-squares classifier."""

from __future__ import annotations

import numpy as np

from ..dataset import Dataset
from .base import MatrixEncoder, TrainedClassifier


class LogisticRegression(TrainedClassifier):
    """Newton / IRLS fit with a tiny L2 ridge and a hard iteration cap.

    On separable data the ridge keeps the Hessian invertible while the
    weights grow until the cap; training accuracy still reaches 1.0.
    """

    algorithm = "logistic"

    def __init__(self, seed: int = 0, l2: float = 1e-8, max_iter: int = 100, tol: float = 1e-10) -> None:
        super().__init__(seed=seed)
        self.l2 = l2
        self.max_iter = max_iter
        self.tol = tol

    def _fit(self, dataset: Dataset) -> None:
        self.encoder_ = MatrixEncoder(standardize=False).fit(dataset)
        x = self._design(dataset)
        y = dataset.target.astype(float)
        w = np.zeros(x.shape[1])
        ridge = self.l2 * np.eye(x.shape[1])
        ridge[-1, -1] = 0.0  # intercept unpenalized
        for _ in range(self.max_iter):
            p = _sigmoid(x @ w)
            grad = x.T @ (y - p) - self.l2 * np.append(w[:-1], 0.0)
            weights = np.maximum(p * (1.0 - p), 1e-12)
            hessian = (x * weights[:, None]).T @ x + ridge + 1e-12 * np.eye(x.shape[1])
            step = np.linalg.solve(hessian, grad)
            w = w + step
            if np.max(np.abs(step)) < self.tol:
                break
        self.weights_ = w

    def _design(self, dataset: Dataset) -> np.ndarray:
        x = self.encoder_.transform(dataset)
        return np.hstack([x, np.ones((x.shape[0], 1))])

    def _predict_proba(self, dataset: Dataset) -> np.ndarray:
        p1 = _sigmoid(self._design(dataset) @ self.weights_)
        return np.column_stack([1.0 - p1, p1])

    def _fitted_doc(self) -> dict:
        return {
            "l2": self.l2,
            "max_iter": self.max_iter,
            "encoder": self.encoder_.to_doc(),
            "weights": self.weights_.tolist(),
        }

    def _load_fitted(self, doc: dict) -> None:
        self.l2 = doc["l2"]
        self.max_iter = doc["max_iter"]
        self.encoder_ = MatrixEncoder.from_doc(doc["encoder"])
        self.weights_ = np.asarray(doc["weights"], dtype=float)


class LinearRegressionClassifier(TrainedClassifier):
    """Least squares on the 0/1 target; probability is the fit clipped to [0, 1]."""

    algorithm = "linreg_classifier"

    def __init__(self, seed: int = 0) -> None:
        super().__init__(seed=seed)

    def _fit(self, dataset: Dataset) -> None:
        self.encoder_ = MatrixEncoder(standardize=False).fit(dataset)
        x = self._design(dataset)
        y = dataset.target.astype(float)
        self.weights_, *_ = np.linalg.lstsq(x, y, rcond=None)

    def _design(self, dataset: Dataset) -> np.ndarray:
        x = self.encoder_.transform(dataset)
        return np.hstack([x, np.ones((x.shape[0], 1))])

    def _predict_proba(self, dataset: Dataset) -> np.ndarray:
        p1 = np.clip(self._design(dataset) @ self.weights_, 0.0, 1.0)
        return np.column_stack([1.0 - p1, p1])

    def _fitted_doc(self) -> dict:
        return {"encoder": self.encoder_.to_doc(), "weights": self.weights_.tolist()}

    def _load_fitted(self, doc: dict) -> None:
        self.encoder_ = MatrixEncoder.from_doc(doc["encoder"])
        self.weights_ = np.asarray(doc["weights"], dtype=float)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out
