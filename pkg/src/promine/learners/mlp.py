"""Single-hidden-layer perceptron trained by full-batch gradient descent
with momentum and optional weight decay.

Batch gradients keep fitting invariant to training-row order; all
randomness sits in the seeded weight initialization.
"""

from __future__ import annotations

import math

import numpy as np

from ..dataset import Dataset
from .base import MatrixEncoder, TrainedClassifier

DECAY_LAMBDA = 1e-4


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def mlp_loss_and_grad(
    params: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray],
    x: np.ndarray,
    y_onehot: np.ndarray,
    lam: float,
) -> tuple[float, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """Mean cross-entropy plus L2 penalty on the weight matrices (not biases),
    with its exact gradient. Kept functional so finite differences can check it."""
    w1, b1, w2, b2 = params
    n = x.shape[0]
    a1 = _sigmoid(x @ w1 + b1)
    probs = _softmax(a1 @ w2 + b2)
    eps = 1e-12
    ce = -np.sum(y_onehot * np.log(probs + eps)) / n
    loss = ce + 0.5 * lam * (np.sum(w1 * w1) + np.sum(w2 * w2))

    dz2 = (probs - y_onehot) / n
    dw2 = a1.T @ dz2 + lam * w2
    db2 = dz2.sum(axis=0)
    da1 = dz2 @ w2.T
    dz1 = da1 * a1 * (1.0 - a1)
    dw1 = x.T @ dz1 + lam * w1
    db1 = dz1.sum(axis=0)
    return float(loss), (dw1, db1, dw2, db2)


class Mlp(TrainedClassifier):
    algorithm = "mlp"

    def __init__(
        self,
        seed: int = 0,
        hidden: int | None = None,
        learning_rate: float = 0.3,
        momentum: float = 0.2,
        epochs: int = 500,
        decay: bool = True,
    ) -> None:
        super().__init__(seed=seed)
        self.hidden = hidden
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.epochs = epochs
        self.decay = decay

    def _fit(self, dataset: Dataset) -> None:
        self.encoder_ = MatrixEncoder(standardize=True).fit(dataset)
        x = self.encoder_.transform(dataset)
        y = np.eye(2)[dataset.target]
        n_features = x.shape[1]
        n_hidden = self.hidden or math.ceil((n_features + 2) / 2)
        rng = np.random.default_rng(self.seed)
        w1 = rng.uniform(-0.5, 0.5, size=(n_features, n_hidden))
        b1 = rng.uniform(-0.5, 0.5, size=n_hidden)
        w2 = rng.uniform(-0.5, 0.5, size=(n_hidden, 2))
        b2 = rng.uniform(-0.5, 0.5, size=2)
        lam = DECAY_LAMBDA if self.decay else 0.0
        velocity = [np.zeros_like(p) for p in (w1, b1, w2, b2)]
        params = [w1, b1, w2, b2]
        for _ in range(self.epochs):
            _, grads = mlp_loss_and_grad(tuple(params), x, y, lam)
            for i, g in enumerate(grads):
                velocity[i] = self.momentum * velocity[i] - self.learning_rate * g
                params[i] = params[i] + velocity[i]
        self.params_ = tuple(params)

    def _predict_proba(self, dataset: Dataset) -> np.ndarray:
        w1, b1, w2, b2 = self.params_
        x = self.encoder_.transform(dataset)
        return _softmax(_sigmoid(x @ w1 + b1) @ w2 + b2)

    def _fitted_doc(self) -> dict:
        return {
            "hidden": self.hidden,
            "learning_rate": self.learning_rate,
            "momentum": self.momentum,
            "epochs": self.epochs,
            "decay": self.decay,
            "encoder": self.encoder_.to_doc(),
            "params": [p.tolist() for p in self.params_],
        }

    def _load_fitted(self, doc: dict) -> None:
        self.hidden = doc["hidden"]
        self.learning_rate = doc["learning_rate"]
        self.momentum = doc["momentum"]
        self.epochs = doc["epochs"]
        self.decay = doc["decay"]
        self.encoder_ = MatrixEncoder.from_doc(doc["encoder"])
        self.params_ = tuple(np.asarray(p, dtype=float) for p in doc["params"])
