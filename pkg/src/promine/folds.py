"""Stratified fold assignment shared by the CV harness, wrapper selection
and ensemble construction."""

from __future__ import annotations

import numpy as np


def stratified_folds(labels: np.ndarray, n_folds: int, seed) -> np.ndarray:
    """Assign each row to one of ``n_folds`` folds, stratified on the label.

    Within each class the shuffled indices are dealt round-robin, with the
    dealing start rotated between classes so the remainder spreads across
    folds (fold sizes differ by at most one per class and stay balanced
    overall). Deterministic given the seed.
    """
    labels = np.asarray(labels)
    n = len(labels)
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    if n < n_folds:
        raise ValueError(f"cannot split {n} rows into {n_folds} folds")
    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=int)
    start = 0
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        for j, row in enumerate(idx):
            assignment[row] = (start + j) % n_folds
        start = (start + len(idx)) % n_folds
    return assignment
