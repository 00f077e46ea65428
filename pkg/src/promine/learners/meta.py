"""Meta-models: greedy AUC-optimized ensemble selection and max-probability
committee voting over the standard five-member library (naive Bayes, MLP,
random forest, kNN, logistic regression)."""

from __future__ import annotations

import logging

import numpy as np

from ..dataset import Dataset
from ..folds import stratified_folds
from ..metrics import auc
from .base import LearnerError, TrainedClassifier

logger = logging.getLogger(__name__)

DEFAULT_COMMITTEE = ("naive_bayes", "mlp", "random_forest", "knn", "logistic")


def _member_seed(seed: int, index: int) -> int:
    return (seed * 1_000_003 + 7919 * (index + 1)) % (2**31 - 1)


def ensemble_select(
    validation_probs: dict,
    target: np.ndarray,
    max_steps: int = 10,
) -> tuple[list[str], list[tuple[int, str, float]]]:
    """Greedy forward selection with replacement over a model library.

    ``validation_probs`` maps model name to its validation-set positive-class
    probabilities. Each step adds the model whose inclusion in the uniform
    probability average maximizes AUC; repeats act as weighting. Stops after
    ``max_steps`` or when no addition strictly improves. Returns the picks
    (with multiplicity, in order) and the (step, name, auc) trace.
    """
    if not validation_probs:
        raise LearnerError("ensemble selection needs a nonempty model library")
    target = np.asarray(target, dtype=int)
    names = list(validation_probs)
    picks: list[str] = []
    trace: list[tuple[int, str, float]] = []
    summed = np.zeros(len(target))
    current_auc = -np.inf
    for step in range(max_steps):
        best_name = None
        best_auc = -np.inf
        for name in names:
            candidate_auc = auc((summed + validation_probs[name]) / (len(picks) + 1), target)
            if candidate_auc > best_auc + 1e-12:
                best_auc = candidate_auc
                best_name = name
        if picks and best_auc <= current_auc + 1e-12:
            break
        picks.append(best_name)
        summed += validation_probs[best_name]
        current_auc = best_auc
        trace.append((step + 1, best_name, float(best_auc)))
    return picks, trace


def _make(algorithm: str, seed: int) -> TrainedClassifier:
    from .registry import ClassifierSpec, make_classifier  # lazy: avoids import cycle

    return make_classifier(ClassifierSpec(algorithm=algorithm, seed=seed))


class EnsembleClassifier(TrainedClassifier):
    """Forward selection with replacement from a model library.

    Member out-of-fold probabilities on the training partition drive the
    hill climb: each step adds the member (repeats allowed, acting as
    weighting) whose inclusion in the uniform probability average maximizes
    AUC; it stops when nothing improves or after ``max_steps``.
    """

    algorithm = "ensemble"

    def __init__(
        self,
        seed: int = 0,
        library: tuple[str, ...] = DEFAULT_COMMITTEE,
        inner_folds: int = 5,
        max_steps: int = 10,
    ) -> None:
        super().__init__(seed=seed)
        self.library = tuple(library)
        self.inner_folds = inner_folds
        self.max_steps = max_steps

    def _fit(self, dataset: Dataset) -> None:
        if not self.library:
            raise LearnerError("ensemble needs a nonempty model library")
        y = dataset.target
        n = dataset.n_rows
        folds = stratified_folds(y, min(self.inner_folds, max(2, min(np.bincount(y)))), self.seed)
        oof = {}
        for idx, name in enumerate(self.library):
            probs = np.full(n, 0.5)
            for fold in range(folds.max() + 1):
                train_idx = np.flatnonzero(folds != fold)
                test_idx = np.flatnonzero(folds == fold)
                member = _make(name, _member_seed(self.seed, idx * 100 + fold))
                member.fit(dataset.take(train_idx))
                probs[test_idx] = member.predict_proba(dataset.take(test_idx))[:, 1]
            oof[name] = probs

        picks, self.trace_ = ensemble_select(oof, y, max_steps=self.max_steps)
        self.selection_auc_ = float(self.trace_[-1][2])
        self.multiplicity_ = {name: picks.count(name) for name in dict.fromkeys(picks)}
        self.members_ = {}
        for idx, name in enumerate(self.library):
            if name in self.multiplicity_:
                member = _make(name, _member_seed(self.seed, idx * 100 + 99))
                self.members_[name] = member.fit(dataset)

    def _predict_proba(self, dataset: Dataset) -> np.ndarray:
        total = np.zeros((dataset.n_rows, 2))
        weight = 0
        for name, mult in self.multiplicity_.items():
            total += mult * self.members_[name].predict_proba(dataset)
            weight += mult
        return total / weight

    def _fitted_doc(self) -> dict:
        return {
            "library": list(self.library),
            "inner_folds": self.inner_folds,
            "max_steps": self.max_steps,
            "trace": [[s, n, a] for s, n, a in self.trace_],
            "selection_auc": self.selection_auc_,
            "multiplicity": self.multiplicity_,
            "members": {name: m.to_doc() for name, m in self.members_.items()},
        }

    def _load_fitted(self, doc: dict) -> None:
        from .registry import model_from_doc  # lazy: avoids import cycle

        self.library = tuple(doc["library"])
        self.inner_folds = doc["inner_folds"]
        self.max_steps = doc["max_steps"]
        self.trace_ = [(s, n, a) for s, n, a in doc["trace"]]
        self.selection_auc_ = doc["selection_auc"]
        self.multiplicity_ = {k: int(v) for k, v in doc["multiplicity"].items()}
        self.members_ = {name: model_from_doc(d) for name, d in doc["members"].items()}


def vote_predict(member_probs: np.ndarray) -> tuple[int, bool]:
    """Committee rule for one row: each class is backed by the largest
    probability any member assigns it; the higher-backed class wins and
    exact ties fall to the negative class. Returns (class, tied)."""
    member_probs = np.asarray(member_probs, dtype=float)
    if member_probs.ndim != 2 or member_probs.shape[0] < 1:
        raise LearnerError("vote needs at least one member distribution")
    best0 = member_probs[:, 0].max()
    best1 = member_probs[:, 1].max()
    if best1 == best0:
        return 0, True
    return int(best1 > best0), False


class VoteClassifier(TrainedClassifier):
    """Max-probability committee over independently fitted members.

    The reported distribution is (1 + max1 - max0) / 2 for the positive
    class, a monotone summary whose argmax matches the committee rule.
    """

    algorithm = "vote"

    def __init__(self, seed: int = 0, members: tuple[str, ...] = DEFAULT_COMMITTEE) -> None:
        super().__init__(seed=seed)
        self.member_names = tuple(members)

    def _fit(self, dataset: Dataset) -> None:
        if not self.member_names:
            raise LearnerError("vote needs at least one member")
        self.members_ = {}
        for idx, name in enumerate(self.member_names):
            member = _make(name, _member_seed(self.seed, idx))
            self.members_[name] = member.fit(dataset)

    def _member_probs(self, dataset: Dataset) -> np.ndarray:
        return np.stack([m.predict_proba(dataset) for m in self.members_.values()], axis=0)

    def _predict_proba(self, dataset: Dataset) -> np.ndarray:
        stacked = self._member_probs(dataset)
        best0 = stacked[:, :, 0].max(axis=0)
        best1 = stacked[:, :, 1].max(axis=0)
        ties = best0 == best1
        if ties.any():
            logger.info("vote: %d committee tie(s) fall to the negative class", int(ties.sum()))
        p1 = (1.0 + best1 - best0) / 2.0
        return np.column_stack([1.0 - p1, p1])

    def _fitted_doc(self) -> dict:
        return {
            "member_names": list(self.member_names),
            "members": {name: m.to_doc() for name, m in self.members_.items()},
        }

    def _load_fitted(self, doc: dict) -> None:
        from .registry import model_from_doc  # lazy: avoids import cycle

        self.member_names = tuple(doc["member_names"])
        self.members_ = {name: model_from_doc(d) for name, d in doc["members"].items()}
