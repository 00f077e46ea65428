"""Stratified 10-fold cross-validation with feature selection nested inside
folds, pooled out-of-fold metrics, and ranked report rendering.

Metrics are computed on the pooled held-out predictions (one ROC over all
held-out rows) rather than averaged per fold; the report header records
this convention.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .featsel import WrapperResult, make_selector
from .folds import stratified_folds
from .learners import ClassifierSpec, make_classifier
from .metrics import auc, confusion_rates, hand_h
from .preprocess import binarize_target, fit_pipeline

logger = logging.getLogger(__name__)

N_FOLDS = 10
POOLING_NOTE = "metrics pooled over held-out folds (single ROC)"


@dataclass(frozen=True)
class FoldPlan:
    """Fold assignment stratified on the binary target."""

    assignments: np.ndarray
    n_folds: int
    seed: int

    @staticmethod
    def build(labels: np.ndarray, n_folds: int, seed: int) -> "FoldPlan":
        return FoldPlan(stratified_folds(labels, n_folds, seed), n_folds, seed)

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        return np.flatnonzero(self.assignments != fold), np.flatnonzero(self.assignments == fold)


@dataclass(frozen=True)
class PipelineSpec:
    """What to run: model, binning axis, selector, and fold hygiene options."""

    model: ClassifierSpec
    binning: str = "caim"                  # "bin_target" (no pre-discretization) | "caim"
    selector: str = "none"
    selector_params: dict = field(default_factory=dict)
    per_fold_target_mean: bool = False     # audit option: threshold from fold-train only


@dataclass(frozen=True)
class FoldDetail:
    fold: int
    n_test: int
    selected: tuple[str, ...]
    degenerate: bool


@dataclass(frozen=True)
class CvResult:
    model: str
    binning: str
    accuracy: float
    auc: float
    tp_rate: float
    fp_rate: float
    h: float
    fold_details: tuple[FoldDetail, ...]
    selection_traces: dict
    warnings: tuple[str, ...]
    pooled_scores: np.ndarray = field(repr=False, compare=False, default=None)
    pooled_predictions: np.ndarray = field(repr=False, compare=False, default=None)
    pooled_labels: np.ndarray = field(repr=False, compare=False, default=None)


def cross_validate(
    spec: PipelineSpec,
    dataset: Dataset,
    seed: int = 0,
    n_folds: int = N_FOLDS,
) -> CvResult:
    """Per fold: fit transforms, selector, and model on the training portion
    only; score the held-out fold; pool held-out predictions for metrics.

    Folds whose training portion collapses to a single class are excluded
    with a warning.
    """
    raw_deltas = dataset.meta.get("final_delta_ors")
    if raw_deltas is None:
        raise ValueError("dataset must carry final_delta_ors in meta for target binarization")
    deltas = np.asarray(raw_deltas, dtype=float)
    if deltas.shape != (dataset.n_rows,):
        raise ValueError("final_delta_ors meta must align with dataset rows")
    global_target, global_labels = binarize_target(deltas)
    plan = FoldPlan.build(global_labels, n_folds, seed)

    n = dataset.n_rows
    pooled_scores = np.full(n, np.nan)
    pooled_preds = np.full(n, -1, dtype=int)
    pooled_labels = np.full(n, -1, dtype=int)
    details: list[FoldDetail] = []
    traces: dict[int, WrapperResult] = {}
    warnings: list[str] = []
    selector = make_selector(spec.selector, binning=spec.binning, **spec.selector_params)

    for fold in range(n_folds):
        train_idx, test_idx = plan.split(fold)
        if spec.per_fold_target_mean:
            fold_target, _ = binarize_target(deltas[train_idx])
            labels_train = fold_target.apply(deltas[train_idx])
            labels_test = fold_target.apply(deltas[test_idx])
            threshold = fold_target.threshold
        else:
            labels_train = global_labels[train_idx]
            labels_test = global_labels[test_idx]
            threshold = global_target.threshold
        if labels_train.min() == labels_train.max():
            warnings.append(f"fold {fold}: single-class training portion, excluded")
            logger.warning("cross_validate: %s", warnings[-1])
            details.append(FoldDetail(fold, len(test_idx), (), True))
            continue

        train_raw = Dataset(
            dataset.take(train_idx).columns, labels_train, dataset.target_name
        )
        test_raw = Dataset(
            dataset.take(test_idx).columns, labels_test, dataset.target_name
        )
        pipeline = fit_pipeline(train_raw, labels_train, spec.binning, threshold)
        train = pipeline.apply(train_raw)
        test = pipeline.apply(test_raw)

        fold_seed = seed * 10_007 + fold
        selection = selector.run(train_raw if selector.needs_raw else train, fold_seed)
        if selection.trace:
            traces[fold] = selection
        selected = [f for f in selection.selected if f in train.feature_names]
        if not selected:
            selected = list(train.feature_names)
            warnings.append(f"fold {fold}: empty selection, fell back to all features")
        train_sel = train.select(selected)
        test_sel = test.select(selected)

        model_spec = ClassifierSpec(
            spec.model.algorithm, dict(spec.model.params), seed=spec.model.seed * 10_007 + fold
        )
        model = make_classifier(model_spec).fit(train_sel)
        probs = model.predict_proba(test_sel)
        pooled_scores[test_idx] = probs[:, 1]
        pooled_preds[test_idx] = model.predict(test_sel)
        pooled_labels[test_idx] = labels_test
        details.append(FoldDetail(fold, len(test_idx), tuple(selected), False))

    mask = pooled_preds >= 0
    if not mask.any():
        raise ValueError("every fold was degenerate; nothing to score")
    accuracy, tp_rate, fp_rate = confusion_rates(pooled_preds[mask], pooled_labels[mask])
    if pooled_labels[mask].min() == pooled_labels[mask].max():
        warnings.append("pooled held-out labels are single-class; AUC and H undefined")
        logger.warning("cross_validate: %s", warnings[-1])
        pooled_auc = float("nan")
        pooled_h = float("nan")
    else:
        pooled_auc = auc(pooled_scores[mask], pooled_labels[mask])
        pooled_h = hand_h(pooled_scores[mask], pooled_labels[mask])
    return CvResult(
        model=spec.model.algorithm,
        binning=spec.binning,
        accuracy=accuracy,
        auc=pooled_auc,
        tp_rate=tp_rate,
        fp_rate=fp_rate,
        h=pooled_h,
        fold_details=tuple(details),
        selection_traces=traces,
        warnings=tuple(warnings),
        pooled_scores=pooled_scores[mask],
        pooled_predictions=pooled_preds[mask],
        pooled_labels=pooled_labels[mask],
    )


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------

BINNING_LABELS = {"bin_target": "Bin Target", "caim": "CAIM"}


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[CvResult, ...]
    title: str = "MINING RESULTS"
    note: str = POOLING_NOTE

    def sorted_rows(self) -> list[CvResult]:
        return sorted(self.rows, key=lambda r: (-r.auc, r.model, r.binning))

    def to_text(self) -> str:
        lines = [self.title, f"10x cross-validation; {self.note}", ""]
        head = (
            f"{'Model':<22}{'Binning':<12}{'Accuracy':>10}{'AUC':>9}"
            f"{'TP rate':>9}{'FP rate':>9}{'H':>9}"
        )
        lines.append(head)
        lines.append("-" * len(head))
        for r in self.sorted_rows():
            lines.append(
                f"{r.model:<22}{BINNING_LABELS.get(r.binning, r.binning):<12}"
                f"{100 * r.accuracy:>9.1f}%{r.auc:>9.4f}"
                f"{100 * r.tp_rate:>8.1f}%{100 * r.fp_rate:>8.1f}%{r.h:>9.4f}"
            )
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        lines = ["model,binning,accuracy,auc,tp_rate,fp_rate,h"]
        for r in self.sorted_rows():
            lines.append(
                f"{r.model},{r.binning},{r.accuracy!r},{r.auc!r},"
                f"{r.tp_rate!r},{r.fp_rate!r},{r.h!r}"
            )
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> list[dict]:
        return [
            {
                "model": r.model,
                "binning": r.binning,
                "accuracy": r.accuracy,
                "auc": r.auc,
                "tp_rate": r.tp_rate,
                "fp_rate": r.fp_rate,
                "h": r.h,
                "warnings": list(r.warnings),
            }
            for r in self.sorted_rows()
        ]
