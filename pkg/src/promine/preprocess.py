"""Column transformations: z-score, mean-split target, CAIM, variance filter.

Everything follows a strict fit/apply split: statistics and cut points are
learned on training data only wrapped in an immutable FittedPipeline, and
apply never consults apply-side statistics.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import BINNED, CATEGORICAL, NUMERIC, Column, Dataset

logger = logging.getLogger(__name__)

PIPELINE_FORMAT = "promine.pipeline/1"
BINNING_MODES = ("bin_target", "caim")


class ConstantColumnError(ValueError):
    """Raised when a transform that needs variance meets a constant column."""


# ---------------------------------------------------------------------------
# z-score
# ---------------------------------------------------------------------------

def zscore_fit(train: np.ndarray) -> tuple[float, float]:
    """Mean and sample (n-1) standard deviation of the training column."""
    train = np.asarray(train, dtype=float)
    if train.size < 2:
        raise ValueError("z-score fit needs at least 2 values")
    mean = float(train.mean())
    sd = float(train.std(ddof=1))
    if sd == 0.0:
        raise ConstantColumnError("column is constant; route it to the variance filter")
    return mean, sd


def zscore_apply(values: np.ndarray, mean: float, sd: float) -> np.ndarray:
    return (np.asarray(values, dtype=float) - mean) / sd


def zscore_fit_apply(train: np.ndarray, apply: np.ndarray) -> tuple[np.ndarray, tuple[float, float]]:
    mean, sd = zscore_fit(train)
    return zscore_apply(apply, mean, sd), (mean, sd)


# ---------------------------------------------------------------------------
# Mean-split binary target
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinaryTarget:
    """Mean threshold splitting the improvement delta into two classes."""

    threshold: float
    degenerate: bool = False

    def apply(self, deltas: np.ndarray) -> np.ndarray:
        """1 = strictly above the threshold, 0 = at or below."""
        return (np.asarray(deltas, dtype=float) > self.threshold).astype(int)


def binarize_target(deltas: Sequence[float]) -> tuple[BinaryTarget, np.ndarray]:
    arr = np.asarray(deltas, dtype=float)
    if arr.size < 2:
        raise ValueError("target binarization needs at least 2 values")
    target = BinaryTarget(threshold=float(arr.mean()))
    labels = target.apply(arr)
    if labels.min() == labels.max():
        logger.warning("degenerate target: all labels identical after mean split")
        target = BinaryTarget(threshold=target.threshold, degenerate=True)
    return target, labels


# ---------------------------------------------------------------------------
# CAIM discretization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CaimResult:
    cuts: tuple[float, ...]
    criterion: float


def caim_criterion(boundaries: Sequence[int], group_counts: np.ndarray) -> float:
    """Evaluate the interdependence criterion for a cut set.

    ``boundaries`` are indices into the distinct-value groups (a cut after
    group b means values up to and including group b fall left of the cut);
    ``group_counts`` is the groups x classes count matrix. The criterion is
    the mean over intervals of (largest class count)^2 / interval size.
    """
    cum = np.vstack([np.zeros(group_counts.shape[1]), np.cumsum(group_counts, axis=0)])
    edges = [0, *[b + 1 for b in sorted(boundaries)], group_counts.shape[0]]
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        interval = cum[hi] - cum[lo]
        m = interval.sum()
        if m > 0:
            total += interval.max() ** 2 / m
    return total / (len(edges) - 1)


def caim_candidates(values: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray, list[tuple[int, float]]]:
    """Distinct-value group counts plus candidate boundaries.

    A midpoint between consecutive distinct values is a candidate only when
    the class multisets on the two sides differ.
    """
    values = np.asarray(values, dtype=float)
    codes, classes = _encode_labels(labels)
    order = np.argsort(values, kind="stable")
    sv, sc = values[order], codes[order]
    distinct, starts = np.unique(sv, return_index=True)
    n_groups = len(distinct)
    counts = np.zeros((n_groups, len(classes)), dtype=float)
    bounds = [*starts.tolist(), len(sv)]
    for g in range(n_groups):
        counts[g] = np.bincount(sc[bounds[g] : bounds[g + 1]], minlength=len(classes))
    candidates = []
    for g in range(n_groups - 1):
        if not np.array_equal(counts[g], counts[g + 1]):
            candidates.append((g, float((distinct[g] + distinct[g + 1]) / 2.0)))
    return distinct, counts, candidates


def _encode_labels(labels) -> tuple[np.ndarray, list]:
    labels = list(labels)
    classes = sorted(set(labels), key=str)
    index = {c: i for i, c in enumerate(classes)}
    return np.asarray([index[v] for v in labels], dtype=int), classes


# Comparison tolerance for greedy decisions: criterion values are ratios of
# small integer counts, so genuine differences at cohort scale stay orders of
# magnitude above this; it only absorbs float summation dust on exact ties.
CAIM_TIE_EPS = 1e-12


def caim_discretize(values: Sequence[float], labels: Sequence) -> CaimResult:
    """Greedy supervised discretization.

    Starting from a single interval, repeatedly insert the candidate boundary
    with the highest criterion value; keep inserting while the criterion
    improves, or while there are fewer intervals than classes. Near-ties
    (within CAIM_TIE_EPS) break toward the smaller cut point.
    """
    values = np.asarray(values, dtype=float)
    if len(values) != len(list(labels)):
        raise ValueError("values and labels must align")
    if np.unique(values).size < 2:
        raise ConstantColumnError("cannot discretize a constant column")
    codes, classes = _encode_labels(labels)
    if len(classes) < 2:
        raise ValueError("discretization needs at least 2 classes")

    _, counts, candidates = caim_candidates(values, codes)
    n_classes = len(classes)
    n_groups = counts.shape[0]
    cum = np.vstack([np.zeros(counts.shape[1]), np.cumsum(counts, axis=0)])

    def contrib(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        seg = cum[hi] - cum[lo]
        totals = seg.sum(axis=1)
        return np.where(totals > 0, seg.max(axis=1) ** 2 / np.maximum(totals, 1.0), 0.0)

    cand_rows = np.asarray([b + 1 for b, _ in candidates], dtype=int)  # new edge rows
    cand_cuts = np.asarray([cut for _, cut in candidates], dtype=float)
    remaining = np.ones(len(candidates), dtype=bool)
    edges = np.asarray([0, n_groups], dtype=int)
    chosen: list[float] = []
    current = float(contrib(edges[:-1], edges[1:]).sum())
    while remaining.any():
        k = len(chosen) + 1
        base = contrib(edges[:-1], edges[1:])
        total = base.sum()
        rows = cand_rows[remaining]
        pos = np.searchsorted(edges, rows, side="right") - 1
        lo, hi = edges[pos], edges[pos + 1]
        trial = (total - base[pos] + contrib(lo, rows) + contrib(rows, hi)) / (k + 1)
        best_local = int(np.flatnonzero(trial > trial.max() - CAIM_TIE_EPS)[0])
        best_value = float(trial[best_local])
        if best_value > current + CAIM_TIE_EPS or k < n_classes:
            best_global = int(np.flatnonzero(remaining)[best_local])
            remaining[best_global] = False
            chosen.append(float(cand_cuts[best_global]))
            edges = np.sort(np.append(edges, cand_rows[best_global]))
            current = float(contrib(edges[:-1], edges[1:]).sum()) / (k + 1)
        else:
            break
    return CaimResult(cuts=tuple(sorted(chosen)), criterion=current)


def apply_cuts(values: np.ndarray, cuts: Sequence[float]) -> np.ndarray:
    """Bin ids with values equal to a cut falling in the lower interval."""
    return np.searchsorted(np.asarray(cuts, dtype=float), np.asarray(values, dtype=float), side="left")


# ---------------------------------------------------------------------------
# Variance filter
# ---------------------------------------------------------------------------

def constant_columns(dataset: Dataset) -> list[str]:
    names = []
    for col in dataset.columns:
        if len(col.values) == 0:
            continue
        if col.kind == NUMERIC:
            if np.all(col.values == col.values[0]):
                names.append(col.name)
        else:
            if len(set(col.values.tolist())) <= 1:
                names.append(col.name)
    return names


def variance_filter(dataset: Dataset) -> tuple[Dataset, list[str]]:
    """Drop columns with a single observed value; returns the removal log."""
    removed = constant_columns(dataset)
    if removed:
        logger.info("variance filter removed constant columns: %s", ", ".join(removed))
    return dataset.drop(removed), removed


# ---------------------------------------------------------------------------
# Fitted pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FittedPipeline:
    """Frozen feature transforms plus the audited target threshold."""

    binning: str
    feature_order: tuple[str, ...]
    removed: tuple[str, ...]
    numeric_stats: dict      # name -> (mean, sd)
    cuts: dict               # name -> tuple of cut points in z-space (caim mode)
    categorical_levels: dict # name -> level order seen at fit time
    target_threshold: float

    def apply(self, dataset: Dataset) -> Dataset:
        """Transform features using fit-time statistics only."""
        columns = []
        for name in self.feature_order:
            col = dataset.column(name)
            if name in self.numeric_stats:
                if col.kind != NUMERIC:
                    raise ValueError(f"column {name!r} expected numeric")
                mean, sd = self.numeric_stats[name]
                z = zscore_apply(col.values, mean, sd)
                if name in self.cuts:
                    columns.append(Column(name, BINNED, apply_cuts(z, self.cuts[name]), cuts=self.cuts[name]))
                else:
                    columns.append(Column(name, NUMERIC, z))
            else:
                if col.kind != CATEGORICAL:
                    raise ValueError(f"column {name!r} expected categorical")
                columns.append(Column(name, CATEGORICAL, col.values, levels=self.categorical_levels[name]))
        return Dataset(tuple(columns), dataset.target, dataset.target_name, dict(dataset.meta))

    def to_json(self) -> str:
        doc = {
            "format": PIPELINE_FORMAT,
            "binning": self.binning,
            "feature_order": list(self.feature_order),
            "removed": list(self.removed),
            "numeric_stats": {k: [v[0], v[1]] for k, v in self.numeric_stats.items()},
            "cuts": {k: list(v) for k, v in self.cuts.items()},
            "categorical_levels": {k: list(v) for k, v in self.categorical_levels.items()},
            "target_threshold": self.target_threshold,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "FittedPipeline":
        doc = json.loads(text)
        if doc.get("format") != PIPELINE_FORMAT:
            raise ValueError(f"unsupported pipeline document {doc.get('format')!r}")
        return FittedPipeline(
            binning=doc["binning"],
            feature_order=tuple(doc["feature_order"]),
            removed=tuple(doc["removed"]),
            numeric_stats={k: (v[0], v[1]) for k, v in doc["numeric_stats"].items()},
            cuts={k: tuple(v) for k, v in doc["cuts"].items()},
            categorical_levels={k: tuple(v) for k, v in doc["categorical_levels"].items()},
            target_threshold=doc["target_threshold"],
        )


def fit_pipeline(
    train: Dataset,
    labels: np.ndarray,
    binning: str,
    target_threshold: float,
) -> FittedPipeline:
    """Fit the feature transforms on training rows only.

    Numeric columns are z-scored; in ``caim`` mode they are then discretized
    against the training labels. Categorical columns pass through (already
    discrete). Constant columns are removed first.
    """
    if binning not in BINNING_MODES:
        raise ValueError(f"binning must be one of {BINNING_MODES}, got {binning!r}")
    filtered, removed = variance_filter(train)
    numeric_stats: dict[str, tuple[float, float]] = {}
    cuts: dict[str, tuple[float, ...]] = {}
    categorical_levels: dict[str, tuple[str, ...]] = {}
    for col in filtered.columns:
        if col.kind == NUMERIC:
            numeric_stats[col.name] = zscore_fit(col.values)
            if binning == "caim":
                mean, sd = numeric_stats[col.name]
                z = zscore_apply(col.values, mean, sd)
                cuts[col.name] = caim_discretize(z, labels).cuts
        elif col.kind == CATEGORICAL:
            categorical_levels[col.name] = col.levels
        else:
            raise ValueError(f"column {col.name!r} is already binned; refit from raw columns")
    return FittedPipeline(
        binning=binning,
        feature_order=filtered.feature_names,
        removed=tuple(removed),
        numeric_stats=numeric_stats,
        cuts=cuts,
        categorical_levels=categorical_levels,
        target_threshold=target_threshold,
    )
