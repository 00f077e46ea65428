"""Ranking and confusion metrics: AUC, ROC, TP/FP rates, and the H measure.

All ranking metrics depend on the scores only through the induced ordering,
so they are invariant under strictly increasing score transforms.
"""

from __future__ import annotations

import numpy as np


class MetricError(ValueError):
    """Raised when a metric is undefined for the given labels."""


def _check_binary(labels: np.ndarray) -> tuple[int, int]:
    labels = np.asarray(labels, dtype=int)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise MetricError("both classes must be present")
    if n_pos + n_neg != len(labels):
        raise MetricError("labels must be 0/1")
    return n_pos, n_neg


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auc(scores, labels) -> float:
    """Pairwise concordance probability with ties counted half.

    Computed with the rank (Mann-Whitney) identity, which equals the
    trapezoidal area under the tie-grouped ROC curve.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n_pos, n_neg = _check_binary(labels)
    ranks = _average_ranks(scores)
    pos_rank_sum = ranks[labels == 1].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_points(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """ROC curve (FPR, TPR) at every distinct threshold, ties grouped.

    Starts at (0, 0) and ends at (1, 1); points are ordered by decreasing
    threshold.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n_pos, n_neg = _check_binary(labels)
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    distinct = np.flatnonzero(np.diff(sorted_scores)) if len(scores) > 1 else np.array([], dtype=int)
    thresholds_end = np.append(distinct, len(scores) - 1)
    tps = np.cumsum(sorted_labels)[thresholds_end]
    fps = thresholds_end + 1 - tps
    fpr = np.concatenate([[0.0], fps / n_neg])
    tpr = np.concatenate([[0.0], tps / n_pos])
    return fpr, tpr


def trapezoid_auc(scores, labels) -> float:
    """Area under the tie-grouped ROC curve by the trapezoid rule."""
    fpr, tpr = roc_points(scores, labels)
    return float(np.trapezoid(tpr, fpr))


def confusion_rates(predictions, labels) -> tuple[float, float, float]:
    """(accuracy, TP rate, FP rate) with class 1 as the positive class.

    A rate with an empty denominator reports 0.0.
    """
    predictions = np.asarray(predictions, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if len(predictions) == 0:
        raise MetricError("need at least one prediction")
    if len(predictions) != len(labels):
        raise MetricError("predictions and labels must align")
    tp = int(((predictions == 1) & (labels == 1)).sum())
    fn = int(((predictions == 0) & (labels == 1)).sum())
    fp = int(((predictions == 1) & (labels == 0)).sum())
    tn = int(((predictions == 0) & (labels == 0)).sum())
    accuracy = (tp + tn) / len(labels)
    tp_rate = tp / (tp + fn) if tp + fn else 0.0
    fp_rate = fp / (fp + tn) if fp + tn else 0.0
    return float(accuracy), float(tp_rate), float(fp_rate)


# ---------------------------------------------------------------------------
# H measure
# ---------------------------------------------------------------------------

def roc_convex_hull(fpr: np.ndarray, tpr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Upper convex hull of the ROC points from (0,0) to (1,1)."""
    points = np.column_stack([fpr, tpr])
    hull: list[np.ndarray] = []
    for p in points:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # keep only left turns: drop b when it lies on or under chord a-p
            if (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    arr = np.asarray(hull)
    return arr[:, 0], arr[:, 1]


def _beta22_c2(a: float, b: float) -> float:
    """Integral of 6 c^2 (1-c) over [a, b]."""
    f = lambda c: 2.0 * c**3 - 1.5 * c**4
    return f(b) - f(a)


def _beta22_c1(a: float, b: float) -> float:
    """Integral of 6 c (1-c)^2 over [a, b]."""
    f = lambda c: 3.0 * c**2 - 4.0 * c**3 + 1.5 * c**4
    return f(b) - f(a)


def hand_h(scores, labels) -> float:
    """Normalized expected minimum misclassification loss over a symmetric
    Beta(2, 2) cost distribution: 1 for a perfect ranker, 0 for a score-free
    one. Minimization over thresholds reduces to the ROC convex hull.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n_pos, n_neg = _check_binary(labels)
    pi1 = n_pos / len(labels)
    pi0 = 1.0 - pi1

    fpr, tpr = roc_points(scores, labels)
    hx, hy = roc_convex_hull(fpr, tpr)

    # Cost boundary between consecutive hull vertices; vertex i is optimal
    # for c in [bound[i+1], bound[i]].
    bounds = [1.0]
    for i in range(len(hx) - 1):
        dx = hx[i + 1] - hx[i]
        dy = hy[i + 1] - hy[i]
        if dx <= 0.0:
            bounds.append(1.0)
        else:
            slope = dy / dx
            bounds.append(pi1 * slope / (pi1 * slope + pi0))
    bounds.append(0.0)

    loss = 0.0
    for i in range(len(hx)):
        lo, hi = bounds[i + 1], bounds[i]
        if hi <= lo:
            continue
        loss += pi0 * hx[i] * _beta22_c2(lo, hi) + pi1 * (1.0 - hy[i]) * _beta22_c1(lo, hi)

    loss_ref = pi0 * _beta22_c2(0.0, pi1) + pi1 * _beta22_c1(pi1, 1.0)
    return float(1.0 - loss / loss_ref)
