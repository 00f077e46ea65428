"""Independent oracles: deliberately naive re-computations (brute force,
quadrature, streaming) used to cross-check the production implementations.
They must stay structurally different from the code they verify."""

from __future__ import annotations

import itertools

import numpy as np


def concordance_auc(scores, labels) -> float:
    """Pairwise concordance with ties counted half, by explicit loops."""
    scores = np.asarray(scores, float)
    labels = np.asarray(labels, int)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def h_measure_quadrature(scores, labels, grid: int = 400_001) -> float:
    """Expected-minimum-loss H by fine-grid quadrature over the Beta(2,2)
    cost density, minimizing over every empirical ROC point."""
    scores = np.asarray(scores, float)
    labels = np.asarray(labels, int)
    n = len(labels)
    pi1 = labels.mean()
    pi0 = 1.0 - pi1
    order = np.argsort(-scores, kind="stable")
    sl = labels[order]
    ss = scores[order]
    idx = np.flatnonzero(np.diff(ss))
    ends = np.append(idx, n - 1)
    tp = np.cumsum(sl)[ends]
    fp = ends + 1 - tp
    fpr = np.concatenate([[0.0], fp / (labels == 0).sum()])
    tpr = np.concatenate([[0.0], tp / (labels == 1).sum()])
    c = np.linspace(0.0, 1.0, grid)
    u = 6.0 * c * (1.0 - c)
    loss_matrix = c[:, None] * pi0 * fpr[None, :] + (1.0 - c)[:, None] * pi1 * (1.0 - tpr)[None, :]
    loss = np.trapezoid(loss_matrix.min(axis=1) * u, c)
    loss_ref = np.trapezoid(np.minimum(c * pi0, (1.0 - c) * pi1) * u, c)
    return float(1.0 - loss / loss_ref)


def caim_value(cut_set, values, labels) -> float:
    """Criterion by direct interval scanning (no cumulative-sum tricks)."""
    cuts = sorted(cut_set)
    edges = [-np.inf, *cuts, np.inf]
    total = 0.0
    n_intervals = len(edges) - 1
    for lo, hi in zip(edges, edges[1:]):
        members = [lab for v, lab in zip(values, labels) if lo < v <= hi]
        if not members:
            continue
        biggest = max(members.count(c) for c in set(members))
        total += biggest * biggest / len(members)
    return total / n_intervals


def caim_candidate_cuts(values, labels) -> list[float]:
    """Midpoints between consecutive distinct values whose class multisets differ."""
    pairs = sorted(zip(values, labels))
    distinct = sorted(set(values))
    cuts = []
    for a, b in zip(distinct, distinct[1:]):
        multiset_a = sorted(lab for v, lab in pairs if v == a)
        multiset_b = sorted(lab for v, lab in pairs if v == b)
        if multiset_a != multiset_b:
            cuts.append((a + b) / 2.0)
    return cuts


def caim_greedy_reference(values, labels) -> tuple[tuple[float, ...], float]:
    """The greedy rule re-coded naively: accept the best candidate while the
    criterion improves or there are fewer intervals than classes; ties go to
    the smaller cut."""
    cuts, value, _ = caim_greedy_trajectory(values, labels)
    return cuts, value


def caim_greedy_trajectory(values, labels, tie_eps: float = 1e-12):
    """Like caim_greedy_reference but also returns the per-step record
    [(criterion_after_step, was_forced), ...] in acceptance order.

    Near-ties within tie_eps keep the smaller cut, matching the production
    rule, so exact rational ties cannot be dust-broken differently."""
    candidates = caim_candidate_cuts(values, labels)
    n_classes = len(set(labels))
    chosen: list[float] = []
    steps: list[tuple[float, bool]] = []
    current = caim_value(chosen, values, labels)
    while candidates:
        best_cut, best_value = None, -np.inf
        for cut in sorted(candidates):
            trial = caim_value(chosen + [cut], values, labels)
            if trial > best_value + tie_eps:
                best_value, best_cut = trial, cut
        improved = best_value > current + tie_eps
        if improved or len(chosen) + 1 < n_classes:
            chosen.append(best_cut)
            candidates.remove(best_cut)
            steps.append((best_value, not improved))
            current = best_value
        else:
            break
    return tuple(sorted(chosen)), current, steps


def welford_describe(values):
    """Streaming mean/sd oracle."""
    n = 0
    mean = 0.0
    m2 = 0.0
    lo = np.inf
    hi = -np.inf
    for v in values:
        n += 1
        delta = v - mean
        mean += delta / n
        m2 += delta * (v - mean)
        lo = min(lo, v)
        hi = max(hi, v)
    sd = (m2 / (n - 1)) ** 0.5 if n >= 2 else None
    return n, lo, hi, mean, sd


def exhaustive_best_subsets(n_features: int):
    """All nonempty feature index subsets, smallest first (for tiny wrappers)."""
    for size in range(1, n_features + 1):
        yield from itertools.combinations(range(n_features), size)
