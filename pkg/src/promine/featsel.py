"""Feature ranking and selection: chi-squared and Relief-F filters, the
greedy naive-Bayes wrapper, and 2x2 odds-ratio reporting.

Odds ratios standardize on 2x2 tables: numeric predictors are dichotomized
(median split by default, or at a supplied cut), multi-level categoricals
report the level with the strongest association against the rest.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .dataset import CATEGORICAL, NUMERIC, Dataset
from .folds import stratified_folds
from .learners import ClassifierSpec, make_classifier
from .metrics import auc
from .special import normal_sf

logger = logging.getLogger(__name__)

WRAPPER_EPSILON = 1e-4
WRAPPER_INNER_FOLDS = 5

# Selector families named in the experiment design but excluded from this
# toolkit; requesting one fails loudly instead of silently degrading.
OUT_OF_SCOPE_SELECTORS = ("consistency_bfs", "su_subset", "rank_search")


class FeatureSelectionError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureScore:
    feature: str
    score: float
    rank: int


def _rank_scores(scores: dict[str, float]) -> list[FeatureScore]:
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return [FeatureScore(name, value, rank + 1) for rank, (name, value) in enumerate(ordered)]


def chi2_rank(dataset: Dataset) -> list[FeatureScore]:
    """Pearson chi-square of each discrete feature against the binary target."""
    y = dataset.target
    scores = {}
    for col in dataset.columns:
        if col.kind == NUMERIC:
            raise FeatureSelectionError(
                f"chi2_rank needs discrete features; {col.name!r} is numeric (discretize first)"
            )
        codes = col.codes()
        n_levels = col.n_levels
        if n_levels < 2:
            scores[col.name] = 0.0
            continue
        table = np.zeros((n_levels, 2))
        for cls in (0, 1):
            table[:, cls] = np.bincount(codes[y == cls], minlength=n_levels)
        scores[col.name] = float(_pearson_chi2(table))
    return _rank_scores(scores)


def _pearson_chi2(table: np.ndarray) -> float:
    table = table[table.sum(axis=1) > 0]
    total = table.sum()
    row = table.sum(axis=1, keepdims=True)
    col = table.sum(axis=0, keepdims=True)
    if total == 0 or (col == 0).any() or table.shape[0] < 2:
        return 0.0
    expected = row @ col / total
    return float(((table - expected) ** 2 / expected).sum())


def relief_f(
    dataset: Dataset,
    k: int = 10,
    m: int | None = None,
    seed: int = 0,
) -> list[FeatureScore]:
    """Relief-F weights: near hits penalize a feature's differences, near
    misses reward them.

    Distances sum per-feature diffs (numeric: |a-b| / observed range;
    discrete: 0/1 mismatch). ``m`` samples instances with a seeded generator;
    the default uses every instance once. ``k`` is clamped to the available
    neighbors per class, with a warning.
    """
    y = dataset.target
    n = dataset.n_rows
    if n < 2 or len(np.unique(y)) < 2:
        raise FeatureSelectionError("relief_f needs both classes present")

    diffs = []
    names = []
    for col in dataset.columns:
        names.append(col.name)
        if col.kind == NUMERIC:
            rng_span = float(col.values.max() - col.values.min())
            scaled = col.values / rng_span if rng_span > 0 else np.zeros(n)
            diffs.append(np.abs(scaled[:, None] - scaled[None, :]))
        else:
            codes = col.codes()
            diffs.append((codes[:, None] != codes[None, :]).astype(float))
    total_dist = np.sum(diffs, axis=0)

    class_counts = np.bincount(y, minlength=2)
    k_hit = max(1, min(k, int(class_counts.min()) - 1))
    k_miss = max(1, min(k, int(class_counts.min())))
    if k_hit < k or k_miss < k:
        logger.warning("relief_f: k=%d clamped to %d hits / %d misses", k, k_hit, k_miss)

    if m is None or m >= n:
        sampled = np.arange(n)
    else:
        sampled = np.random.default_rng(seed).choice(n, size=m, replace=False)

    weights = np.zeros(len(names))
    for i in sampled:
        same = np.flatnonzero((y == y[i]))
        same = same[same != i]
        other = np.flatnonzero(y != y[i])
        hits = same[np.lexsort((same, total_dist[i, same]))][:k_hit]
        misses = other[np.lexsort((other, total_dist[i, other]))][:k_miss]
        for f in range(len(names)):
            weights[f] += diffs[f][i, misses].mean() - diffs[f][i, hits].mean()
    weights /= len(sampled)
    return _rank_scores(dict(zip(names, weights)))


# ---------------------------------------------------------------------------
# Naive Bayes wrapper
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WrapperTrace:
    step: int
    feature: str
    auc: float


@dataclass(frozen=True)
class WrapperResult:
    selected: tuple[str, ...]
    trace: tuple[WrapperTrace, ...]


def nb_wrapper_select(
    dataset: Dataset,
    inner_folds: int = WRAPPER_INNER_FOLDS,
    seed: int = 0,
    epsilon: float = WRAPPER_EPSILON,
    max_features: int | None = None,
    binning: str | None = None,
) -> WrapperResult:
    """Greedy forward selection scored by inner-cross-validated AUC of a
    naive Bayes model on the candidate subset.

    Fold assignment is fixed once per run, so step scores are comparable.
    Selection stops when the best addition improves pooled out-of-fold AUC
    by no more than ``epsilon`` over the current subset (baseline 0.5).

    When ``binning`` is given the dataset is taken as raw columns and the
    fitted transforms (including the label-dependent discretization) are
    re-fit inside every inner fold, so inner held-out scores never see cut
    points fit on their own labels.
    """
    from .preprocess import fit_pipeline  # local: preprocess must not import featsel

    y = dataset.target
    if len(np.unique(y)) < 2:
        raise FeatureSelectionError("wrapper selection needs both classes present")
    folds = stratified_folds(y, inner_folds, seed)
    fold_ids = range(folds.max() + 1)
    splits = [(np.flatnonzero(folds != f), np.flatnonzero(folds == f)) for f in fold_ids]

    prepared: list[tuple[Dataset, Dataset, np.ndarray]] = []
    candidate_pool = list(dataset.feature_names)
    for train_idx, test_idx in splits:
        train = dataset.take(train_idx)
        test = dataset.take(test_idx)
        if binning is not None:
            pipeline = fit_pipeline(train, train.target, binning, target_threshold=0.0)
            train = pipeline.apply(train)
            test = pipeline.apply(test)
            candidate_pool = [f for f in candidate_pool if f in train.feature_names]
        prepared.append((train, test, test_idx))

    def inner_auc(names: list[str]) -> float:
        probs = np.full(dataset.n_rows, 0.5)
        for train, test, test_idx in prepared:
            model = make_classifier(ClassifierSpec("naive_bayes", seed=seed))
            model.fit(train.select(names))
            probs[test_idx] = model.predict_proba(test.select(names))[:, 1]
        return auc(probs, y)

    selected: list[str] = []
    trace: list[WrapperTrace] = []
    best_auc = 0.5  # a featureless model ranks nothing
    budget = max_features or len(candidate_pool)
    while len(selected) < budget:
        best_candidate = None
        best_candidate_auc = -np.inf
        for name in candidate_pool:
            if name in selected:
                continue
            candidate_auc = inner_auc(selected + [name])
            if candidate_auc > best_candidate_auc:
                best_candidate_auc = candidate_auc
                best_candidate = name
        if best_candidate is None or best_candidate_auc <= best_auc + epsilon:
            break
        selected.append(best_candidate)
        best_auc = best_candidate_auc
        trace.append(WrapperTrace(len(selected), best_candidate, float(best_auc)))
    return WrapperResult(selected=tuple(selected), trace=tuple(trace))


# ---------------------------------------------------------------------------
# Odds ratios
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OddsRatioReport:
    feature: str
    odds_ratio: float
    ci_low: float
    ci_high: float
    half_width: float          # (ci_high - ci_low) / 2, the "+/-" presentation
    log_or: float
    se_log_or: float
    corrected: bool            # Haldane-Anscombe +0.5 applied
    direction: str             # e.g. "more likely higher", "more likely male"

    @property
    def interval(self) -> tuple[float, float]:
        return (self.ci_low, self.ci_high)


def odds_ratio(
    feature: np.ndarray,
    target: np.ndarray,
    name: str = "feature",
    direction_labels: tuple[str, str] = ("higher", "lower"),
) -> OddsRatioReport:
    """2x2 odds ratio with a Wald interval on the log scale.

    ``feature`` and ``target`` are 0/1 arrays; any empty cell triggers the
    Haldane-Anscombe +0.5 correction on all cells.
    """
    feature = np.asarray(feature, dtype=int)
    target = np.asarray(target, dtype=int)
    if len(np.unique(feature)) < 2:
        raise FeatureSelectionError(f"{name!r} is constant; odds ratio undefined")
    if len(np.unique(target)) < 2:
        raise FeatureSelectionError("target is constant; odds ratio undefined")
    a = float(((feature == 1) & (target == 1)).sum())
    b = float(((feature == 1) & (target == 0)).sum())
    c = float(((feature == 0) & (target == 1)).sum())
    d = float(((feature == 0) & (target == 0)).sum())
    corrected = min(a, b, c, d) == 0.0
    if corrected:
        a, b, c, d = a + 0.5, b + 0.5, c + 0.5, d + 0.5
    log_or = math.log((a * d) / (b * c))
    se = math.sqrt(1 / a + 1 / b + 1 / c + 1 / d)
    z = 1.959963984540054  # two-sided 95%
    ci_low = math.exp(log_or - z * se)
    ci_high = math.exp(log_or + z * se)
    direction = f"more likely {direction_labels[0] if log_or > 0 else direction_labels[1]}"
    if abs(log_or) < 1e-12:
        direction = "no direction"
    if ci_low <= 1.0 <= ci_high:
        direction += ", not significant"
    return OddsRatioReport(
        feature=name,
        odds_ratio=math.exp(log_or),
        ci_low=ci_low,
        ci_high=ci_high,
        half_width=(ci_high - ci_low) / 2.0,
        log_or=log_or,
        se_log_or=se,
        corrected=corrected,
        direction=direction,
    )


def dichotomize(values: np.ndarray, cut: float | None = None) -> np.ndarray:
    """Binary indicator: above the median (or the given cut)."""
    values = np.asarray(values, dtype=float)
    threshold = float(np.median(values)) if cut is None else cut
    return (values > threshold).astype(int)


def odds_ratio_table(dataset: Dataset) -> list[OddsRatioReport]:
    """Per-feature odds ratios against the target, sorted by magnitude.

    Numeric features use a median split ("higher"/"lower" direction);
    categorical features report their strongest level against the rest.
    Constant features are skipped.
    """
    y = dataset.target
    reports = []
    for col in dataset.columns:
        try:
            if col.kind == NUMERIC:
                indicator = dichotomize(col.values)
                reports.append(odds_ratio(indicator, y, name=col.name))
            else:
                codes = col.codes()
                best = None
                levels = col.levels if col.kind == CATEGORICAL else [str(i) for i in range(col.n_levels)]
                for code, level in enumerate(levels):
                    indicator = (codes == code).astype(int)
                    if indicator.min() == indicator.max():
                        continue
                    rep = odds_ratio(indicator, y, name=col.name, direction_labels=(level, f"not {level}"))
                    # prefer the positively-framed level on two-level ties
                    if (
                        best is None
                        or abs(rep.log_or) > abs(best.log_or) + 1e-12
                        or (abs(rep.log_or) >= abs(best.log_or) - 1e-12 and rep.log_or > 0 >= best.log_or)
                    ):
                        best = rep
                if best is not None:
                    reports.append(best)
        except FeatureSelectionError:
            continue
    reports.sort(key=lambda r: (-abs(r.log_or), r.feature))
    return reports


def wald_p_value(report: OddsRatioReport) -> float:
    return 2.0 * normal_sf(abs(report.log_or) / report.se_log_or)


# ---------------------------------------------------------------------------
# Report emitters
# ---------------------------------------------------------------------------

def odds_ratio_report_text(reports: list[OddsRatioReport]) -> str:
    lines = ["FEATURE ODDS RATIOS", ""]
    head = f"{'Variable':<20}{'Odds Ratio':>14}{'95% CI':>22}  Direction"
    lines.append(head)
    lines.append("-" * len(head))
    for r in reports:
        ci = f"[{r.ci_low:.2f}, {r.ci_high:.2f}]"
        lines.append(
            f"{r.feature:<20}{r.odds_ratio:>7.2f} ± {r.half_width:<5.2f}{ci:>17}  {r.direction}"
        )
    return "\n".join(lines) + "\n"


def odds_ratio_report_csv(reports: list[OddsRatioReport]) -> str:
    lines = ["feature,odds_ratio,ci_low,ci_high,half_width,log_or,se_log_or,corrected,direction"]
    for r in reports:
        lines.append(
            f"{r.feature},{r.odds_ratio!r},{r.ci_low!r},{r.ci_high!r},{r.half_width!r},"
            f"{r.log_or!r},{r.se_log_or!r},{int(r.corrected)},{r.direction}"
        )
    return "\n".join(lines) + "\n"


def selection_trace_csv(traces: dict[int, WrapperResult]) -> str:
    lines = ["fold,step,feature,inner_auc"]
    for fold in sorted(traces):
        for entry in traces[fold].trace:
            lines.append(f"{fold},{entry.step},{entry.feature},{entry.auc!r}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Selector:
    """Harness-facing selector: the wrapper consumes raw (pre-transform)
    columns so it can nest the fitted transforms inside its inner folds;
    filter selectors rank the already-transformed training columns."""

    name: str
    needs_raw: bool
    run: object  # callable (dataset, seed) -> WrapperResult


def make_selector(name: str, binning: str | None = None, **params) -> Selector:
    """Selector factory for the harness; out-of-scope names fail loudly."""
    if name in OUT_OF_SCOPE_SELECTORS:
        raise NotImplementedError(f"selector {name!r} is out of scope and not implemented")
    if name == "none":
        return Selector(
            name, False, lambda dataset, seed: WrapperResult(tuple(dataset.feature_names), ())
        )
    if name == "nb_wrapper":
        def run_wrapper(dataset: Dataset, seed: int) -> WrapperResult:
            return nb_wrapper_select(dataset, seed=seed, binning=binning, **params)

        return Selector(name, binning is not None, run_wrapper)
    if name == "chi2_top_k":
        k = params.get("k", 5)

        def run_chi2(dataset: Dataset, seed: int) -> WrapperResult:
            ranked = chi2_rank(dataset)
            return WrapperResult(tuple(s.feature for s in ranked[:k]), ())

        return Selector(name, False, run_chi2)
    if name == "relief_top_k":
        k = params.get("k", 5)
        relief_params = {p: v for p, v in params.items() if p != "k"}

        def run_relief(dataset: Dataset, seed: int) -> WrapperResult:
            ranked = relief_f(dataset, seed=seed, **relief_params)
            return WrapperResult(tuple(s.feature for s in ranked[:k]), ())

        return Selector(name, False, run_relief)
    raise ValueError(f"unknown selector {name!r}")
