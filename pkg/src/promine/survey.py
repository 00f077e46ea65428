"""Clinician-survey statistics: TPB composites, Spearman correlations with
significance, OLS regression, Welch t-test, and one-way ANOVA.

The ten survey items sit on a 1-4 Likert scale and map to components:
perceived utility (items 1-3), normative beliefs (4-6), control beliefs
(7-9), intention (10). Items 3 and 7 are negatively worded and reverse-key
by default (5 - score).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .special import f_sf, student_t_p_two_sided

LIKERT_MIN, LIKERT_MAX = 1, 4
REVERSE_KEYED = (3, 7)
COMPONENTS = {"PU": (1, 2, 3), "NB": (4, 5, 6), "CB": (7, 8, 9), "INT": (10,)}

SURVEY_HEADER_REQUIRED = (
    "clinician_id,q1,q2,q3,q4,q5,q6,q7,q8,q9,q10,years_exp,age,gender,adoption_rate"
)
SURVEY_HEADER_OPTIONAL = ("bl_ors", "bl_srs", "final_delta_ors")


class SurveyError(ValueError):
    pass


@dataclass(frozen=True)
class SurveyResponse:
    clinician_id: str
    items: tuple  # 10 scores, None = missing
    years_exp: float | None
    age: float | None
    gender: str | None
    adoption_rate: float | None
    bl_ors: float | None = None
    bl_srs: float | None = None
    final_delta_ors: float | None = None

    def __post_init__(self) -> None:
        if len(self.items) != 10:
            raise SurveyError(f"{self.clinician_id}: expected 10 items, got {len(self.items)}")
        for i, score in enumerate(self.items, start=1):
            if score is not None and not (LIKERT_MIN <= score <= LIKERT_MAX):
                raise SurveyError(
                    f"{self.clinician_id}: item {i} score {score} outside "
                    f"[{LIKERT_MIN}, {LIKERT_MAX}]"
                )
        if self.adoption_rate is not None and not (0.0 <= self.adoption_rate <= 1.0):
            raise SurveyError(f"{self.clinician_id}: adoption_rate outside [0, 1]")


def tpb_scores(
    responses: Sequence[SurveyResponse], reverse_key: bool = True
) -> dict[str, dict[str, float]]:
    """Per-clinician component composites (mean of items, reverse-keyed ones
    flipped). A clinician missing any item of a component is excluded from
    that composite."""
    out: dict[str, dict[str, float]] = {}
    for resp in responses:
        composites: dict[str, float] = {}
        for comp, item_ids in COMPONENTS.items():
            values = []
            for item_id in item_ids:
                score = resp.items[item_id - 1]
                if score is None:
                    values = None
                    break
                if reverse_key and item_id in REVERSE_KEYED:
                    score = (LIKERT_MAX + 1) - score
                values.append(score)
            if values is not None:
                composites[comp] = float(np.mean(values))
        out[resp.clinician_id] = composites
    return out


# ---------------------------------------------------------------------------
# Correlation
# ---------------------------------------------------------------------------

def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sv = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x: Iterable[float], y: Iterable[float]) -> tuple[float, float, int]:
    """Spearman rho via Pearson on average ranks, with the t-approximation
    for the two-sided p. Pairs with a missing value are dropped first."""
    x = np.asarray(list(x), dtype=float)
    y = np.asarray(list(y), dtype=float)
    if x.shape != y.shape:
        raise SurveyError("x and y must align")
    keep = ~(np.isnan(x) | np.isnan(y))
    x, y = x[keep], y[keep]
    n = len(x)
    if n < 3:
        raise SurveyError(f"need at least 3 complete pairs, got {n}")
    rx, ry = _average_ranks(x), _average_ranks(y)
    sxx = float(((rx - rx.mean()) ** 2).sum())
    syy = float(((ry - ry.mean()) ** 2).sum())
    if sxx == 0.0 or syy == 0.0:
        raise SurveyError("constant vector: correlation undefined")
    sxy = float(((rx - rx.mean()) * (ry - ry.mean())).sum())
    rho = sxy / math.sqrt(sxx * syy)
    if abs(rho) >= 1.0:
        return float(np.sign(rho)), 0.0, n
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    return rho, student_t_p_two_sided(t, n - 2), n


@dataclass(frozen=True)
class CorrelationMatrix:
    names: tuple[str, ...]
    rho: np.ndarray   # NaN where undefined
    p: np.ndarray
    n: np.ndarray

    def cell(self, a: str, b: str) -> tuple[float, float, int]:
        i, j = self.names.index(a), self.names.index(b)
        return float(self.rho[i, j]), float(self.p[i, j]), int(self.n[i, j])


def correlation_matrix(series: dict[str, Sequence[float]]) -> CorrelationMatrix:
    """Pairwise-complete Spearman matrix (missing values as NaN in input)."""
    names = tuple(series)
    k = len(names)
    rho = np.full((k, k), np.nan)
    p = np.full((k, k), np.nan)
    n = np.zeros((k, k), dtype=int)
    arrays = {name: np.asarray(list(values), dtype=float) for name, values in series.items()}
    for i, a in enumerate(names):
        rho[i, i] = 1.0
        p[i, i] = 0.0
        n[i, i] = int((~np.isnan(arrays[a])).sum())
        for j in range(i + 1, k):
            b = names[j]
            try:
                r, pv, nn = spearman(arrays[a], arrays[b])
            except SurveyError:
                continue
            rho[i, j] = rho[j, i] = r
            p[i, j] = p[j, i] = pv
            n[i, j] = n[j, i] = nn
    return CorrelationMatrix(names, rho, p, n)


def correlation_report(matrix: CorrelationMatrix) -> str:
    """Lower-triangle text matrix with significance stars (* .05, ** .01)."""
    width = max(12, max(len(n) for n in matrix.names) + 2)
    label_width = max(len(n) for n in matrix.names) + 1
    lines = ["FACTOR CORRELATIONS (Spearman, pairwise complete)", ""]
    header = " " * (label_width + 3) + "".join(f"{name:>{width}}" for name in matrix.names)
    lines.append(header)
    for i, name in enumerate(matrix.names):
        r_cells, p_cells, n_cells = [], [], []
        for j in range(len(matrix.names)):
            if j > i:
                r_cells.append(f"{'':>{width}}")
                p_cells.append(f"{'':>{width}}")
                n_cells.append(f"{'':>{width}}")
                continue
            r = matrix.rho[i, j]
            if np.isnan(r):
                r_cells.append(f"{'.':>{width}}")
                p_cells.append(f"{'.':>{width}}")
                n_cells.append(f"{0:>{width}}")
                continue
            stars = ""
            if i != j:
                if matrix.p[i, j] < 0.01:
                    stars = "**"
                elif matrix.p[i, j] < 0.05:
                    stars = "*"
            r_cells.append(f"{f'{r:.3f}{stars}':>{width}}")
            p_cells.append(f"{('.' if i == j else f'{matrix.p[i, j]:.3f}'):>{width}}")
            n_cells.append(f"{matrix.n[i, j]:>{width}}")
        lines.append(f"{name:<{label_width}}rho" + "".join(r_cells))
        lines.append(" " * label_width + "sig" + "".join(p_cells))
        lines.append(" " * label_width + "n  " + "".join(n_cells))
    lines.append("")
    lines.append("*  significant at .05 (2-tailed)   ** significant at .01 (2-tailed)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Regression and group tests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OlsResult:
    coefficients: np.ndarray  # intercept first
    r_squared: float
    f_statistic: float
    df: tuple[int, int]
    p_value: float
    residuals: np.ndarray


def ols_regression(y: Sequence[float], x: np.ndarray, names: Sequence[str] | None = None) -> OlsResult:
    """Least squares with intercept; reports R^2 and the overall F test."""
    y = np.asarray(list(y), dtype=float)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] != len(y):
        x = x.T
    n, k = x.shape
    if n <= k + 1:
        raise SurveyError(f"need more than {k + 1} observations, got {n}")
    design = np.hstack([np.ones((n, 1)), x])
    rank = np.linalg.matrix_rank(design)
    if rank < design.shape[1]:
        collinear = _collinear_columns(design, names)
        raise SurveyError(f"design matrix is rank deficient; collinear columns: {collinear}")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    residuals = y - fitted
    sst = float(((y - y.mean()) ** 2).sum())
    if sst == 0.0:
        raise SurveyError("response is constant; R^2 undefined")
    sse = float((residuals**2).sum())
    r2 = 1.0 - sse / sst
    df1, df2 = k, n - k - 1
    if r2 >= 1.0:
        return OlsResult(coef, 1.0, math.inf, (df1, df2), 0.0, residuals)
    f = (r2 / df1) / ((1.0 - r2) / df2)
    return OlsResult(coef, r2, f, (df1, df2), f_sf(f, df1, df2), residuals)


def _collinear_columns(design: np.ndarray, names: Sequence[str] | None) -> list[str]:
    labels = ["intercept"] + (
        list(names) if names is not None else [f"x{i}" for i in range(design.shape[1] - 1)]
    )
    independent: list[int] = []
    collinear: list[str] = []
    for j in range(design.shape[1]):
        trial = design[:, independent + [j]]
        if np.linalg.matrix_rank(trial) == len(independent) + 1:
            independent.append(j)
        else:
            collinear.append(labels[j])
    return collinear


def t_test_two_sample(a: Sequence[float], b: Sequence[float]) -> tuple[float, float, float]:
    """Welch's t-test: (t, df, two-sided p)."""
    a = np.asarray(list(a), dtype=float)
    b = np.asarray(list(b), dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise SurveyError("each group needs at least 2 observations")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    na, nb = len(a), len(b)
    denom2 = va / na + vb / nb
    diff = a.mean() - b.mean()
    if denom2 == 0.0:
        return 0.0, float(na + nb - 2), 1.0
    t = diff / math.sqrt(denom2)
    df = denom2**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return float(t), float(df), student_t_p_two_sided(t, df)


def anova_oneway(groups: Sequence[Sequence[float]]) -> tuple[float, tuple[int, int], float]:
    """Standard one-way ANOVA: (F, (df_between, df_within), p)."""
    arrays = [np.asarray(list(g), dtype=float) for g in groups]
    if len(arrays) < 2 or any(len(g) < 2 for g in arrays):
        raise SurveyError("need at least 2 groups with at least 2 observations each")
    all_values = np.concatenate(arrays)
    grand = all_values.mean()
    ss_between = sum(len(g) * (g.mean() - grand) ** 2 for g in arrays)
    ss_within = sum(((g - g.mean()) ** 2).sum() for g in arrays)
    df_between = len(arrays) - 1
    df_within = len(all_values) - len(arrays)
    if ss_within == 0.0:
        if ss_between == 0.0:
            return 0.0, (df_between, df_within), 1.0
        return math.inf, (df_between, df_within), 0.0
    f = (ss_between / df_between) / (ss_within / df_within)
    return float(f), (df_between, df_within), f_sf(f, df_between, df_within)


# ---------------------------------------------------------------------------
# Survey CSV and the full analysis table
# ---------------------------------------------------------------------------

def read_survey_csv(path: str | Path) -> list[SurveyResponse]:
    required = SURVEY_HEADER_REQUIRED.split(",")
    responses = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[: len(required)] != required:
            raise SurveyError(f"{path}: expected header starting {SURVEY_HEADER_REQUIRED!r}")
        extras = header[len(required) :]
        unknown = set(extras) - set(SURVEY_HEADER_OPTIONAL)
        if unknown:
            raise SurveyError(f"{path}: unknown columns {sorted(unknown)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue

            def opt_float(cell: str) -> float | None:
                cell = cell.strip()
                return float(cell) if cell else None

            items = tuple(opt_float(c) for c in row[1:11])
            extra_values = dict(zip(extras, (opt_float(c) for c in row[len(required) :])))
            responses.append(
                SurveyResponse(
                    clinician_id=row[0].strip(),
                    items=items,
                    years_exp=opt_float(row[11]),
                    age=opt_float(row[12]),
                    gender=row[13].strip() or None,
                    adoption_rate=opt_float(row[14]),
                    bl_ors=extra_values.get("bl_ors"),
                    bl_srs=extra_values.get("bl_srs"),
                    final_delta_ors=extra_values.get("final_delta_ors"),
                )
            )
    return responses


def survey_analysis(responses: Sequence[SurveyResponse], reverse_key: bool = True) -> str:
    """Correlation matrix over TPB composites, behavior, and outcome
    aggregates, plus the intent regression."""
    composites = tpb_scores(responses, reverse_key=reverse_key)

    def series_for(comp: str) -> list[float]:
        return [composites[r.clinician_id].get(comp, np.nan) for r in responses]

    def attr_series(attr: str) -> list[float]:
        return [getattr(r, attr) if getattr(r, attr) is not None else np.nan for r in responses]

    series = {
        "PU": series_for("PU"),
        "NB": series_for("NB"),
        "CB": series_for("CB"),
        "intent": series_for("INT"),
        "adopt_rate": attr_series("adoption_rate"),
        "age": attr_series("age"),
        "bl_ors": attr_series("bl_ors"),
        "bl_srs": attr_series("bl_srs"),
        "final_delta_ors": attr_series("final_delta_ors"),
    }
    text = correlation_report(correlation_matrix(series))

    # Regression of intent on the three TPB components, complete cases only.
    pu, nb, cb, intent = (
        np.asarray(series["PU"]),
        np.asarray(series["NB"]),
        np.asarray(series["CB"]),
        np.asarray(series["intent"]),
    )
    complete = ~(np.isnan(pu) | np.isnan(nb) | np.isnan(cb) | np.isnan(intent))
    if complete.sum() > 4:
        x = np.column_stack([pu[complete], nb[complete], cb[complete]])
        try:
            fit = ols_regression(intent[complete], x, names=["PU", "NB", "CB"])
            text += (
                f"\nIntent ~ PU + NB + CB: R^2={fit.r_squared:.3f} "
                f"({100 * fit.r_squared:.1f}% of variance), "
                f"F={fit.f_statistic:.3f}, df=({fit.df[0]}, {fit.df[1]}), "
                f"p={'<0.0005' if fit.p_value < 0.0005 else f'{fit.p_value:.4f}'}\n"
            )
        except SurveyError as exc:
            text += f"\nIntent regression unavailable: {exc}\n"
    return text
