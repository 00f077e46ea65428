"""Outcome statistics: reliable change, clinical significance, descriptives.

Reliable change buckets an ORS delta with the +/-4 thresholds; clinical
significance is crossing the clinical cutoff of 25 from below (baseline
at or under 25) to above (final over 25).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .cohort import CohortRow
from .special import chi2_sf

DELTA_MIN = -40.0
DELTA_MAX = 40.0
RELIABLE_CHANGE_THRESHOLD = 4.0
CLINICAL_CUTOFF = 25.0


class ReliableChange(Enum):
    DETERIORATE = "deteriorate"
    NO_CHANGE = "no_change"
    IMPROVE = "improve"


class NotApplicable(Exception):
    """Signals a row outside the clinical range (baseline above cutoff)."""


def reliable_change(delta: float) -> ReliableChange:
    """Bucket an ORS delta: below -4 deteriorate, above +4 improve, else no change."""
    if not (DELTA_MIN <= delta <= DELTA_MAX):
        raise ValueError(f"delta {delta} outside [{DELTA_MIN:g}, {DELTA_MAX:g}]")
    if delta < -RELIABLE_CHANGE_THRESHOLD:
        return ReliableChange.DETERIORATE
    if delta > RELIABLE_CHANGE_THRESHOLD:
        return ReliableChange.IMPROVE
    return ReliableChange.NO_CHANGE


def clinical_significance(bl_ors: float, final_ors: float) -> int:
    """1 iff the client started at or below the cutoff and finished above it.

    Raises NotApplicable for clients who started above the clinical range;
    those rows are excluded from crosstabs.
    """
    for name, value in (("bl_ors", bl_ors), ("final_ors", final_ors)):
        if not (0.0 <= value <= 40.0):
            raise ValueError(f"{name} {value} outside [0, 40]")
    if bl_ors > CLINICAL_CUTOFF:
        raise NotApplicable(f"baseline {bl_ors} above clinical cutoff {CLINICAL_CUTOFF:g}")
    return int(final_ors > CLINICAL_CUTOFF)


def chi_square_equal_expectation(counts: Sequence[float]) -> tuple[float, int, float]:
    """Goodness-of-fit chi-square against equal expected counts.

    Returns (chi2, df, p) with df = k - 1 and p from the chi-square upper tail.
    """
    counts = [float(c) for c in counts]
    if len(counts) < 2:
        raise ValueError("need at least 2 categories")
    if any(c < 0 for c in counts):
        raise ValueError("counts must be nonnegative")
    total = sum(counts)
    if total <= 0:
        raise ValueError("total count must be positive")
    expected = total / len(counts)
    chi2 = sum((c - expected) ** 2 / expected for c in counts)
    df = len(counts) - 1
    return chi2, df, chi2_sf(chi2, df)


@dataclass(frozen=True)
class Descriptives:
    n: int
    min: float
    max: float
    mean: float
    sd: float | None


def describe(values: Iterable[float]) -> Descriptives:
    """n/min/max/mean/sd with the sample (n-1) standard deviation."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("describe needs at least one value")
    sd = float(arr.std(ddof=1)) if arr.size >= 2 else None
    return Descriptives(
        n=int(arr.size),
        min=float(arr.min()),
        max=float(arr.max()),
        mean=float(arr.mean()),
        sd=sd,
    )


RC_ORDER = (ReliableChange.DETERIORATE, ReliableChange.NO_CHANGE, ReliableChange.IMPROVE)


@dataclass(frozen=True)
class OutcomeCrosstab:
    """Reliable change x clinical significance counts for one client group."""

    group: str
    counts: dict  # (ReliableChange, int) -> count
    total: int

    def count(self, rc: ReliableChange, cs: int) -> int:
        return self.counts.get((rc, cs), 0)

    def percent(self, rc: ReliableChange, cs: int) -> float:
        if self.total == 0:
            return 0.0
        return 100.0 * self.count(rc, cs) / self.total


def crosstab(rows: Sequence[CohortRow], clinical_range_only: bool = True) -> list[OutcomeCrosstab]:
    """Build the reliable-change x clinical-significance crosstab per new/old group.

    ``clinical_range_only`` restricts to clients who started at or below the
    clinical cutoff (the applicable set for clinical significance).
    """
    tables = []
    for group, want_new in (("old", 0), ("new", 1)):
        counts: dict[tuple[ReliableChange, int], int] = {}
        total = 0
        for row in rows:
            if row.is_new != want_new:
                continue
            try:
                cs = clinical_significance(row.bl_ors, row.final_ors)
            except NotApplicable:
                if clinical_range_only:
                    continue
                cs = 0
            rc = reliable_change(row.final_delta_ors)
            counts[(rc, cs)] = counts.get((rc, cs), 0) + 1
            total += 1
        tables.append(OutcomeCrosstab(group=group, counts=counts, total=total))
    return tables


def reliable_change_counts(rows: Sequence[CohortRow]) -> dict[ReliableChange, int]:
    counts = {rc: 0 for rc in RC_ORDER}
    for row in rows:
        counts[reliable_change(row.final_delta_ors)] += 1
    return counts


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------

def _fmt(x: float, nd: int = 2) -> str:
    return f"{x:.{nd}f}"


def descriptives_report(rows: Sequence[CohortRow]) -> str:
    """Aligned text block of cohort descriptives split by state and new/old."""
    lines = ["DESCRIPTIVE STATISTICS", ""]
    header = f"{'Group':<10}{'Variable':<18}{'N':>6}{'Min':>9}{'Max':>9}{'Mean':>9}{'SD':>9}"
    lines.append(header)
    lines.append("-" * len(header))

    def block(label: str, members: list[CohortRow]) -> None:
        if not members:
            return
        for var in ("bl_ors", "final_ors", "final_delta_ors"):
            d = describe([getattr(r, var) for r in members])
            sd = _fmt(d.sd, 3) if d.sd is not None else "-"
            lines.append(
                f"{label:<10}{var:<18}{d.n:>6}{_fmt(d.min, 1):>9}{_fmt(d.max, 1):>9}"
                f"{_fmt(d.mean, 2):>9}{sd:>9}"
            )

    for state in sorted({r.state for r in rows}):
        block(state, [r for r in rows if r.state == state])
    for label, flag in (("old", 0), ("new", 1)):
        block(label, [r for r in rows if r.is_new == flag])
    return "\n".join(lines) + "\n"


def descriptives_csv(rows: Sequence[CohortRow]) -> str:
    out = ["group,variable,n,min,max,mean,sd"]
    groups = [(s, [r for r in rows if r.state == s]) for s in sorted({r.state for r in rows})]
    groups += [(lab, [r for r in rows if r.is_new == flag]) for lab, flag in (("old", 0), ("new", 1))]
    for label, members in groups:
        if not members:
            continue
        for var in ("bl_ors", "final_ors", "final_delta_ors"):
            d = describe([getattr(r, var) for r in members])
            sd = repr(d.sd) if d.sd is not None else ""
            out.append(f"{label},{var},{d.n},{d.min!r},{d.max!r},{d.mean!r},{sd}")
    return "\n".join(out) + "\n"


def crosstab_report(tables: Sequence[OutcomeCrosstab]) -> str:
    """Aligned text of the reliable change x clinical significance breakout."""
    lines = ["RELIABLE CHANGE VS. CLINICAL SIGNIFICANCE (baseline ORS <= 25)", ""]
    for table in tables:
        lines.append(f"{table.group.capitalize()} clients (n={table.total})")
        head = f"{'Reliable change':<18}{'ClinSig=0':>12}{'ClinSig=1':>12}{'Total':>12}"
        lines.append(head)
        lines.append("-" * len(head))
        col_totals = [0, 0]
        for rc in RC_ORDER:
            c0, c1 = table.count(rc, 0), table.count(rc, 1)
            col_totals[0] += c0
            col_totals[1] += c1
            lines.append(
                f"{rc.value:<18}{c0:>12}{c1:>12}{c0 + c1:>12}"
            )
            lines.append(
                f"{'  % of total':<18}{_fmt(table.percent(rc, 0), 1):>11}%"
                f"{_fmt(table.percent(rc, 1), 1):>11}%"
                f"{_fmt(table.percent(rc, 0) + table.percent(rc, 1), 1):>11}%"
            )
        lines.append(f"{'total':<18}{col_totals[0]:>12}{col_totals[1]:>12}{table.total:>12}")
        lines.append("")
    return "\n".join(lines)


def crosstab_csv(tables: Sequence[OutcomeCrosstab]) -> str:
    out = ["group,reliable_change,clinical_significance,count,pct_of_total"]
    for table in tables:
        for rc in RC_ORDER:
            for cs in (0, 1):
                out.append(
                    f"{table.group},{rc.value},{cs},{table.count(rc, cs)},"
                    f"{table.percent(rc, cs):.4f}"
                )
    return "\n".join(out) + "\n"


def format_p(p: float) -> str:
    """p to 4 decimals; tiny values print as the reporting floor."""
    if p < 0.0005:
        return "<0.0005"
    return f"{p:.4f}"


def reliable_change_test_report(rows: Sequence[CohortRow]) -> str:
    """Chi-square of reliable-change categories against equal expectations,
    over all clients (no baseline restriction)."""
    counts = reliable_change_counts(rows)
    ordered = [counts[rc] for rc in RC_ORDER]
    chi2, df, p = chi_square_equal_expectation(ordered)
    n = sum(ordered)
    lines = [
        "RELIABLE CHANGE DISTRIBUTION (all clients)",
        "",
        f"{'Category':<14}{'Count':>8}{'Pct':>9}",
    ]
    for rc in RC_ORDER:
        pct = 100.0 * counts[rc] / n if n else 0.0
        lines.append(f"{rc.value:<14}{counts[rc]:>8}{_fmt(pct, 1):>8}%")
    lines.append("")
    lines.append(f"chi2={chi2:.1f}, df={df}, p={format_p(p)}, n={n}")
    return "\n".join(lines) + "\n"
