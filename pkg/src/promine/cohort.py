"""Session-level data model and cohort assembly.

A client episode is a sequence of visits, each carrying the two four-item
scales (ORS for symptomatology/functioning, SRS for therapeutic alliance) on
a 0-10 slider per item. Clients may skip a scale at any visit, so a scale
total exists only when all four of its items are present.

Cohort inclusion: a completed baseline ORS (visit 1), a completed 3rd-visit
ORS, at least one completed ORS between visits 5 and 10 (the latest such
visit is the "final" one), and age at least 14 at baseline.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .dataset import CATEGORICAL, NUMERIC, Column, Dataset

logger = logging.getLogger(__name__)

SERVICE_FLAGS = ("case_mgmt", "medical", "therapy", "ind_therapy", "grp_therapy")

ITEM_MIN = 0.0
ITEM_MAX = 10.0
SCALE_MIN = 0.0
SCALE_MAX = 40.0
BASELINE_VISIT = 1
THIRD_VISIT = 3
FINAL_WINDOW = (5, 10)
MIN_AGE = 14.0
NEW_CLIENT_WINDOW_DAYS = 90

SESSIONS_HEADER = (
    "client_id,visit_index,days_from_baseline,"
    "ors1,ors2,ors3,ors4,srs1,srs2,srs3,srs4,flags"
)

CLIENTS_HEADER = (
    "client_id,gender,age,diag_cat,payor_grp,county,region_type,state,"
    "days_since_prior_contact"
)


class CohortError(ValueError):
    """Raised for malformed session or client input."""


@dataclass(frozen=True)
class SessionRecord:
    """One visit: item scores (None = client skipped) plus visit metadata."""

    client_id: str
    visit_index: int
    days_from_baseline: int
    ors_items: tuple[float | None, float | None, float | None, float | None]
    srs_items: tuple[float | None, float | None, float | None, float | None]
    service_flags: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.visit_index < 1:
            raise CohortError(
                f"client {self.client_id}: visit_index must be >= 1, got {self.visit_index}"
            )
        for scale, items in (("ORS", self.ors_items), ("SRS", self.srs_items)):
            if len(items) != 4:
                raise CohortError(
                    f"client {self.client_id} visit {self.visit_index}: "
                    f"{scale} needs 4 items, got {len(items)}"
                )
            for score in items:
                if score is not None and not (ITEM_MIN <= score <= ITEM_MAX):
                    raise CohortError(
                        f"client {self.client_id} visit {self.visit_index}: "
                        f"{scale} item score {score} outside [{ITEM_MIN:g}, {ITEM_MAX:g}]"
                    )
        unknown = self.service_flags - set(SERVICE_FLAGS)
        if unknown:
            raise CohortError(
                f"client {self.client_id} visit {self.visit_index}: "
                f"unknown service flags {sorted(unknown)}"
            )

    @property
    def ors_total(self) -> float | None:
        """Sum of the 4 ORS items, or None if any item was skipped."""
        if any(x is None for x in self.ors_items):
            return None
        return float(sum(self.ors_items))  # type: ignore[arg-type]

    @property
    def srs_total(self) -> float | None:
        if any(x is None for x in self.srs_items):
            return None
        return float(sum(self.srs_items))  # type: ignore[arg-type]


@dataclass(frozen=True)
class ClientInfo:
    """Per-client attributes that do not vary by visit."""

    client_id: str
    gender: str
    age: float
    diag_cat: str
    payor_grp: str
    county: str
    region_type: str
    state: str
    # Days between the most recent pre-baseline contact and baseline;
    # None when the client had never been seen before.
    days_since_prior_contact: int | None = None


@dataclass(frozen=True)
class CohortRow:
    """One assembled client episode: the modeling variables plus the target source."""

    client_id: str
    bl_ors: float
    bl_srs: float | None
    third_delta_ors: float
    third_delta_srs: float | None
    gender: str
    diag_cat: str
    age: float
    payor_grp: str
    county: str
    region_type: str
    q_case_mgmt_bin: int
    q_medical_bin: int
    q_therapy_bin: int
    q_ind_therapy_bin: int
    q_grp_therapy_bin: int
    state: str
    is_new: int
    final_ors: float
    final_delta_ors: float


COHORT_FIELDS = tuple(f.name for f in fields(CohortRow))
NUMERIC_FEATURES = ("bl_ors", "bl_srs", "third_delta_ors", "third_delta_srs", "age")
CATEGORICAL_FEATURES = (
    "gender",
    "diag_cat",
    "payor_grp",
    "county",
    "region_type",
    "state",
    "q_case_mgmt_bin",
    "q_medical_bin",
    "q_therapy_bin",
    "q_ind_therapy_bin",
    "q_grp_therapy_bin",
    "is_new",
)
DEFAULT_FEATURES = (
    "bl_ors",
    "bl_srs",
    "third_delta_ors",
    "third_delta_srs",
    "gender",
    "diag_cat",
    "age",
    "payor_grp",
    "county",
    "region_type",
    "q_case_mgmt_bin",
    "q_medical_bin",
    "q_therapy_bin",
    "q_ind_therapy_bin",
    "q_grp_therapy_bin",
    "state",
    "is_new",
)
TARGET_SOURCE = "final_delta_ors"


def classify_new(prior_contact_offsets: Iterable[int]) -> int:
    """1 if the client had no contact within the 90 days before baseline.

    ``prior_contact_offsets`` are day counts before baseline (positive).
    An empty history means new. A contact exactly 90 days prior counts as
    seen, i.e. not new.
    """
    for days in prior_contact_offsets:
        if days <= 0:
            raise CohortError(f"prior contact offset must be positive days, got {days}")
        if days <= NEW_CLIENT_WINDOW_DAYS:
            return 0
    return 1


def _group_sessions(sessions: Iterable[SessionRecord]) -> dict[str, list[SessionRecord]]:
    grouped: dict[str, list[SessionRecord]] = {}
    for rec in sessions:
        grouped.setdefault(rec.client_id, []).append(rec)
    for client_id, recs in grouped.items():
        recs.sort(key=lambda r: r.visit_index)
        for a, b in zip(recs, recs[1:]):
            if b.visit_index == a.visit_index:
                raise CohortError(f"client {client_id}: duplicate visit_index {a.visit_index}")
            if b.days_from_baseline < a.days_from_baseline:
                raise CohortError(
                    f"client {client_id}: days_from_baseline decreases at visit {b.visit_index}"
                )
    return grouped


def assemble_cohort(
    sessions: Iterable[SessionRecord],
    clients: Mapping[str, ClientInfo],
) -> list[CohortRow]:
    """Assemble one CohortRow per qualifying client.

    Non-qualifying clients (missing required visit, underage) are silently
    excluded; malformed records raise. Output is sorted by client_id so the
    result does not depend on input order.
    """
    rows: list[CohortRow] = []
    for client_id, recs in sorted(_group_sessions(sessions).items()):
        by_visit = {r.visit_index: r for r in recs}
        baseline = by_visit.get(BASELINE_VISIT)
        third = by_visit.get(THIRD_VISIT)
        if baseline is None or baseline.ors_total is None:
            continue
        if third is None or third.ors_total is None:
            continue
        lo, hi = FINAL_WINDOW
        final = None
        for r in recs:
            if lo <= r.visit_index <= hi and r.ors_total is not None:
                final = r  # latest qualifying visit wins
        if final is None:
            continue
        info = clients.get(client_id)
        if info is None:
            raise CohortError(f"client {client_id} qualifies but has no client attributes")
        if info.age < MIN_AGE:
            continue

        bl_ors = baseline.ors_total
        bl_srs = baseline.srs_total
        third_srs = third.srs_total
        flags = frozenset().union(*(r.service_flags for r in recs))
        prior = (
            [info.days_since_prior_contact]
            if info.days_since_prior_contact is not None
            else []
        )
        rows.append(
            CohortRow(
                client_id=client_id,
                bl_ors=bl_ors,
                bl_srs=bl_srs,
                third_delta_ors=third.ors_total - bl_ors,
                third_delta_srs=(
                    third_srs - bl_srs if third_srs is not None and bl_srs is not None else None
                ),
                gender=info.gender,
                diag_cat=info.diag_cat,
                age=info.age,
                payor_grp=info.payor_grp,
                county=info.county,
                region_type=info.region_type,
                q_case_mgmt_bin=int("case_mgmt" in flags),
                q_medical_bin=int("medical" in flags),
                q_therapy_bin=int("therapy" in flags),
                q_ind_therapy_bin=int("ind_therapy" in flags),
                q_grp_therapy_bin=int("grp_therapy" in flags),
                state=info.state,
                is_new=classify_new(prior),
                final_ors=final.ors_total,
                final_delta_ors=final.ors_total - bl_ors,
            )
        )
    return rows


def rows_to_dataset(
    rows: Sequence[CohortRow],
    features: Sequence[str] = DEFAULT_FEATURES,
) -> Dataset:
    """Build a modeling Dataset from cohort rows.

    The target is the raw final delta stored in ``meta["final_delta_ors"]``;
    binarization happens in preprocessing. Rows with a missing value in any
    selected feature are excluded (logged), mirroring a complete-case policy.
    """
    import numpy as np

    keep = []
    for i, row in enumerate(rows):
        if all(getattr(row, f) is not None for f in features):
            keep.append(i)
    dropped = len(rows) - len(keep)
    if dropped:
        logger.info("rows_to_dataset: excluded %d rows with missing feature values", dropped)
    kept = [rows[i] for i in keep]

    columns = []
    for name in features:
        raw = [getattr(r, name) for r in kept]
        if name in NUMERIC_FEATURES:
            columns.append(Column(name, NUMERIC, np.asarray(raw, dtype=float)))
        else:
            columns.append(Column(name, CATEGORICAL, np.asarray([str(v) for v in raw], dtype=object)))
    deltas = np.asarray([r.final_delta_ors for r in kept], dtype=float)
    # Placeholder target; preprocessing replaces it with the mean-split labels.
    placeholder = (deltas > deltas.mean()).astype(int) if len(deltas) else np.zeros(0, dtype=int)
    return Dataset(
        tuple(columns),
        placeholder,
        target_name="above_mean_improvement",
        meta={"final_delta_ors": deltas, "client_ids": [r.client_id for r in kept]},
    )


# ---------------------------------------------------------------------------
# CSV interfaces
# ---------------------------------------------------------------------------

def _parse_item(cell: str, where: str) -> float | None:
    cell = cell.strip()
    if not cell:
        return None
    try:
        return float(cell)
    except ValueError as exc:
        raise CohortError(f"{where}: bad item score {cell!r}") from exc


def read_sessions_csv(path: str | Path) -> list[SessionRecord]:
    """Read the per-session CSV (one row per visit, empty cell = skipped item)."""
    expected = SESSIONS_HEADER.split(",")
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected:
            raise CohortError(f"{path}: expected header {SESSIONS_HEADER!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(expected):
                raise CohortError(f"{path}:{lineno}: expected {len(expected)} cells")
            where = f"{path}:{lineno}"
            client_id = row[0].strip()
            flags = frozenset(f for f in row[11].split("|") if f)
            records.append(
                SessionRecord(
                    client_id=client_id,
                    visit_index=int(row[1]),
                    days_from_baseline=int(row[2]),
                    ors_items=tuple(_parse_item(c, where) for c in row[3:7]),  # type: ignore[arg-type]
                    srs_items=tuple(_parse_item(c, where) for c in row[7:11]),  # type: ignore[arg-type]
                    service_flags=flags,
                )
            )
    return records


def read_clients_csv(path: str | Path) -> dict[str, ClientInfo]:
    expected = CLIENTS_HEADER.split(",")
    clients: dict[str, ClientInfo] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected:
            raise CohortError(f"{path}: expected header {CLIENTS_HEADER!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(expected):
                raise CohortError(f"{path}:{lineno}: expected {len(expected)} cells")
            prior = row[8].strip()
            info = ClientInfo(
                client_id=row[0].strip(),
                gender=row[1].strip(),
                age=float(row[2]),
                diag_cat=row[3].strip(),
                payor_grp=row[4].strip(),
                county=row[5].strip(),
                region_type=row[6].strip(),
                state=row[7].strip(),
                days_since_prior_contact=int(prior) if prior else None,
            )
            if info.client_id in clients:
                raise CohortError(f"{path}:{lineno}: duplicate client {info.client_id}")
            clients[info.client_id] = info
    return clients


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, "g")
    return str(value)


def write_cohort_csv(rows: Sequence[CohortRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COHORT_FIELDS)
        for row in rows:
            writer.writerow([_format_value(getattr(row, f)) for f in COHORT_FIELDS])


def read_cohort_csv(path: str | Path) -> list[CohortRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(COHORT_FIELDS):
            raise CohortError(f"{path}: expected cohort columns {COHORT_FIELDS}")
        for record in reader:
            kwargs: dict = {}
            for name in COHORT_FIELDS:
                cell = record[name].strip()
                if name in ("bl_srs", "third_delta_srs"):
                    kwargs[name] = float(cell) if cell else None
                elif name in ("bl_ors", "third_delta_ors", "age", "final_ors", "final_delta_ors"):
                    kwargs[name] = float(cell)
                elif name.startswith("q_") or name == "is_new":
                    kwargs[name] = int(cell)
                else:
                    kwargs[name] = cell
            rows.append(CohortRow(**kwargs))
    return rows
