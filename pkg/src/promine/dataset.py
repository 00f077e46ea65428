"""Columnar dataset with per-column schema and a binary target.

Three column kinds flow through the pipeline:

* ``numeric``      - float values (possibly z-scored),
* ``categorical``  - string levels,
* ``binned``       - integer interval ids produced by discretization,
                     carrying the ordered cut points that define them.

Learners declare per algorithm how they consume each kind.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"
BINNED = "binned"
KINDS = (NUMERIC, CATEGORICAL, BINNED)


class SchemaError(ValueError):
    """Raised when rows or columns do not match the expected schema."""


@dataclass(frozen=True)
class Column:
    """One feature column plus the metadata needed to interpret it."""

    name: str
    kind: str
    values: np.ndarray
    levels: tuple[str, ...] = ()        # categorical level order (fit-time)
    cuts: tuple[float, ...] = ()        # binned: strictly increasing boundaries

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise SchemaError(f"unknown column kind {self.kind!r} for {self.name!r}")
        values = np.asarray(self.values)
        if self.kind == NUMERIC:
            values = values.astype(float)
            if np.isnan(values).any():
                raise SchemaError(f"numeric column {self.name!r} contains NaN")
        elif self.kind == CATEGORICAL:
            values = np.asarray([str(v) for v in values], dtype=object)
        else:
            values = values.astype(int)
            if any(b <= a for a, b in zip(self.cuts, self.cuts[1:])):
                raise SchemaError(f"cut points of {self.name!r} must be strictly increasing")
            if len(values) and (values.min() < 0 or values.max() > len(self.cuts)):
                raise SchemaError(f"bin ids of {self.name!r} outside 0..{len(self.cuts)}")
        object.__setattr__(self, "values", values)
        if self.kind == CATEGORICAL and not self.levels:
            object.__setattr__(self, "levels", tuple(sorted(set(values.tolist()))))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def n_levels(self) -> int:
        """Number of discrete levels; meaningless for numeric columns."""
        if self.kind == CATEGORICAL:
            return len(self.levels)
        if self.kind == BINNED:
            return len(self.cuts) + 1
        raise SchemaError(f"{self.name!r} is numeric and has no levels")

    def codes(self) -> np.ndarray:
        """Integer codes for discrete columns; unknown categorical levels code to -1."""
        if self.kind == BINNED:
            return self.values.astype(int)
        if self.kind == CATEGORICAL:
            index = {lvl: i for i, lvl in enumerate(self.levels)}
            return np.asarray([index.get(v, -1) for v in self.values], dtype=int)
        raise SchemaError(f"{self.name!r} is numeric and has no codes")

    def take(self, idx: np.ndarray) -> "Column":
        return replace(self, values=self.values[idx])


@dataclass(frozen=True)
class Dataset:
    """Feature columns plus a designated binary target (0/1)."""

    columns: tuple[Column, ...]
    target: np.ndarray
    target_name: str = "target"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        target = np.asarray(self.target, dtype=int)
        if not np.isin(target, (0, 1)).all():
            raise SchemaError("target must be binary 0/1")
        lengths = {len(c) for c in self.columns} | {len(target)}
        if len(lengths) > 1:
            raise SchemaError(f"column lengths differ: {sorted(lengths)}")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names")
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "target", target)

    @property
    def n_rows(self) -> int:
        return len(self.target)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"no column named {name!r}")

    def select(self, names: Sequence[str]) -> "Dataset":
        """Keep only the named features, in the given order."""
        cols = tuple(self.column(n) for n in names)
        return Dataset(cols, self.target, self.target_name, dict(self.meta))

    def drop(self, names: Iterable[str]) -> "Dataset":
        dropped = set(names)
        cols = tuple(c for c in self.columns if c.name not in dropped)
        return Dataset(cols, self.target, self.target_name, dict(self.meta))

    def take(self, idx: np.ndarray) -> "Dataset":
        """Row subset (fold split, shuffling)."""
        idx = np.asarray(idx)
        cols = tuple(c.take(idx) for c in self.columns)
        return Dataset(cols, self.target[idx], self.target_name, dict(self.meta))

    def replace_column(self, column: Column) -> "Dataset":
        cols = tuple(column if c.name == column.name else c for c in self.columns)
        if column.name not in self.feature_names:
            cols = cols + (column,)
        return Dataset(cols, self.target, self.target_name, dict(self.meta))

    def schema_fingerprint(self) -> str:
        """Stable digest of (name, kind, cuts) used to reject mismatched rows.

        Categorical level sets are deliberately excluded: an unseen level at
        predict time is a handled case, not a schema mismatch.
        """
        import hashlib
        parts = []
        for c in self.columns:
            extra = ",".join(repr(x) for x in c.cuts)
            parts.append(f"{c.name}|{c.kind}|{extra}")
        return hashlib.sha256(";".join(parts).encode()).hexdigest()[:16]
