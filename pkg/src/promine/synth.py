"""Synthetic cohort generator with planted feature-target structure.

Stand-in for the (PHI) clinical data: every feature carries a planted
log-odds contribution that switches on when the value falls on its "effect"
side (above the distribution center for numeric features, inside a level
subset for categorical ones). Labels are drawn from the logistic model over
those binary drivers, so with a single planted effect the population odds
ratio of driver x label equals exp(log_odds) exactly.

The continuous improvement delta is then drawn from two bands separated by
a dead zone around ``anchor`` so that the downstream mean-split target
reproduces the planted labels exactly: every below-band value stays below
the realized mean and every above-band value stays above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cohort import CohortRow

SCALE_MAX = 40.0


class SyntheticSpecError(ValueError):
    """Raised when a cohort spec is internally inconsistent."""


@dataclass(frozen=True)
class NumericFeature:
    mean: float
    sd: float
    lo: float
    hi: float
    log_odds: float = 0.0

    def validate(self, name: str) -> None:
        if self.sd <= 0:
            raise SyntheticSpecError(f"{name}: sd must be positive")
        if self.lo >= self.hi:
            raise SyntheticSpecError(f"{name}: lo must be < hi")


@dataclass(frozen=True)
class CategoricalFeature:
    levels: tuple[str, ...]
    freqs: tuple[float, ...]
    log_odds: float = 0.0
    effect_levels: tuple[str, ...] = ()

    def validate(self, name: str) -> None:
        if len(self.levels) != len(self.freqs) or not self.levels:
            raise SyntheticSpecError(f"{name}: levels and freqs must align and be nonempty")
        if any(f < 0 for f in self.freqs):
            raise SyntheticSpecError(f"{name}: negative level frequency")
        if abs(sum(self.freqs) - 1.0) > 1e-9:
            raise SyntheticSpecError(f"{name}: level frequencies must sum to 1")
        unknown = set(self.effect_levels) - set(self.levels)
        if unknown:
            raise SyntheticSpecError(f"{name}: effect levels {sorted(unknown)} not in levels")


@dataclass(frozen=True)
class FlagFeature:
    freq: float
    log_odds: float = 0.0

    def validate(self, name: str) -> None:
        if not 0.0 <= self.freq <= 1.0:
            raise SyntheticSpecError(f"{name}: freq must be in [0, 1]")


@dataclass(frozen=True)
class DeltaBands:
    """Dead-zone construction for the final improvement delta."""

    anchor: float = 4.0
    gap: float = 1.5
    spread: float = 12.0

    def validate(self) -> None:
        if self.gap <= 0 or self.spread <= 0:
            raise SyntheticSpecError("delta bands need positive gap and spread")


NUMERIC_NAMES = ("bl_ors", "bl_srs", "third_delta_ors", "third_delta_srs", "age")
CATEGORICAL_NAMES = ("gender", "diag_cat", "payor_grp", "county", "region_type", "state")
FLAG_NAMES = (
    "q_case_mgmt_bin",
    "q_medical_bin",
    "q_therapy_bin",
    "q_ind_therapy_bin",
    "q_grp_therapy_bin",
)


@dataclass(frozen=True)
class CohortSpec:
    n: int = 714
    seed: int = 7
    class_balance: float = 0.5
    new_fraction: float = 253 / 714
    is_new_log_odds: float = 0.0
    numeric: dict = field(default_factory=dict)
    categorical: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    delta: DeltaBands = field(default_factory=DeltaBands)

    def validate(self) -> None:
        if self.n < 2:
            raise SyntheticSpecError("n must be at least 2")
        if not 0.0 < self.class_balance < 1.0:
            raise SyntheticSpecError("class_balance must be inside (0, 1)")
        if not 0.0 <= self.new_fraction <= 1.0:
            raise SyntheticSpecError("new_fraction must be in [0, 1]")
        missing = [n for n in NUMERIC_NAMES if n not in self.numeric]
        missing += [n for n in CATEGORICAL_NAMES if n not in self.categorical]
        missing += [n for n in FLAG_NAMES if n not in self.flags]
        if missing:
            raise SyntheticSpecError(f"spec missing features: {missing}")
        for name in NUMERIC_NAMES:
            self.numeric[name].validate(name)
        for name in CATEGORICAL_NAMES:
            self.categorical[name].validate(name)
        for name in FLAG_NAMES:
            self.flags[name].validate(name)
        self.delta.validate()


def default_cohort_spec(n: int = 714, seed: int = 7) -> CohortSpec:
    """Calibrated defaults: strong early-change and baseline effects, mild
    gender/payor/alliance effects, one deliberately constant service flag."""
    ln = math.log
    return CohortSpec(
        n=n,
        seed=seed,
        is_new_log_odds=ln(1.5),
        numeric={
            "bl_ors": NumericFeature(21.0, 8.7, 2.0, 34.0, log_odds=-ln(7.86)),
            "bl_srs": NumericFeature(30.0, 7.0, 4.0, 40.0, log_odds=-ln(1.74)),
            "third_delta_ors": NumericFeature(1.5, 6.0, -20.0, 25.0, log_odds=ln(11.37)),
            "third_delta_srs": NumericFeature(0.5, 4.0, -15.0, 15.0, log_odds=0.0),
            "age": NumericFeature(38.0, 13.0, 14.0, 80.0, log_odds=0.0),
        },
        categorical={
            "gender": CategoricalFeature(
                ("female", "male"), (0.62, 0.38), log_odds=ln(1.76), effect_levels=("male",)
            ),
            "diag_cat": CategoricalFeature(
                ("mood", "anxiety", "substance_abuse", "psychotic", "other"),
                (0.40, 0.22, 0.15, 0.08, 0.15),
                log_odds=ln(1.74),
                effect_levels=("mood", "substance_abuse"),
            ),
            "payor_grp": CategoricalFeature(
                ("medicaid", "medicare", "commercial", "safety_net", "other"),
                (0.35, 0.20, 0.20, 0.15, 0.10),
                log_odds=ln(1.75),
                effect_levels=("commercial",),
            ),
            "county": CategoricalFeature(
                ("davidson", "rutherford", "williamson", "maury", "monroe", "marion", "lake", "porter"),
                (0.22, 0.14, 0.12, 0.12, 0.11, 0.11, 0.09, 0.09),
            ),
            "region_type": CategoricalFeature(("urban", "rural"), (0.70, 0.30)),
            "state": CategoricalFeature(("TN", "IN"), (0.62, 0.38)),
        },
        flags={
            "q_case_mgmt_bin": FlagFeature(0.25),
            "q_medical_bin": FlagFeature(0.45),
            "q_therapy_bin": FlagFeature(1.0),  # constant: exercised by the variance filter
            "q_ind_therapy_bin": FlagFeature(0.85),
            "q_grp_therapy_bin": FlagFeature(0.30),
        },
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _calibrate_intercept(scores: np.ndarray, balance: float) -> float:
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _sigmoid(scores + mid).mean() < balance:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _exact_count_binary(n: int, fraction: float, rng: np.random.Generator) -> np.ndarray:
    ones = int(round(n * fraction))
    values = np.zeros(n, dtype=int)
    values[rng.permutation(n)[:ones]] = 1
    return values


def generate_synthetic(spec: CohortSpec) -> list[CohortRow]:
    """Generate a cohort deterministically from the spec's seed."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n = spec.n

    numeric: dict[str, np.ndarray] = {}
    drivers: list[tuple[float, np.ndarray]] = []

    def draw_numeric(name: str, lo_row=None, hi_row=None) -> np.ndarray:
        fs = spec.numeric[name]
        values = rng.normal(fs.mean, fs.sd, size=n)
        lo = np.maximum(fs.lo, lo_row) if lo_row is not None else fs.lo
        hi = np.minimum(fs.hi, hi_row) if hi_row is not None else fs.hi
        values = np.clip(values, lo, hi)
        if fs.log_odds != 0.0:
            drivers.append((fs.log_odds, (values > fs.mean).astype(float)))
        return values

    numeric["bl_ors"] = draw_numeric("bl_ors")
    numeric["bl_srs"] = draw_numeric("bl_srs")
    # Delta scores are constrained so the implied visit totals stay on the 0-40 scale.
    numeric["third_delta_ors"] = draw_numeric(
        "third_delta_ors", lo_row=-numeric["bl_ors"], hi_row=SCALE_MAX - numeric["bl_ors"]
    )
    numeric["third_delta_srs"] = draw_numeric(
        "third_delta_srs", lo_row=-numeric["bl_srs"], hi_row=SCALE_MAX - numeric["bl_srs"]
    )
    numeric["age"] = draw_numeric("age")

    categorical: dict[str, np.ndarray] = {}
    for name in CATEGORICAL_NAMES:
        fs = spec.categorical[name]
        idx = rng.choice(len(fs.levels), size=n, p=np.asarray(fs.freqs) / sum(fs.freqs))
        values = np.asarray(fs.levels, dtype=object)[idx]
        categorical[name] = values
        if fs.log_odds != 0.0 and fs.effect_levels:
            drivers.append((fs.log_odds, np.isin(values, fs.effect_levels).astype(float)))

    flags: dict[str, np.ndarray] = {}
    for name in FLAG_NAMES:
        fs = spec.flags[name]
        values = (rng.random(n) < fs.freq).astype(int)
        flags[name] = values
        if fs.log_odds != 0.0:
            drivers.append((fs.log_odds, values.astype(float)))

    is_new = _exact_count_binary(n, spec.new_fraction, rng)
    if spec.is_new_log_odds != 0.0:
        drivers.append((spec.is_new_log_odds, is_new.astype(float)))

    scores = np.zeros(n)
    for weight, driver in drivers:
        scores += weight * driver
    intercept = _calibrate_intercept(scores, spec.class_balance)
    y = (rng.random(n) < _sigmoid(scores + intercept)).astype(int)

    deltas, y = _draw_deltas(y, numeric["bl_ors"], spec.delta, rng)

    # Round for a diff-able CSV, then re-check that the mean split still
    # reproduces the planted labels exactly.
    bl_ors = np.round(numeric["bl_ors"], 2)
    deltas = np.round(deltas, 2)
    deltas = np.minimum(deltas, SCALE_MAX - bl_ors)
    deltas = np.maximum(deltas, -bl_ors)
    realized_mean = deltas.mean()
    if not np.array_equal((deltas > realized_mean).astype(int), y):
        raise SyntheticSpecError(
            "mean-split labels diverge from planted labels; "
            "widen delta.gap or increase n"
        )

    final_ors = np.clip(np.round(bl_ors + deltas, 2), 0.0, SCALE_MAX)
    bl_srs = np.round(numeric["bl_srs"], 2)
    rows = []
    for i in range(n):
        rows.append(
            CohortRow(
                client_id=f"synth-{i + 1:05d}",
                bl_ors=float(bl_ors[i]),
                bl_srs=float(bl_srs[i]),
                third_delta_ors=float(np.round(numeric["third_delta_ors"][i], 2)),
                third_delta_srs=float(np.round(numeric["third_delta_srs"][i], 2)),
                gender=str(categorical["gender"][i]),
                diag_cat=str(categorical["diag_cat"][i]),
                age=float(np.round(numeric["age"][i], 1)),
                payor_grp=str(categorical["payor_grp"][i]),
                county=str(categorical["county"][i]),
                region_type=str(categorical["region_type"][i]),
                q_case_mgmt_bin=int(flags["q_case_mgmt_bin"][i]),
                q_medical_bin=int(flags["q_medical_bin"][i]),
                q_therapy_bin=int(flags["q_therapy_bin"][i]),
                q_ind_therapy_bin=int(flags["q_ind_therapy_bin"][i]),
                q_grp_therapy_bin=int(flags["q_grp_therapy_bin"][i]),
                state=str(categorical["state"][i]),
                is_new=int(is_new[i]),
                final_ors=float(final_ors[i]),
                final_delta_ors=float(deltas[i]),
            )
        )
    return rows


def _draw_deltas(
    y: np.ndarray, bl_ors: np.ndarray, bands: DeltaBands, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draw final deltas from the two bands around the dead zone.

    Rows whose baseline leaves no room for their band (scale ceiling/floor)
    are flipped to the other label first. The bands are sized so the mixture
    mean lands at the anchor; a residual constant shift re-centers it when
    sampling noise pushes it out of the dead zone.
    """
    n = len(y)
    a, g = bands.anchor, bands.gap
    p = y.mean() if 0.0 < y.mean() < 1.0 else 0.5
    m_up = bands.spread
    m_dn = (2.0 * g * (2.0 * p - 1.0) + p * m_up) / (1.0 - p)
    if m_dn <= 0:
        raise SyntheticSpecError(
            "delta bands infeasible for this class balance; increase spread"
        )

    y = y.copy()
    room_up = SCALE_MAX - bl_ors - (a + g)   # width available above the dead zone
    room_dn = bl_ors + (a - g)               # room below before hitting delta = -bl
    y[(y == 1) & (room_up < 0)] = 0
    y[(y == 0) & (room_dn < 0) & (room_up >= 0)] = 1
    if ((y == 0) & (room_dn < 0)).any():
        raise SyntheticSpecError("delta bands infeasible for some baselines")

    deltas = np.empty(n)
    up = y == 1
    u = rng.random(n)
    deltas[up] = a + g + u[up] * np.minimum(m_up, room_up[up])
    lo_width = np.minimum(m_dn, room_dn[~up])
    deltas[~up] = a - g - u[~up] * lo_width

    realized = deltas.mean()
    if not (a - g < realized < a + g):
        shift = a - realized
        deltas = deltas + shift
        deltas = np.clip(deltas, -bl_ors, SCALE_MAX - bl_ors)
    return deltas, y


# ---------------------------------------------------------------------------
# Declarative spec (de)serialization
# ---------------------------------------------------------------------------

def spec_to_dict(spec: CohortSpec) -> dict:
    return {
        "n": spec.n,
        "seed": spec.seed,
        "class_balance": spec.class_balance,
        "new_fraction": spec.new_fraction,
        "is_new_log_odds": spec.is_new_log_odds,
        "final_delta": {
            "anchor": spec.delta.anchor,
            "gap": spec.delta.gap,
            "spread": spec.delta.spread,
        },
        "numeric_features": {
            name: {
                "mean": fs.mean,
                "sd": fs.sd,
                "lo": fs.lo,
                "hi": fs.hi,
                "log_odds": fs.log_odds,
            }
            for name, fs in spec.numeric.items()
        },
        "categorical_features": {
            name: {
                "levels": list(fs.levels),
                "freqs": list(fs.freqs),
                "log_odds": fs.log_odds,
                "effect_levels": list(fs.effect_levels),
            }
            for name, fs in spec.categorical.items()
        },
        "flags": {
            name: {"freq": fs.freq, "log_odds": fs.log_odds}
            for name, fs in spec.flags.items()
        },
    }


def spec_from_dict(data: dict) -> CohortSpec:
    base = default_cohort_spec()
    delta = data.get("final_delta", {})
    numeric = dict(base.numeric)
    for name, cfg in data.get("numeric_features", {}).items():
        numeric[name] = NumericFeature(
            mean=float(cfg["mean"]),
            sd=float(cfg["sd"]),
            lo=float(cfg["lo"]),
            hi=float(cfg["hi"]),
            log_odds=float(cfg.get("log_odds", 0.0)),
        )
    categorical = dict(base.categorical)
    for name, cfg in data.get("categorical_features", {}).items():
        categorical[name] = CategoricalFeature(
            levels=tuple(cfg["levels"]),
            freqs=tuple(float(f) for f in cfg["freqs"]),
            log_odds=float(cfg.get("log_odds", 0.0)),
            effect_levels=tuple(cfg.get("effect_levels", ())),
        )
    flags = dict(base.flags)
    for name, cfg in data.get("flags", {}).items():
        flags[name] = FlagFeature(
            freq=float(cfg["freq"]), log_odds=float(cfg.get("log_odds", 0.0))
        )
    spec = CohortSpec(
        n=int(data.get("n", base.n)),
        seed=int(data.get("seed", base.seed)),
        class_balance=float(data.get("class_balance", base.class_balance)),
        new_fraction=float(data.get("new_fraction", base.new_fraction)),
        is_new_log_odds=float(data.get("is_new_log_odds", base.is_new_log_odds)),
        numeric=numeric,
        categorical=categorical,
        flags=flags,
        delta=DeltaBands(
            anchor=float(delta.get("anchor", base.delta.anchor)),
            gap=float(delta.get("gap", base.delta.gap)),
            spread=float(delta.get("spread", base.delta.spread)),
        ),
    )
    spec.validate()
    return spec
