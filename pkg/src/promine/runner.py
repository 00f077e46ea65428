"""Experiment runner CLI.

Verbs: ``run`` (full pipeline to report files), ``synth`` (generate a
cohort CSV), ``describe`` (outcome tables), ``survey`` (clinician-survey
tables), ``validate`` (config check only). All outputs are deterministic
functions of the config and seed; no timestamps are written.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .cohort import (
    CohortRow,
    assemble_cohort,
    read_clients_csv,
    read_cohort_csv,
    read_sessions_csv,
    rows_to_dataset,
    write_cohort_csv,
)
from .dataset import Dataset
from .eval import BINNING_LABELS, CvResult, EvalReport, PipelineSpec, cross_validate
from .featsel import (
    OUT_OF_SCOPE_SELECTORS,
    make_selector,
    odds_ratio_report_csv,
    odds_ratio_report_text,
    odds_ratio_table,
    selection_trace_csv,
)
from .learners import ALGORITHMS, OUT_OF_SCOPE, ClassifierSpec, make_classifier, model_to_doc
from .outcomes import (
    crosstab,
    crosstab_csv,
    crosstab_report,
    descriptives_csv,
    descriptives_report,
    reliable_change_test_report,
)
from .preprocess import binarize_target, fit_pipeline
from .survey import read_survey_csv, survey_analysis
from .synth import CohortSpec, default_cohort_spec, generate_synthetic, spec_from_dict, spec_to_dict

logger = logging.getLogger(__name__)

VALID_SELECTORS = ("none", "nb_wrapper", "chi2_top_k", "relief_top_k")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    input_kind: str = "synthetic"          # synthetic | cohort_csv | sessions_csv
    synthetic: dict = field(default_factory=dict)
    cohort_csv: str | None = None
    sessions_csv: str | None = None
    clients_csv: str | None = None
    cohort_filter: str = "all"             # all | new_only
    features: tuple[str, ...] | None = None
    binnings: tuple[str, ...] = ("bin_target", "caim")
    selector: str = "nb_wrapper"
    selector_params: dict = field(default_factory=dict)
    models: tuple[str, ...] = ("naive_bayes",)
    seed: int = 42
    n_folds: int = 10
    per_fold_target_mean: bool = False
    threads: int = 1

    def validate(self) -> None:
        if self.input_kind not in ("synthetic", "cohort_csv", "sessions_csv"):
            raise ConfigError(f"unknown input kind {self.input_kind!r}")
        if self.input_kind == "cohort_csv" and not self.cohort_csv:
            raise ConfigError("input kind cohort_csv requires cohort_csv path")
        if self.input_kind == "sessions_csv" and not (self.sessions_csv and self.clients_csv):
            raise ConfigError("input kind sessions_csv requires sessions_csv and clients_csv paths")
        if self.cohort_filter not in ("all", "new_only"):
            raise ConfigError(f"cohort_filter must be all or new_only, got {self.cohort_filter!r}")
        for binning in self.binnings:
            if binning not in BINNING_LABELS:
                raise ConfigError(f"unknown binning {binning!r}; valid: {sorted(BINNING_LABELS)}")
        if not self.binnings:
            raise ConfigError("at least one binning axis is required")
        if self.selector in OUT_OF_SCOPE_SELECTORS:
            raise ConfigError(f"selector {self.selector!r} is out of scope per the experiment design")
        if self.selector not in VALID_SELECTORS:
            raise ConfigError(f"unknown selector {self.selector!r}; valid: {VALID_SELECTORS}")
        for model in self.models:
            if model in OUT_OF_SCOPE:
                raise ConfigError(
                    f"model {model!r} is out of scope per the experiment design and not implemented"
                )
            if model not in ALGORITHMS:
                raise ConfigError(f"unknown model {model!r}; valid: {sorted(ALGORITHMS)}")
        if not self.models:
            raise ConfigError("at least one model is required")
        if self.n_folds < 2:
            raise ConfigError("n_folds must be at least 2")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.input_kind == "synthetic":
            spec_from_dict(self.synthetic)  # raises on malformed synthetic spec

    def to_dict(self) -> dict:
        return {
            "input": {
                "kind": self.input_kind,
                "synthetic": self.synthetic,
                "cohort_csv": self.cohort_csv,
                "sessions_csv": self.sessions_csv,
                "clients_csv": self.clients_csv,
            },
            "cohort_filter": self.cohort_filter,
            "features": list(self.features) if self.features else None,
            "binnings": list(self.binnings),
            "selector": {"name": self.selector, "params": self.selector_params},
            "models": list(self.models),
            "seed": self.seed,
            "n_folds": self.n_folds,
            "per_fold_target_mean": self.per_fold_target_mean,
            "threads": self.threads,
        }

    @staticmethod
    def from_dict(doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a mapping")
        input_doc = doc.get("input", {}) or {}
        selector_doc = doc.get("selector", {}) or {}
        if isinstance(selector_doc, str):
            selector_doc = {"name": selector_doc}
        features = doc.get("features")
        config = ExperimentConfig(
            input_kind=input_doc.get("kind", "synthetic"),
            synthetic=input_doc.get("synthetic", {}) or {},
            cohort_csv=input_doc.get("cohort_csv"),
            sessions_csv=input_doc.get("sessions_csv"),
            clients_csv=input_doc.get("clients_csv"),
            cohort_filter=doc.get("cohort_filter", "all"),
            features=tuple(features) if features else None,
            binnings=tuple(doc.get("binnings", ("bin_target", "caim"))),
            selector=selector_doc.get("name", "nb_wrapper"),
            selector_params=dict(selector_doc.get("params", {}) or {}),
            models=tuple(doc.get("models", ("naive_bayes",))),
            seed=int(doc.get("seed", 42)),
            n_folds=int(doc.get("n_folds", 10)),
            per_fold_target_mean=bool(doc.get("per_fold_target_mean", False)),
            threads=int(doc.get("threads", 1)),
        )
        config.validate()
        return config


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return ExperimentConfig.from_dict(doc or {})


def config_hash(config: ExperimentConfig) -> str:
    canonical = json.dumps(config.to_dict(), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Cohort loading
# ---------------------------------------------------------------------------

def load_cohort(config: ExperimentConfig) -> list[CohortRow]:
    if config.input_kind == "synthetic":
        spec = spec_from_dict({**config.synthetic})
        rows = generate_synthetic(spec)
    elif config.input_kind == "cohort_csv":
        rows = read_cohort_csv(config.cohort_csv)
    else:
        sessions = read_sessions_csv(config.sessions_csv)
        clients = read_clients_csv(config.clients_csv)
        rows = assemble_cohort(sessions, clients)
    if config.cohort_filter == "new_only":
        rows = [r for r in rows if r.is_new == 1]
    if len(rows) < config.n_folds:
        raise ConfigError(f"cohort of {len(rows)} rows cannot support {config.n_folds} folds")
    return rows


def build_dataset(config: ExperimentConfig, rows: list[CohortRow]) -> Dataset:
    if config.features:
        return rows_to_dataset(rows, features=config.features)
    dataset = rows_to_dataset(rows)
    if config.cohort_filter == "new_only":
        dataset = dataset.drop(["is_new"])  # constant after the filter
    return dataset


# ---------------------------------------------------------------------------
# run verb
# ---------------------------------------------------------------------------

def run_experiment(config: ExperimentConfig, out_dir: str | Path) -> Path:
    """Execute the full experiment and write the report directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = load_cohort(config)
    dataset = build_dataset(config, rows)

    write_cohort_csv(rows, out / "cohort.csv")
    (out / "descriptives.txt").write_text(descriptives_report(rows))
    (out / "descriptives.csv").write_text(descriptives_csv(rows))
    tables = crosstab(rows)
    (out / "crosstab.txt").write_text(crosstab_report(tables))
    (out / "crosstab.csv").write_text(crosstab_csv(tables))
    (out / "reliable_change_test.txt").write_text(reliable_change_test_report(rows))

    deltas = np.asarray(dataset.meta["final_delta_ors"], dtype=float)
    target, labels = binarize_target(deltas)
    labeled = Dataset(dataset.columns, labels, dataset.target_name, dict(dataset.meta))
    reports = odds_ratio_table(labeled)
    (out / "odds_ratios.txt").write_text(odds_ratio_report_text(reports))
    (out / "odds_ratios.csv").write_text(odds_ratio_report_csv(reports))

    pipelines = [
        PipelineSpec(
            model=ClassifierSpec(model, seed=config.seed),
            binning=binning,
            selector=config.selector,
            selector_params=config.selector_params,
            per_fold_target_mean=config.per_fold_target_mean,
        )
        for model in config.models
        for binning in config.binnings
    ]

    def evaluate(pspec: PipelineSpec) -> CvResult:
        return cross_validate(pspec, dataset, seed=config.seed, n_folds=config.n_folds)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(evaluate, pipelines))
    else:
        results = [evaluate(p) for p in pipelines]

    report = EvalReport(tuple(results))
    (out / "eval_report.txt").write_text(report.to_text())
    (out / "eval_report.csv").write_text(report.to_csv())
    (out / "eval_report.json").write_text(json.dumps(report.to_json_obj(), indent=2))
    for result in results:
        if result.selection_traces:
            name = f"selection_trace_{result.model}_{result.binning}.csv"
            (out / name).write_text(selection_trace_csv(result.selection_traces))

    artifacts = export_artifacts(config, dataset, results, out / "artifacts")

    manifest = {
        "tool": "promine",
        "version": __version__,
        "config": config.to_dict(),
        "config_hash": config_hash(config),
        "seed": config.seed,
        "n_rows": dataset.n_rows,
        "target_threshold": target.threshold,
        "reports": sorted(p.name for p in out.iterdir() if p.is_file()),
        "artifacts": artifacts,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return out


def export_artifacts(
    config: ExperimentConfig,
    dataset: Dataset,
    results: list[CvResult],
    artifact_dir: Path,
) -> dict:
    """Train final models on the full cohort and freeze them for the service."""
    artifact_dir.mkdir(parents=True, exist_ok=True)
    deltas = np.asarray(dataset.meta["final_delta_ors"], dtype=float)
    target, labels = binarize_target(deltas)
    raw = Dataset(dataset.columns, labels, dataset.target_name)
    cv_metrics = {(r.model, r.binning): r for r in results}

    inventory = []
    pipeline_files = {}
    for binning in config.binnings:
        selector = make_selector(config.selector, binning=binning, **config.selector_params)
        pipeline = fit_pipeline(raw, labels, binning, target.threshold)
        pipeline_file = f"pipeline_{binning}.json"
        (artifact_dir / pipeline_file).write_text(pipeline.to_json())
        pipeline_files[binning] = pipeline_file
        transformed = pipeline.apply(raw)
        selection = selector.run(raw if selector.needs_raw else transformed, config.seed)
        selected = [f for f in selection.selected if f in transformed.feature_names]
        if not selected:
            selected = list(transformed.feature_names)
        for model_name in config.models:
            spec = ClassifierSpec(model_name, seed=config.seed)
            model = make_classifier(spec).fit(transformed.select(selected))
            doc = model_to_doc(model)
            doc["selected_features"] = list(selected)
            doc["binning"] = binning
            model_file = f"model_{model_name}_{binning}.json"
            (artifact_dir / model_file).write_text(json.dumps(doc, sort_keys=True))
            cv = cv_metrics.get((model_name, binning))
            inventory.append(
                {
                    "name": f"{model_name}_{binning}",
                    "algorithm": model_name,
                    "binning": binning,
                    "file": model_file,
                    "pipeline_file": pipeline_file,
                    "cv_auc": cv.auc if cv else None,
                    "cv_accuracy": cv.accuracy if cv else None,
                    "cv_h": cv.h if cv else None,
                }
            )
    manifest = {
        "format": "promine.artifacts/1",
        "target_threshold": target.threshold,
        "pipelines": pipeline_files,
        "models": inventory,
    }
    (artifact_dir / "models_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return {"dir": artifact_dir.name, "models": [m["name"] for m in inventory]}


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = ExperimentConfig.from_dict({**config.to_dict(), "seed": args.seed})
    if args.threads is not None:
        config = ExperimentConfig.from_dict({**config.to_dict(), "threads": args.threads})
    if args.dry_run:
        print(f"config ok: {config_hash(config)}")
        return 0
    out = run_experiment(config, args.out)
    print(f"reports written to {out}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    if args.config:
        with open(args.config) as fh:
            spec = spec_from_dict(yaml.safe_load(fh) or {})
    else:
        spec = default_cohort_spec()
    overrides = {}
    if args.n is not None:
        overrides["n"] = args.n
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        spec = spec_from_dict({**spec_to_dict(spec), **overrides})
    rows = generate_synthetic(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_cohort_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def _cmd_describe(args: argparse.Namespace) -> int:
    rows = read_cohort_csv(args.cohort)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "descriptives.txt").write_text(descriptives_report(rows))
    (out / "descriptives.csv").write_text(descriptives_csv(rows))
    tables = crosstab(rows)
    (out / "crosstab.txt").write_text(crosstab_report(tables))
    (out / "crosstab.csv").write_text(crosstab_csv(tables))
    (out / "reliable_change_test.txt").write_text(reliable_change_test_report(rows))
    print((out / "reliable_change_test.txt").read_text())
    return 0


def _cmd_survey(args: argparse.Namespace) -> int:
    responses = read_survey_csv(args.survey)
    text = survey_analysis(responses, reverse_key=not args.no_reverse_key)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "survey_correlations.txt").write_text(text)
    print(text)
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    print(f"config ok: {config_hash(config)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="promine",
        description="Session-based PRO mining: cohorts, outcome statistics, "
        "model evaluation, and prediction artifacts.",
    )
    parser.add_argument("--verbose", action="store_true", help="enable info logging")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run an experiment config end to end")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int, default=None, help="override config seed")
    p_run.add_argument("--threads", type=int, default=None, help="override config threads")
    p_run.add_argument("--dry-run", action="store_true", help="validate config and exit")
    p_run.set_defaults(func=_cmd_run)

    p_synth = sub.add_parser("synth", help="generate a synthetic cohort CSV")
    p_synth.add_argument("--config", default=None, help="synthetic spec YAML (defaults used if omitted)")
    p_synth.add_argument("--n", type=int, default=None)
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=_cmd_synth)

    p_desc = sub.add_parser("describe", help="outcome tables for a cohort CSV")
    p_desc.add_argument("--cohort", required=True)
    p_desc.add_argument("--out", required=True)
    p_desc.set_defaults(func=_cmd_describe)

    p_survey = sub.add_parser("survey", help="clinician survey correlation tables")
    p_survey.add_argument("--survey", required=True)
    p_survey.add_argument("--out", default=None)
    p_survey.add_argument("--no-reverse-key", action="store_true")
    p_survey.set_defaults(func=_cmd_survey)

    p_val = sub.add_parser("validate", help="check an experiment config")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=_cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # surface a diagnostic, not a traceback
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            raise
        logger.exception("run failed")
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
