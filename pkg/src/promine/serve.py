"""Prediction service: loads frozen pipeline + model artifacts and answers
per-client probability queries over HTTP JSON.

The service never trains. Artifacts come from the runner's ``run`` verb and
are read once at startup; handlers share the immutable models, so identical
concurrent requests return identical responses.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, model_validator

from .cohort import NUMERIC_FEATURES
from .dataset import CATEGORICAL, NUMERIC, Column, Dataset
from .learners import TrainedClassifier, model_from_doc
from .outcomes import RELIABLE_CHANGE_THRESHOLD, reliable_change
from .preprocess import FittedPipeline

logger = logging.getLogger(__name__)

MANIFEST_NAME = "models_manifest.json"


class PredictionRequest(BaseModel):
    """Feature values keyed by the cohort variable names, plus optional
    what-if overrides applied before transformation."""

    bl_ors: float = Field(ge=0, le=40)
    bl_srs: float = Field(ge=0, le=40)
    third_delta_ors: float = Field(ge=-40, le=40)
    third_delta_srs: float = Field(ge=-40, le=40)
    gender: str
    diag_cat: str
    age: float = Field(ge=0, le=120)
    payor_grp: str
    county: str
    region_type: str
    q_case_mgmt_bin: int = Field(ge=0, le=1)
    q_medical_bin: int = Field(ge=0, le=1)
    q_therapy_bin: int = Field(ge=0, le=1)
    q_ind_therapy_bin: int = Field(ge=0, le=1)
    q_grp_therapy_bin: int = Field(ge=0, le=1)
    state: str
    is_new: int = Field(ge=0, le=1)
    model: str = "ensemble"
    overrides: Optional[dict] = None

    @model_validator(mode="after")
    def _scale_consistency(self) -> "PredictionRequest":
        if not (0.0 <= self.bl_ors + self.third_delta_ors <= 40.0):
            raise ValueError("bl_ors + third_delta_ors must stay on the 0-40 scale")
        return self

    def feature_dict(self) -> dict:
        fields = self.model_dump(exclude={"model", "overrides"})
        if self.overrides:
            unknown = set(self.overrides) - set(fields)
            if unknown:
                raise ValueError(f"override for unknown field(s): {sorted(unknown)}")
            fields.update(self.overrides)
            # overridden values obey the same scale constraints as the originals
            revalidated = PredictionRequest.model_validate({**fields, "model": self.model})
            fields = revalidated.model_dump(exclude={"model", "overrides"})
        return fields


class ReliableChangeBand(BaseModel):
    mean_delta: float
    improve_above: float
    deteriorate_below: float
    category_at_mean: str


class PredictionResponse(BaseModel):
    model: str
    probability_above_mean_improvement: float
    reliable_change_band: ReliableChangeBand
    model_fingerprint: str
    pipeline_fingerprint: str


@dataclass(frozen=True)
class LoadedModel:
    name: str
    algorithm: str
    binning: str
    model: TrainedClassifier
    selected_features: tuple[str, ...]
    pipeline: FittedPipeline
    model_fingerprint: str
    pipeline_fingerprint: str
    cv_auc: float | None
    cv_accuracy: float | None


def _digest(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()[:16]


class PredictionService:
    """Read-only holder of the frozen artifacts."""

    def __init__(self, artifact_dir: str | Path) -> None:
        self.artifact_dir = Path(artifact_dir)
        manifest_path = self.artifact_dir / MANIFEST_NAME
        if not manifest_path.exists():
            raise FileNotFoundError(f"no {MANIFEST_NAME} under {self.artifact_dir}")
        self.manifest = json.loads(manifest_path.read_text())
        self.target_threshold = float(self.manifest["target_threshold"])
        self.models: dict[str, LoadedModel] = {}
        pipelines: dict[str, tuple[FittedPipeline, str]] = {}
        for binning, filename in self.manifest["pipelines"].items():
            payload = (self.artifact_dir / filename).read_bytes()
            pipelines[binning] = (FittedPipeline.from_json(payload.decode()), _digest(payload))
        for entry in self.manifest["models"]:
            payload = (self.artifact_dir / entry["file"]).read_bytes()
            doc = json.loads(payload)
            pipeline, pipeline_fp = pipelines[entry["binning"]]
            self.models[entry["name"]] = LoadedModel(
                name=entry["name"],
                algorithm=entry["algorithm"],
                binning=entry["binning"],
                model=model_from_doc(doc),
                selected_features=tuple(doc.get("selected_features", [])),
                pipeline=pipeline,
                model_fingerprint=_digest(payload),
                pipeline_fingerprint=pipeline_fp,
                cv_auc=entry.get("cv_auc"),
                cv_accuracy=entry.get("cv_accuracy"),
            )

    def resolve(self, name: str) -> LoadedModel:
        if name in self.models:
            return self.models[name]
        # bare algorithm name: best cross-validated AUC among its variants
        variants = [m for m in self.models.values() if m.algorithm == name]
        if variants:
            return max(variants, key=lambda m: (m.cv_auc if m.cv_auc is not None else -1.0, m.name))
        raise KeyError(name)

    def _row_dataset(self, fields: dict) -> Dataset:
        # Build every known raw column; pipelines pick the ones they need.
        columns = []
        for name, value in fields.items():
            if name in NUMERIC_FEATURES:
                columns.append(Column(name, NUMERIC, np.asarray([float(value)], dtype=float)))
            else:
                columns.append(Column(name, CATEGORICAL, np.asarray([str(value)], dtype=object)))
        return Dataset(tuple(columns), np.zeros(1, dtype=int))

    def predict(self, model_name: str, fields: dict) -> tuple[float, LoadedModel]:
        loaded = self.resolve(model_name)
        self._log_unknown_levels(loaded.pipeline, fields)
        raw = self._row_dataset(fields)
        transformed = loaded.pipeline.apply(raw)
        subset = transformed.select(list(loaded.selected_features) or list(transformed.feature_names))
        probability = float(loaded.model.predict_proba(subset)[0, 1])
        return probability, loaded

    def _log_unknown_levels(self, pipeline: FittedPipeline, fields: dict) -> None:
        for name, levels in pipeline.categorical_levels.items():
            value = str(fields.get(name))
            if value not in levels:
                logger.info("request: unknown level %r for %s, treated as prior-only", value, name)

    def band(self) -> ReliableChangeBand:
        return ReliableChangeBand(
            mean_delta=self.target_threshold,
            improve_above=RELIABLE_CHANGE_THRESHOLD,
            deteriorate_below=-RELIABLE_CHANGE_THRESHOLD,
            category_at_mean=reliable_change(self.target_threshold).value,
        )

    def inventory(self) -> list[dict]:
        return [
            {
                "name": m.name,
                "algorithm": m.algorithm,
                "binning": m.binning,
                "cv_auc": m.cv_auc,
                "cv_accuracy": m.cv_accuracy,
                "model_fingerprint": m.model_fingerprint,
                "pipeline_fingerprint": m.pipeline_fingerprint,
            }
            for m in self.models.values()
        ]


def create_app(artifact_dir: str | Path, cors_origins: list[str] | None = None) -> FastAPI:
    service = PredictionService(artifact_dir)
    app = FastAPI(title="promine prediction service", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = service

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "models": len(service.models)}

    @app.get("/models")
    def models() -> list[dict]:
        return service.inventory()

    @app.post("/predict", response_model=PredictionResponse)
    def predict(request: PredictionRequest) -> PredictionResponse:
        try:
            fields = request.feature_dict()
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        try:
            probability, loaded = service.predict(request.model, fields)
        except KeyError:
            raise HTTPException(
                status_code=404,
                detail=f"unknown model {request.model!r}; loaded: {sorted(service.models)}",
            )
        return PredictionResponse(
            model=loaded.name,
            probability_above_mean_improvement=probability,
            reliable_change_band=service.band(),
            model_fingerprint=loaded.model_fingerprint,
            pipeline_fingerprint=loaded.pipeline_fingerprint,
        )

    return app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="promine-serve", description="what-if prediction service")
    parser.add_argument(
        "--artifacts",
        default=os.environ.get("PROMINE_ARTIFACTS"),
        help="artifact directory written by `promine run` (env PROMINE_ARTIFACTS)",
    )
    parser.add_argument("--host", default=os.environ.get("PROMINE_HOST", "127.0.0.1"))
    parser.add_argument("--port", type=int, default=int(os.environ.get("PROMINE_PORT", "8000")))
    parser.add_argument(
        "--cors-origin",
        action="append",
        default=None,
        help="allowed CORS origin (repeatable; default *)",
    )
    args = parser.parse_args(argv)
    if not args.artifacts:
        parser.error("--artifacts (or PROMINE_ARTIFACTS) is required")
    import uvicorn

    app = create_app(args.artifacts, cors_origins=args.cors_origin)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
