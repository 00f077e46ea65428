"""Classifier specs, the algorithm registry, and model (de)serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .base import TrainedClassifier
from .bayes import Aode, NaiveBayes
from .forest import RandomForest
from .linear import LinearRegressionClassifier, LogisticRegression
from .meta import EnsembleClassifier, VoteClassifier
from .mlp import Mlp
from .neighbors import KNearestNeighbors
from .tree import C45Tree

MODEL_FORMAT = "promine.model/1"

ALGORITHMS: dict[str, type[TrainedClassifier]] = {
    "naive_bayes": NaiveBayes,
    "aode": Aode,
    "logistic": LogisticRegression,
    "linreg_classifier": LinearRegressionClassifier,
    "knn": KNearestNeighbors,
    "c45_tree": C45Tree,
    "random_forest": RandomForest,
    "mlp": Mlp,
    "ensemble": EnsembleClassifier,
    "vote": VoteClassifier,
}

# Named in the experiment design but deliberately not implemented here.
OUT_OF_SCOPE = ("hnb", "lbr", "bayes_net_k2", "bayes_net_tan")


@dataclass(frozen=True)
class ClassifierSpec:
    """Algorithm plus hyperparameters; serializes losslessly."""

    algorithm: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return {"algorithm": self.algorithm, "params": dict(self.params), "seed": self.seed}

    @staticmethod
    def from_dict(doc: dict) -> "ClassifierSpec":
        return ClassifierSpec(
            algorithm=doc["algorithm"],
            params=dict(doc.get("params", {})),
            seed=int(doc.get("seed", 0)),
        )


def make_classifier(spec: ClassifierSpec) -> TrainedClassifier:
    if spec.algorithm in OUT_OF_SCOPE:
        raise NotImplementedError(
            f"{spec.algorithm!r} is out of scope for this toolkit and not implemented"
        )
    cls = ALGORITHMS.get(spec.algorithm)
    if cls is None:
        raise ValueError(
            f"unknown algorithm {spec.algorithm!r}; valid: {sorted(ALGORITHMS)}"
        )
    params = dict(spec.params)
    if "library" in params:
        params["library"] = tuple(params["library"])
    if "members" in params:
        params["members"] = tuple(params["members"])
    return cls(seed=spec.seed, **params)


def model_to_doc(model: TrainedClassifier) -> dict:
    doc = model.to_doc()
    doc["format"] = MODEL_FORMAT
    return doc


def model_from_doc(doc: dict) -> TrainedClassifier:
    fmt = doc.get("format", MODEL_FORMAT)
    if fmt != MODEL_FORMAT:
        raise ValueError(f"unsupported model document {fmt!r}")
    cls = ALGORITHMS.get(doc["algorithm"])
    if cls is None:
        raise ValueError(f"unknown algorithm in model document: {doc['algorithm']!r}")
    return cls.from_doc(doc)


def model_to_json(model: TrainedClassifier) -> str:
    return json.dumps(model_to_doc(model), sort_keys=True)


def model_from_json(text: str) -> TrainedClassifier:
    return model_from_doc(json.loads(text))
