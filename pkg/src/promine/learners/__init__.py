"""Probabilistic classifier zoo under one prediction contract.

Documented hyperparameter defaults:

* naive_bayes       alpha=1 Laplace counts; Gaussian likelihoods for numerics
* aode              alpha=1; numerics discretized on the fly against labels
* logistic          L2 ridge 1e-8, Newton/IRLS, max 100 iterations
* linreg_classifier least squares on 0/1, probability clipped to [0, 1]
* knn               k=3, z-scored numeric distance, fractional boundary votes
* c45_tree          gain-ratio splits, pessimistic pruning (confidence 0.25),
                    min 2 instances per admissible branch, unbounded depth
* random_forest     30 trees, ceil(log2(M)+1) features per split, bootstrap
* mlp               one hidden layer ceil((features+classes)/2), learning
                    rate 0.3, momentum 0.2, 500 epochs, weight decay on
* ensemble          library = the five-member committee, 5 inner folds,
                    max 10 selection steps, replacement allowed
* vote              the same five-member committee, max-probability rule
"""

from .base import LearnerError, MatrixEncoder, TrainedClassifier
from .bayes import Aode, NaiveBayes
from .forest import RandomForest
from .linear import LinearRegressionClassifier, LogisticRegression
from .meta import DEFAULT_COMMITTEE, EnsembleClassifier, VoteClassifier, ensemble_select, vote_predict
from .mlp import Mlp, mlp_loss_and_grad
from .neighbors import KNearestNeighbors
from .registry import (
    ALGORITHMS,
    OUT_OF_SCOPE,
    ClassifierSpec,
    make_classifier,
    model_from_doc,
    model_from_json,
    model_to_doc,
    model_to_json,
)
from .tree import C45Tree

__all__ = [
    "ALGORITHMS",
    "Aode",
    "C45Tree",
    "ClassifierSpec",
    "DEFAULT_COMMITTEE",
    "EnsembleClassifier",
    "KNearestNeighbors",
    "LearnerError",
    "LinearRegressionClassifier",
    "LogisticRegression",
    "MatrixEncoder",
    "Mlp",
    "NaiveBayes",
    "OUT_OF_SCOPE",
    "RandomForest",
    "TrainedClassifier",
    "VoteClassifier",
    "ensemble_select",
    "make_classifier",
    "mlp_loss_and_grad",
    "model_from_doc",
    "model_from_json",
    "model_to_doc",
    "model_to_json",
    "vote_predict",
]
