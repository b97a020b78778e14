"""scikit-learn style estimator wrapper around the vote-ratio forest.

The estimator contract (fit/predict/predict_proba, get_params/set_params)
lets the classifier drop into pipelines and model-selection utilities while
the training and prediction code stays the from-scratch implementation in
``intentd.forest``.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .features import LabeledInstance
from .forest import ForestHyperparams, ForestModel, predict_proba, train
from .validation import check_feature_matrix, check_labels


class ForestIntentClassifier(BaseEstimator, ClassifierMixin):
    """Random-forest goal classifier with vote-ratio probabilities.

    Feature columns are the flattened per-goal (nu, d, theta) triples; the
    number of goals is inferred from the feature width. Probabilities are
    tree vote fractions, so each is an exact multiple of 1/n_trees.
    """

    def __init__(
        self,
        n_trees: int = 50,
        max_depth: int = 16,
        min_samples_split: int = 2,
        min_samples_leaf: int = 1,
        features_per_split: Optional[int] = None,
        seed: int = 0,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.features_per_split = features_per_split
        self.seed = seed

    def _hyperparams(self) -> ForestHyperparams:
        return ForestHyperparams(
            n_trees=self.n_trees,
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            min_samples_leaf=self.min_samples_leaf,
            features_per_split=self.features_per_split,
            seed=self.seed,
        )

    def fit(self, X, y) -> "ForestIntentClassifier":
        X = check_feature_matrix(X)
        n_goals = X.shape[1] // 3
        y = check_labels(y, X.shape[0], n_goals)
        data = [LabeledInstance(tuple(row), int(label)) for row, label in zip(X, y)]
        self.model_ = train(data, self._hyperparams())
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.arange(n_goals)
        return self

    def _check_fitted(self) -> ForestModel:
        model = getattr(self, "model_", None)
        if model is None:
            raise NotFittedError("this ForestIntentClassifier instance is not fitted yet")
        return model

    def predict_proba(self, X) -> np.ndarray:
        model = self._check_fitted()
        X = check_feature_matrix(X)
        if X.shape[1] != model.n_features:
            raise ValueError(f"X has {X.shape[1]} features, model expects {model.n_features}")
        return np.array([predict_proba(model, row).probabilities for row in X])

    def predict(self, X) -> np.ndarray:
        model = self._check_fitted()
        X = check_feature_matrix(X)
        if X.shape[1] != model.n_features:
            raise ValueError(f"X has {X.shape[1]} features, model expects {model.n_features}")
        return np.array([predict_proba(model, row).predicted for row in X], dtype=np.int64)
