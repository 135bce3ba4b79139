"""The five classifier families behind a common fit/predict_proba surface.

All families expose probability rows that sum to 1, the
global class list observed at fit time, and deterministic behavior for a
fixed config seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, DegenerateLabelsError
from .tree import DecisionTree

_PROB_FLOOR = 1e-12

FAMILIES = ("DT", "RF", "AB", "LDA", "KNN")


@dataclass(frozen=True)
class LearnerConfig:
    family: str
    n_estimators: int = 100
    min_samples_split: int = 20
    max_depth: int | None = None
    k: int = 9
    seed: int = 0

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise DataError(f"unknown learner family '{self.family}'")
        if self.n_estimators < 1:
            raise DataError("n_estimators must be >= 1")
        if self.min_samples_split < 2:
            raise DataError("min_samples_split must be >= 2")
        if self.k < 1:
            raise DataError("k must be >= 1")


class TrainedModel:
    """Base for fitted classifiers: class bookkeeping and input checks."""

    family: str = "?"

    def __init__(self, config: LearnerConfig, classes: np.ndarray, n_features: int):
        self.config = config
        self.classes_ = np.asarray(classes)
        self.n_features_ = int(n_features)

    @property
    def n_classes(self) -> int:
        return self.classes_.size

    def _check_X(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features_:
            raise DataError(
                f"feature arity {X.shape[1]} does not match training arity "
                f"{self.n_features_}"
            )
        if not np.all(np.isfinite(X)):
            raise DataError("non-finite feature values in prediction input")
        return X

    def predict_proba(self, X: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]

    def encode_labels(self, y) -> np.ndarray:
        y = np.asarray(y)
        codes = np.searchsorted(self.classes_, y)
        bad = (codes >= self.n_classes) | (self.classes_[np.minimum(codes, self.n_classes - 1)] != y)
        if np.any(bad):
            raise DataError(f"labels {np.unique(y[bad])} unseen at fit time")
        return codes


class DTModel(TrainedModel):
    family = "DT"

    def __init__(self, config, classes, n_features, tree: DecisionTree):
        super().__init__(config, classes, n_features)
        self.tree = tree

    def predict_proba(self, X):
        return self.tree.predict_proba(self._check_X(X))

    @property
    def n_internal_nodes(self) -> int:
        return self.tree.n_internal_nodes


class RFModel(TrainedModel):
    family = "RF"

    def __init__(self, config, classes, n_features, trees: list[DecisionTree]):
        super().__init__(config, classes, n_features)
        self.trees = trees

    def predict_proba(self, X):
        X = self._check_X(X)
        acc = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees:
            acc += tree.predict_proba(X)
        return acc / len(self.trees)


class ABModel(TrainedModel):
    """Real-valued multiclass boosting over probability-weighted trees."""

    family = "AB"

    def __init__(self, config, classes, n_features, trees, weight_history=None):
        super().__init__(config, classes, n_features)
        self.trees = trees
        # Per-round normalized sample weights, a training-time artifact kept
        # for inspection; not part of the serialized parameters.
        self.weight_history_: list[np.ndarray] = weight_history or []

    def _log_scores(self, X: np.ndarray) -> np.ndarray:
        K = self.n_classes
        total = np.zeros((X.shape[0], K))
        for tree in self.trees:
            log_p = np.log(np.clip(tree.predict_proba(X), _PROB_FLOOR, None))
            total += (K - 1) * (log_p - log_p.mean(axis=1, keepdims=True))
        return total

    def predict_proba(self, X):
        X = self._check_X(X)
        K = self.n_classes
        logits = self._log_scores(X) / (len(self.trees) * (K - 1))
        logits -= logits.max(axis=1, keepdims=True)
        expd = np.exp(logits)
        return expd / expd.sum(axis=1, keepdims=True)


class LDAModel(TrainedModel):
    """Shared-covariance Gaussian discriminant with softmax scores."""

    family = "LDA"

    def __init__(self, config, classes, n_features, coef, intercept):
        super().__init__(config, classes, n_features)
        self.coef = np.asarray(coef)
        self.intercept = np.asarray(intercept)

    def predict_proba(self, X):
        X = self._check_X(X)
        scores = X @ self.coef.T + self.intercept
        scores -= scores.max(axis=1, keepdims=True)
        expd = np.exp(scores)
        return expd / expd.sum(axis=1, keepdims=True)


class KNNModel(TrainedModel):
    family = "KNN"

    def __init__(self, config, classes, n_features, X_std, y_codes, mu, sigma):
        super().__init__(config, classes, n_features)
        self.X_std = np.asarray(X_std)
        self.y_codes = np.asarray(y_codes, dtype=np.int64)
        self.mu = np.asarray(mu)
        self.sigma = np.asarray(sigma)

    def predict_proba(self, X):
        X = self._check_X(X)
        q = (X - self.mu) / self.sigma
        k = min(self.config.k, self.X_std.shape[0])
        # Squared distances via the expansion; stable sort keeps equal
        # distances in training-index order.
        d2 = (
            np.sum(q**2, axis=1)[:, None]
            + np.sum(self.X_std**2, axis=1)[None, :]
            - 2.0 * q @ self.X_std.T
        )
        order = np.argsort(d2, axis=1, kind="stable")[:, :k]
        out = np.empty((X.shape[0], self.n_classes))
        for i, nn in enumerate(order):
            out[i] = np.bincount(self.y_codes[nn], minlength=self.n_classes) / k
        return out


def _check_training_inputs(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2:
        raise DataError("X must be a 2-D feature matrix")
    if X.shape[0] != y.shape[0]:
        raise DataError(f"{X.shape[0]} rows vs {y.shape[0]} labels")
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite feature values in training input")
    classes = np.unique(y)
    if classes.size < 2:
        raise DegenerateLabelsError(f"training labels collapse to {classes!r}")
    return X, y, classes


def fit(config: LearnerConfig, X, y, sample_weight=None) -> TrainedModel:
    """Train one classifier family on a feature matrix."""
    config.validate()
    X, y, classes = _check_training_inputs(X, y)
    codes = np.searchsorted(classes, y)
    K = classes.size
    n, d = X.shape

    if config.family == "DT":
        tree = DecisionTree(K, config.min_samples_split, config.max_depth)
        tree.fit(X, codes, sample_weight=sample_weight)
        return DTModel(config, classes, d, tree)

    if config.family == "RF":
        rng = np.random.default_rng(config.seed)
        max_features = max(1, int(np.sqrt(d)))
        trees = []
        for _ in range(config.n_estimators):
            boot = rng.integers(0, n, size=n)
            tree = DecisionTree(K, config.min_samples_split, config.max_depth, max_features)
            tree.fit(X[boot], codes[boot], rng=rng)
            trees.append(tree)
        return RFModel(config, classes, d, trees)

    if config.family == "AB":
        w = (
            np.full(n, 1.0 / n)
            if sample_weight is None
            else np.asarray(sample_weight, dtype=np.float64) / np.sum(sample_weight)
        )
        coding = np.full((n, K), -1.0 / (K - 1))
        coding[np.arange(n), codes] = 1.0
        trees = []
        history = []
        for _ in range(config.n_estimators):
            tree = DecisionTree(K, config.min_samples_split, config.max_depth)
            tree.fit(X, codes, sample_weight=w)
            trees.append(tree)
            log_p = np.log(np.clip(tree.predict_proba(X), _PROB_FLOOR, None))
            w = w * np.exp(-((K - 1.0) / K) * np.sum(coding * log_p, axis=1))
            total = w.sum()
            if not np.isfinite(total) or total <= 0.0:
                history.append(history[-1].copy() if history else np.full(n, 1.0 / n))
                break
            w = w / total
            history.append(w.copy())
        return ABModel(config, classes, d, trees, history)

    if config.family == "LDA":
        means = np.vstack([X[codes == k].mean(axis=0) for k in range(K)])
        priors = np.bincount(codes, minlength=K) / n
        cov = np.zeros((d, d))
        for k in range(K):
            delta = X[codes == k] - means[k]
            cov += delta.T @ delta
        cov /= max(n - K, 1)
        scale = np.trace(cov) / d
        cov += 1e-6 * (scale if scale > 0 else 1.0) * np.eye(d)
        coef = np.linalg.solve(cov, means.T).T
        intercept = -0.5 * np.sum(means * coef, axis=1) + np.log(priors)
        return LDAModel(config, classes, d, coef, intercept)

    if config.family == "KNN":
        mu = X.mean(axis=0)
        sigma = X.std(axis=0)
        sigma = np.where(sigma > 0.0, sigma, 1.0)
        return KNNModel(config, classes, d, (X - mu) / sigma, codes, mu, sigma)

    raise DataError(f"unknown learner family '{config.family}'")  # pragma: no cover


def predict_proba(model: TrainedModel, X) -> np.ndarray:
    return model.predict_proba(X)


def training_cross_entropy(model: TrainedModel, X, y) -> np.ndarray:
    """Per-sample cross entropy of the model's probabilities against y."""
    codes = model.encode_labels(y)
    proba = model.predict_proba(X)
    picked = proba[np.arange(proba.shape[0]), codes]
    return -np.log(np.clip(picked, _PROB_FLOOR, None))
