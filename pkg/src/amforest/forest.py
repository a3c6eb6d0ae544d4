"""Aggregated Mondrian Forest estimators and the online dummy baselines."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin

from ._tree import MondrianTree
from ._validation import (
    check_features,
    check_labels,
    check_positive_float,
    check_positive_int,
    resolve_seed,
)
from .aggregation import predict_aggregated, update_weights_upward, weighted_depth
from .forecasters import ClassificationTask, RegressionTask
from .mondrian import (
    PREDICT_STREAM,
    TRAIN_STREAM,
    extend_unrestricted,
    make_rng,
    new_unrestricted_tree,
    node_update_restricted,
    sample_virtual_split,
    sample_virtual_split_unrestricted,
)

VARIANTS = ("restricted", "unrestricted")


class _BaseAMF(BaseEstimator):
    """Shared online machinery; subclasses provide the task."""

    def _make_task(self):
        raise NotImplementedError

    def _check_params(self):
        check_positive_int(self.n_trees, "n_trees")
        if self.eta is not None:
            check_positive_float(self.eta, "eta")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")

    def _init_state(self, n_features: int):
        self._check_params()
        self.task_ = self._make_task()
        self.eta_ = self.task_.default_eta if self.eta is None else float(self.eta)
        self.seed_ = resolve_seed(self.random_state)
        self.n_features_in_ = n_features
        if self.variant == "restricted":
            self.trees_ = [MondrianTree(n_features, self.task_) for _ in range(self.n_trees)]
        else:
            self.trees_ = [
                new_unrestricted_tree(n_features, self.task_) for _ in range(self.n_trees)
            ]
        self.rngs_ = [make_rng(self.seed_, TRAIN_STREAM, m) for m in range(self.n_trees)]
        self.pred_rngs_ = [make_rng(self.seed_, PREDICT_STREAM, m) for m in range(self.n_trees)]
        self.n_samples_seen_ = 0

    def _is_initialized(self) -> bool:
        return hasattr(self, "trees_")

    def partial_fit(self, X, y):
        """Update every tree with the samples of ``(X, y)``, in order, once each."""
        X = check_features(X, self.n_features_in_ if self._is_initialized() else None)
        y = check_labels(y, X.shape[0])
        if not self._is_initialized():
            self._init_state(X.shape[1])
        task = self.task_
        labels = [task.check_label(label) for label in y]
        restricted = self.variant == "restricted"
        for x, label in zip(X, labels):
            for tree, rng in zip(self.trees_, self.rngs_):
                if restricted:
                    leaf = node_update_restricted(tree, x, rng, label, self.split_pure)
                else:
                    leaf = extend_unrestricted(tree, x, rng)
                update_weights_upward(tree, leaf, label, self.eta_)
            self.n_samples_seen_ += 1
        return self

    def fit(self, X, y):
        """Fresh forest trained in a single pass over ``(X, y)``."""
        X = check_features(X)
        self._init_state(X.shape[1])
        return self.partial_fit(X, y)

    def _tree_predict(self, m: int, x):
        tree = self.trees_[m]
        if self.variant == "restricted":
            virtual = sample_virtual_split(tree, x, self.pred_rngs_[m])
        else:
            virtual = sample_virtual_split_unrestricted(tree, x, self.pred_rngs_[m])
        return predict_aggregated(tree, x, virtual)

    def _predict_all(self, X) -> np.ndarray:
        if not self._is_initialized():
            X = check_features(X)
            self._init_state(X.shape[1])
        X = check_features(X, self.n_features_in_)
        out = []
        for x in X:
            per_tree = [self._tree_predict(m, x) for m in range(self.n_trees)]
            out.append(np.mean(per_tree, axis=0))
        return np.asarray(out)

    def tree_predictions(self, x) -> list:
        """Per-tree aggregated predictions at a single point."""
        x = check_features(np.atleast_2d(x), self.n_features_in_)[0]
        return [self._tree_predict(m, x) for m in range(self.n_trees)]

    def weighted_depths(self, X):
        """Per-tree weighted depths, shape ``(n_samples, n_trees)``, and their mean.

        Computed on the stored trees only: no temporary split is drawn.
        """
        if not self._is_initialized():
            X = check_features(X)
            self._init_state(X.shape[1])
        X = check_features(X, self.n_features_in_)
        depths = np.array([[weighted_depth(tree, x) for tree in self.trees_] for x in X])
        return depths, depths.mean(axis=1)


class AMFClassifier(ClassifierMixin, _BaseAMF):
    """Online Aggregated Mondrian Forest classifier.

    Labels are integers in ``0..n_classes-1``.  Every tree aggregates, with
    exponential weights, the Krichevsky-Trofimov forecasts of all its
    prunings; the forest averages the trees.

    Parameters
    ----------
    n_classes : int
        Number of classes, fixed at construction.
    n_trees : int, default=10
    eta : float, optional
        Learning rate; 1 when omitted.
    variant : {"restricted", "unrestricted"}, default="restricted"
        ``"unrestricted"`` splits whole cells of ``[0, 1]^d`` and needs
        features in that box.
    split_pure : bool, default=True
        When False, a leaf whose labels all match the incoming one absorbs
        the sample instead of splitting.
    random_state : int or None
    """

    def __init__(
        self,
        n_classes: int = 2,
        n_trees: int = 10,
        eta: float | None = None,
        variant: str = "restricted",
        split_pure: bool = True,
        random_state: int | None = None,
    ):
        self.n_classes = n_classes
        self.n_trees = n_trees
        self.eta = eta
        self.variant = variant
        self.split_pure = split_pure
        self.random_state = random_state

    def _make_task(self):
        return ClassificationTask(self.n_classes)

    @property
    def classes_(self) -> np.ndarray:
        return np.arange(self.n_classes)

    def predict_proba(self, X) -> np.ndarray:
        return self._predict_all(X)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


class AMFRegressor(RegressorMixin, _BaseAMF):
    """Online Aggregated Mondrian Forest regressor with labels in ``[-B, B]``.

    Nodes predict the running mean of their labels (0 when empty) and are
    weighted with the square loss; ``eta`` defaults to ``1 / (8 B^2)``.
    """

    def __init__(
        self,
        range_bound: float = 1.0,
        n_trees: int = 10,
        eta: float | None = None,
        variant: str = "restricted",
        split_pure: bool = True,
        random_state: int | None = None,
    ):
        self.range_bound = range_bound
        self.n_trees = n_trees
        self.eta = eta
        self.variant = variant
        self.split_pure = split_pure
        self.random_state = random_state

    def _make_task(self):
        return RegressionTask(self.range_bound)

    def predict(self, X) -> np.ndarray:
        return self._predict_all(X)


class OnlineDummyClassifier(ClassifierMixin, BaseEstimator):
    """KT forecaster on the label marginal, ignoring the features."""

    def __init__(self, n_classes: int = 2):
        self.n_classes = n_classes

    def _ensure_state(self):
        if not hasattr(self, "counts_"):
            self.task_ = ClassificationTask(self.n_classes)
            self.counts_ = np.zeros(self.n_classes, dtype=np.int64)

    def partial_fit(self, X, y):
        X = check_features(X)
        y = check_labels(y, X.shape[0])
        self._ensure_state()
        for label in y:
            self.counts_[self.task_.check_label(label)] += 1
        return self

    def fit(self, X, y):
        for attr in ("counts_", "task_"):
            self.__dict__.pop(attr, None)
        return self.partial_fit(X, y)

    def predict_proba(self, X) -> np.ndarray:
        X = check_features(X)
        self._ensure_state()
        p = (self.counts_ + 0.5) / (self.counts_.sum() + 0.5 * self.n_classes)
        return np.tile(p, (X.shape[0], 1))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


class OnlineDummyRegressor(RegressorMixin, BaseEstimator):
    """Running mean of the labels seen so far (0 before any label)."""

    def __init__(self, range_bound: float = 1.0):
        self.range_bound = range_bound

    def partial_fit(self, X, y):
        X = check_features(X)
        y = check_labels(y, X.shape[0])
        if not hasattr(self, "task_"):
            self.task_ = RegressionTask(self.range_bound)
            self.sum_, self.count_ = 0.0, 0
        for label in y:
            self.sum_ += self.task_.check_label(label)
            self.count_ += 1
        return self

    def fit(self, X, y):
        self.__dict__.pop("task_", None)
        return self.partial_fit(X, y)

    def predict(self, X) -> np.ndarray:
        X = check_features(X)
        mean = self.sum_ / self.count_ if getattr(self, "count_", 0) else 0.0
        return np.full(X.shape[0], mean)
