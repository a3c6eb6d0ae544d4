"""Per-node forecasters with their losses.

Classification nodes use the Krichevsky-Trofimov (add-1/2) estimator scored
with the logarithmic loss; regression nodes use the running mean scored with
the quadratic loss.  Both are wrapped in a small task object so that the tree
code never branches on the task kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG2 = math.log(2.0)


@dataclass(slots=True)
class NodeStats:
    """Sufficient statistics of the labels that reached a node.

    ``counts`` is set for classification (one count per class) and ``None``
    for regression, where ``label_sum`` is used instead.  ``count`` is the
    total number of labels in both cases.
    """

    counts: np.ndarray | None = None
    label_sum: float = 0.0
    count: int = 0

    def copy(self) -> NodeStats:
        counts = None if self.counts is None else self.counts.copy()
        return NodeStats(counts, self.label_sum, self.count)


def kt_predict(counts: np.ndarray, n_classes: int | None = None) -> np.ndarray:
    """Krichevsky-Trofimov forecast ``(n(y) + 1/2) / (n + K/2)``.

    An empty node gives the uniform distribution, which the formula yields
    without a special case.
    """
    counts = np.asarray(counts, dtype=float)
    if n_classes is None:
        n_classes = counts.shape[0]
    if n_classes < 2:
        raise ValueError(f"n_classes must be >= 2, got {n_classes}")
    if counts.shape != (n_classes,):
        raise ValueError(f"counts must have shape ({n_classes},), got {counts.shape}")
    return (counts + 0.5) / (counts.sum() + 0.5 * n_classes)


def mean_predict(stats: NodeStats) -> float:
    # empty node predicts 0, even when 0 lies outside the label range
    if stats.count == 0:
        return 0.0
    return stats.label_sum / stats.count


def log_loss(pred: np.ndarray, y: int) -> float:
    p = float(pred[y])
    if not p > 0.0:
        raise ValueError(f"log-loss undefined: zero probability on label {y}")
    return -math.log(p)


def square_loss(pred: float, y: float) -> float:
    return (pred - y) ** 2


def update_stats(stats: NodeStats, y, n_classes: int | None = None) -> NodeStats:
    """Add one label to ``stats`` in place and return it."""
    if stats.counts is not None:
        k = stats.counts.shape[0] if n_classes is None else n_classes
        if not 0 <= y < k:
            raise ValueError(f"class index {y} outside [0, {k})")
        stats.counts[y] += 1
    else:
        stats.label_sum += y
    stats.count += 1
    return stats


class ClassificationTask:
    """KT forecaster with log-loss over ``n_classes`` labels ``0..K-1``."""

    kind = "classification"
    default_eta = 1.0

    def __init__(self, n_classes: int):
        n_classes = int(n_classes)
        if n_classes < 2:
            raise ValueError(f"n_classes must be >= 2, got {n_classes}")
        self.n_classes = n_classes
        self._uniform = np.full(n_classes, 1.0 / n_classes)

    def __repr__(self):
        return f"ClassificationTask(n_classes={self.n_classes})"

    def empty_stats(self) -> NodeStats:
        return NodeStats(counts=np.zeros(self.n_classes, dtype=np.int64))

    def prior(self) -> np.ndarray:
        return self._uniform.copy()

    def predict(self, stats: NodeStats) -> np.ndarray:
        return (stats.counts + 0.5) / (stats.count + 0.5 * self.n_classes)

    def loss(self, pred: np.ndarray, y: int) -> float:
        return log_loss(pred, y)

    def update(self, stats: NodeStats, y: int) -> NodeStats:
        return update_stats(stats, y, self.n_classes)

    def check_label(self, y) -> int:
        if isinstance(y, (float, np.floating)) and not float(y).is_integer():
            raise ValueError(f"classification label must be an integer, got {y!r}")
        label = int(y)
        if not 0 <= label < self.n_classes:
            raise ValueError(f"label {label} outside [0, {self.n_classes})")
        return label

    def is_pure(self, stats: NodeStats, y: int) -> bool:
        """True when every label seen in the node equals ``y``."""
        return stats.count > 0 and stats.counts[y] == stats.count


class RegressionTask:
    """Running-mean forecaster with quadratic loss on labels in ``[-B, B]``."""

    kind = "regression"

    def __init__(self, range_bound: float = 1.0):
        range_bound = float(range_bound)
        if not range_bound > 0:
            raise ValueError(f"range_bound must be > 0, got {range_bound}")
        self.range_bound = range_bound

    def __repr__(self):
        return f"RegressionTask(range_bound={self.range_bound})"

    @property
    def default_eta(self) -> float:
        # exp-concavity constant of the square loss on [-B, B]
        return 1.0 / (8.0 * self.range_bound**2)

    def empty_stats(self) -> NodeStats:
        return NodeStats()

    def prior(self) -> float:
        return 0.0

    def predict(self, stats: NodeStats) -> float:
        return mean_predict(stats)

    def loss(self, pred: float, y: float) -> float:
        return square_loss(pred, y)

    def update(self, stats: NodeStats, y: float) -> NodeStats:
        return update_stats(stats, y)

    def check_label(self, y) -> float:
        label = float(y)
        if not -self.range_bound <= label <= self.range_bound:
            raise ValueError(
                f"label {label} outside [-{self.range_bound}, {self.range_bound}]"
            )
        return label

    def is_pure(self, stats: NodeStats, y: float) -> bool:
        return False


Task = ClassificationTask | RegressionTask


def best_constant_log_loss(labels, n_classes: int) -> float:
    """Cumulative log-loss of the best fixed distribution, ``n * H(empirical)``."""
    counts = np.bincount(np.asarray(labels, dtype=int), minlength=n_classes)
    n = counts.sum()
    nz = counts[counts > 0]
    return float(-(nz * np.log(nz / n)).sum())


def best_constant_square_loss(labels, range_bound: float) -> float:
    labels = np.asarray(labels, dtype=float)
    if labels.size == 0:
        return 0.0
    b = float(np.clip(labels.mean(), -range_bound, range_bound))
    return float(((labels - b) ** 2).sum())
