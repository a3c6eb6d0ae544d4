"""Prequential loss curves and regret reports; AUC for held-out scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .forecasters import best_constant_log_loss, best_constant_square_loss, log_loss, square_loss
from .oracle import (
    enumerate_prunings,
    pruning_cumulative_loss,
    pruning_leaf_labels,
)


@dataclass
class LossCurve:
    """Per-step losses of one learner; ``average[t-1]`` is the mean over steps ``1..t``."""

    losses: np.ndarray

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.losses)

    @property
    def average(self) -> np.ndarray:
        return self.cumulative / np.arange(1, len(self.losses) + 1)

    @property
    def final(self) -> float:
        return float(self.average[-1]) if len(self.losses) else math.nan

    def points(self, stride: int = 1):
        """``(t, average loss through t)`` every ``stride`` steps, always ending at ``n``."""
        avg = self.average
        n = len(avg)
        ts = list(range(stride, n + 1, stride))
        if n and (not ts or ts[-1] != n):
            ts.append(n)
        return [(t, float(avg[t - 1])) for t in ts]


def progressive_eval(learners: dict, X, y, kind: str) -> dict[str, LossCurve]:
    """Predict each sample with every learner, record the loss, then update them all.

    ``kind`` is ``"classification"`` (log-loss on ``predict_proba``) or
    ``"regression"`` (square loss on ``predict``).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if kind == "classification":
        method = "predict_proba"
        loss = lambda pred, label: log_loss(pred, int(label))  # noqa: E731
    elif kind == "regression":
        method = "predict"
        loss = lambda pred, label: square_loss(float(pred), float(label))  # noqa: E731
    else:
        raise ValueError(f"kind must be 'classification' or 'regression', got {kind!r}")
    for name, learner in learners.items():
        if not hasattr(learner, method):
            raise TypeError(f"learner {name!r} has no {method} for a {kind} stream")

    losses = {name: np.empty(len(y)) for name in learners}
    for t in range(len(y)):
        x = X[t : t + 1]
        for name, learner in learners.items():
            pred = getattr(learner, method)(x)[0]
            losses[name][t] = loss(pred, y[t])
        for learner in learners.values():
            learner.partial_fit(x, y[t : t + 1])
    return {name: LossCurve(values) for name, values in losses.items()}


def auc(scores, labels) -> float:
    """Area under the ROC curve via the Mann-Whitney statistic, ties counting 1/2."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have the same shape")
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0 or not np.all((labels == 0) | positive):
        raise ValueError("auc needs binary 0/1 labels with both classes present")
    ranks = rankdata(scores)
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass
class RegretReport:
    amf_loss: float
    best_pruning_loss: float
    # |T| log 2 / eta for the pruning reaching the best loss
    bound: float
    # max over prunings of (AMF loss - L(T) - |T| log 2 / eta); <= 0 when the bound holds
    pruning_slack: float
    # same against the best constants on the pruning's leaves, with the forecaster term added
    leaf_constant_slack: float
    n_prunings: int


def _leaf_constant_term(task, n_nodes: int, n: int) -> float:
    n_leaves = (n_nodes + 1) / 2
    if task.kind == "classification":
        return n_leaves * (task.n_classes - 1) / 2.0 * math.log(4 * n)
    return n_leaves * 8.0 * task.range_bound**2 * (1.0 + math.log(n))


def regret_report(trace) -> RegretReport:
    """Compare a traced tree's aggregated loss with every one of its prunings."""
    tree, task = trace.tree, trace.tree.task
    n = len(trace.y)
    amf = trace.amf_loss
    best = math.inf
    best_bound = math.nan
    pruning_slack = leaf_slack = -math.inf
    prunings = enumerate_prunings(tree)
    for pruning in prunings:
        size = len(pruning)
        loss = pruning_cumulative_loss(tree, pruning, trace.X, trace.y)
        penalty = size * math.log(2) / trace.eta
        if loss < best:
            best, best_bound = loss, penalty
        pruning_slack = max(pruning_slack, amf - loss - penalty)
        constants = 0.0
        for labels in pruning_leaf_labels(tree, pruning, trace.X, trace.y).values():
            if task.kind == "classification":
                constants += best_constant_log_loss(labels, task.n_classes)
            else:
                constants += best_constant_square_loss(labels, task.range_bound)
        extra = _leaf_constant_term(task, size, max(n, 1))
        leaf_slack = max(leaf_slack, amf - constants - penalty - extra)
    return RegretReport(amf, best, best_bound, pruning_slack, leaf_slack, len(prunings))
