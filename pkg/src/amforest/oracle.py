"""Brute-force reference computations over the prunings of a small tree.

Nothing here is used by the estimators.  The functions enumerate every
pruning explicitly and sum their weights in extended precision, so they
serve as an independent check of the recursive aggregation.  A pruning is
represented as a ``frozenset`` of node ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from ._tree import MondrianTree
from .aggregation import VirtualSplit, predict_aggregated, update_weights_upward
from .forecasters import LOG2, ClassificationTask, RegressionTask
from .mondrian import (
    extend_unrestricted,
    make_rng,
    new_unrestricted_tree,
    node_update_restricted,
)

MAX_INTERNAL = 20
PRECISION_DIGITS = 50


class OracleSizeError(ValueError):
    """The tree is too large for exhaustive enumeration."""


def _check_size(tree: MondrianTree, limit: int = MAX_INTERNAL) -> None:
    n_internal = tree.n_internal
    if n_internal > limit:
        raise OracleSizeError(f"tree has {n_internal} internal nodes, oracle limit is {limit}")


def enumerate_prunings(tree: MondrianTree) -> list[frozenset]:
    """All prunings of ``tree``: subtrees containing the root where every kept
    internal node keeps both of its children or none."""
    _check_size(tree)

    def below(node):
        rec = tree[node]
        out = [frozenset((node,))]
        if not rec.is_leaf:
            for left in below(rec.left):
                for right in below(rec.right):
                    out.append(left | right | {node})
        return out

    return below(tree.root)


def is_pruning(tree: MondrianTree, pruning) -> bool:
    if tree.root not in pruning:
        return False
    for node in pruning:
        rec = tree[node]
        if node != tree.root and rec.parent not in pruning:
            return False
        if not rec.is_leaf and ((rec.left in pruning) != (rec.right in pruning)):
            return False
    return True


def pruning_leaves(tree: MondrianTree, pruning) -> list[int]:
    return [
        node for node in pruning if tree[node].is_leaf or tree[node].left not in pruning
    ]


def n_cut_nodes(tree: MondrianTree, pruning) -> int:
    """Number of nodes of the pruning that are internal in ``tree``."""
    return sum(1 for node in pruning if not tree[node].is_leaf)


def prior_mass_restricted(pruning, tree: MondrianTree) -> float:
    """Prior ``2^-k`` where ``k`` counts the pruning's nodes that are internal in ``tree``."""
    if not is_pruning(tree, pruning):
        raise ValueError("not a pruning of this tree")
    return 2.0 ** -n_cut_nodes(tree, pruning)


def leaf_in_pruning(tree: MondrianTree, pruning, x) -> int:
    node = tree.root
    while not tree[node].is_leaf and tree[node].left in pruning:
        node = tree.child_of(node, x)
    return node


def _log_pruning_weight(tree: MondrianTree, pruning) -> float:
    """log of prior times the product of leaf weights; averaged weights are never read."""
    log_w = -n_cut_nodes(tree, pruning) * LOG2
    for node in pruning_leaves(tree, pruning):
        log_w += tree[node].log_weight
    return log_w


def _brute_force_mixture(tree: MondrianTree, x, value):
    prunings = enumerate_prunings(tree)
    with mpmath.workdps(PRECISION_DIGITS):
        weights = [mpmath.exp(mpmath.mpf(_log_pruning_weight(tree, p))) for p in prunings]
        total = mpmath.fsum(weights)
        values = [np.atleast_1d(np.asarray(value(p), dtype=float)) for p in prunings]
        out = []
        for k in range(values[0].shape[0]):
            num = mpmath.fsum(w * mpmath.mpf(float(v[k])) for w, v in zip(weights, values))
            out.append(float(num / total))
    return np.array(out)


def brute_force_aggregate(tree: MondrianTree, x):
    """Weighted average of the pruning forecasts at ``x``, summed term by term.

    The log weights stored in the tree already include the learning rate.
    """
    x = np.asarray(x, dtype=float)
    task = tree.task
    out = _brute_force_mixture(
        tree, x, lambda p: task.predict(tree[leaf_in_pruning(tree, p, x)].stats)
    )
    return out if task.kind == "classification" else float(out[0])


def brute_force_weighted_depth(tree: MondrianTree, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(
        _brute_force_mixture(tree, x, lambda p: tree.depth(leaf_in_pruning(tree, p, x)))[0]
    )


def materialize_virtual(tree: MondrianTree, virtual: VirtualSplit | None) -> MondrianTree:
    """Copy of a restricted tree with the temporary split actually inserted."""
    out = tree.copy()
    if virtual is not None:
        out.insert_internal_above(virtual.host, virtual.split, virtual.birth, virtual.side)
    return out


def materialize_unrestricted(tree: MondrianTree, x, rng) -> MondrianTree:
    """Copy of an unrestricted tree extended with ``x``, using a copy of ``rng``.

    Replays the draws that the prediction-time dry run makes from the same
    generator state.
    """
    out = tree.copy()
    replay = np.random.Generator(type(rng.bit_generator)())
    replay.bit_generator.state = rng.bit_generator.state
    extend_unrestricted(out, x, replay)
    return out


def pruning_cumulative_loss(tree: MondrianTree, pruning, X, y, task=None) -> float:
    """Cumulative loss of the pruning's forecaster replayed over ``(X, y)``.

    Each leaf of the pruning starts from an empty forecaster; every sample is
    predicted by the leaf containing it, then added to that leaf.
    """
    task = tree.task if task is None else task
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = list(y)
    if len(X) != len(y):
        raise ValueError(f"{len(X)} points but {len(y)} labels")
    if len(y) and X.shape[1] != tree.n_features:
        raise ValueError("stream dimension does not match the tree")
    if not is_pruning(tree, pruning):
        raise ValueError("not a pruning of this tree")
    stats = {}
    total = 0.0
    for x, label in zip(X, y):
        leaf = tree.leaf_containing(x)
        rec = tree[leaf]
        if np.any(x < rec.low) or np.any(x > rec.high):
            raise ValueError("stream point outside the leaf it reaches: stream/tree mismatch")
        node = leaf_in_pruning(tree, pruning, x)
        s = stats.setdefault(node, task.empty_stats())
        total += task.loss(task.predict(s), label)
        task.update(s, label)
    return total


def pruning_leaf_labels(tree: MondrianTree, pruning, X, y) -> dict:
    """Labels of ``(X, y)`` grouped by the pruning leaf containing each point."""
    groups = {}
    for x, label in zip(np.atleast_2d(np.asarray(X, dtype=float)), y):
        groups.setdefault(leaf_in_pruning(tree, pruning, x), []).append(label)
    return groups


@dataclass
class TreeTrace:
    """A tree grown on a stream, with the per-step loss of its aggregated forecast.

    ``step_losses[t]`` is the loss on ``y[t]`` of the prediction made after
    the tree was extended with ``X[t]`` and before the weights saw ``y[t]``.
    """

    tree: MondrianTree
    X: np.ndarray
    y: list
    eta: float
    step_losses: list = field(default_factory=list)

    @property
    def amf_loss(self) -> float:
        return math.fsum(self.step_losses)


def grow_traced(X, y, task, eta=None, variant="restricted", seed=0) -> TreeTrace:
    """Grow one tree on ``(X, y)`` and record the aggregated loss at each step."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    eta = task.default_eta if eta is None else eta
    rng = make_rng(seed, 0, 0)
    if variant == "restricted":
        tree = MondrianTree(X.shape[1], task)
    elif variant == "unrestricted":
        tree = new_unrestricted_tree(X.shape[1], task)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    trace = TreeTrace(tree, X, list(y), eta)
    for x, label in zip(X, y):
        if variant == "restricted":
            leaf = node_update_restricted(tree, x, rng)
        else:
            leaf = extend_unrestricted(tree, x, rng)
        trace.step_losses.append(task.loss(predict_aggregated(tree, x), label))
        update_weights_upward(tree, leaf, label, eta)
    return trace


def random_small_trace(rng, task=None, max_points: int = 9, max_n: int = 30, variant="restricted"):
    """Tree grown on a short random stream drawn from at most ``max_points`` distinct points.

    With the restricted variant each distinct point owns one leaf, so the
    tree has at most ``max_points - 1`` internal nodes.
    """
    d = int(rng.integers(1, 4))
    if task is None:
        if rng.random() < 0.5:
            task = ClassificationTask(int(rng.integers(2, 4)))
        else:
            task = RegressionTask(1.0)
    pool = rng.random((int(rng.integers(1, max_points + 1)), d))
    n = int(rng.integers(1, max_n + 1))
    X = pool[rng.integers(0, len(pool), n)]
    if task.kind == "classification":
        y = rng.integers(0, task.n_classes, n)
    else:
        y = rng.uniform(-task.range_bound, task.range_bound, n)
    return grow_traced(X, y, task, variant=variant, seed=int(rng.integers(2**31)))


def _corrupt(tree: MondrianTree) -> None:
    # shift every averaged weight below the root; the recursion reads the
    # off-path ones while the enumeration never does
    for node in tree.iter_nodes():
        if node != tree.root:
            tree[node].log_weight_tree += 0.3


def oracle_check(reps: int = 200, seed: int = 0, corrupt: bool = False) -> float:
    """Largest gap between the recursive and enumerated aggregations over ``reps`` trees.

    Each tree is queried at stored points and at fresh points, with and
    without the temporary split a prediction would draw; the latter is
    compared with the enumeration on the tree where that split is inserted.
    Both forecasts and weighted depths are compared.
    """
    from .aggregation import weighted_depth
    from .mondrian import sample_virtual_split

    rng = np.random.default_rng(seed)
    worst = 0.0
    for rep in range(reps):
        trace = random_small_trace(rng)
        tree = trace.tree
        if corrupt:
            _corrupt(tree)
        queries = np.vstack([trace.X[:2], rng.random((2, tree.n_features))])
        pred_rng = make_rng(seed, 1, rep)
        for x in queries:
            worst = max(
                worst,
                float(np.max(np.abs(predict_aggregated(tree, x) - brute_force_aggregate(tree, x)))),
                abs(weighted_depth(tree, x) - brute_force_weighted_depth(tree, x)),
            )
            virtual = sample_virtual_split(tree, x, pred_rng)
            if virtual is not None:
                full = materialize_virtual(tree, virtual)
                worst = max(
                    worst,
                    float(
                        np.max(
                            np.abs(
                                predict_aggregated(tree, x, virtual)
                                - brute_force_aggregate(full, x)
                            )
                        )
                    ),
                    abs(weighted_depth(tree, x, virtual) - brute_force_weighted_depth(full, x)),
                )
    return worst
