"""Exponentially weighted aggregation over all prunings of a tree.

Every node ``b`` stores ``log w_b = -eta * L_b`` (the cumulative loss of its
own forecaster) and ``log w_bar_b``, the log of

    w_bar_b = w_b                              if b is a leaf
    w_bar_b = w_b / 2 + w_bar_b0 * w_bar_b1 / 2  otherwise,

which sums ``2^-(#internal nodes) * prod(leaf weights)`` over every pruning
rooted at ``b``.  The aggregated prediction at ``x`` is then obtained with a
single upward pass along the path of ``x``.  All weights stay in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .forecasters import LOG2


def logaddexp(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    if b == -math.inf:
        return a
    return a + math.log1p(math.exp(b - a))


@dataclass(frozen=True)
class VirtualSplit:
    """Temporary split drawn for a query point, never written to the tree.

    The topmost virtual node takes the place of ``host`` and carries a copy
    of its weight and forecaster; each virtual internal node along the
    chain does the same.  ``sibling_log_weight_tree`` lists, from the bottom
    of the chain to its top, the ``log w_bar`` of the off-path child of every
    virtual internal node.  The query point ends in a fresh empty leaf
    (``w = w_bar = 1``) at the bottom of the chain.
    """

    host: int
    birth: float
    split: tuple
    side: int
    sibling_log_weight_tree: tuple = ()

    @property
    def n_levels(self) -> int:
        return len(self.sibling_log_weight_tree)


def update_weights_upward(tree, leaf: int, y, eta: float) -> None:
    """Charge the loss on ``y`` to every node from ``leaf`` up to the root.

    Each node's weight is updated with the loss of its forecaster *before*
    seeing ``y``, then its averaged weight is recomputed and only then its
    statistics absorb ``y``.  Nodes off the path are left untouched.
    """
    if not eta > 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    nodes = tree.nodes
    task = tree.task
    node = leaf
    while node is not None:
        rec = nodes[node]
        rec.log_weight -= eta * task.loss(task.predict(rec.stats), y)
        if rec.left is None:
            rec.log_weight_tree = rec.log_weight
        else:
            rec.log_weight_tree = logaddexp(
                rec.log_weight - LOG2,
                nodes[rec.left].log_weight_tree + nodes[rec.right].log_weight_tree - LOG2,
            )
        task.update(rec.stats, y)
        node = rec.parent


def _path_to_host(tree, x, host: int) -> list[int]:
    node = tree.root
    path = [node]
    while node != host:
        if tree[node].is_leaf:
            raise ValueError(f"node {host} is not on the path of x")
        node = tree.child_of(node, x)
        path.append(node)
    return path


def _aggregate(tree, x, virtual, node_value, fresh_leaf_value):
    """Upward mixing shared by prediction and weighted depth.

    ``node_value(record, depth)`` gives the quantity averaged at a node and
    ``fresh_leaf_value(depth)`` the one of the virtual empty leaf.  The
    averaged weights of path nodes are recomputed from the stored node
    weights and the stored averaged weights of off-path children, so the
    result is exact even right after a structural change.
    """
    nodes = tree.nodes
    if virtual is None:
        path = tree.path(x)
        leaf = path[-1]
        depth = len(path) - 1
        value = node_value(nodes[leaf], depth)
        log_wbar = nodes[leaf].log_weight
    else:
        path = _path_to_host(tree, x, virtual.host)
        host = nodes[virtual.host]
        depth = len(path) - 1 + virtual.n_levels
        value = fresh_leaf_value(depth)
        log_wbar = 0.0
        for sibling in virtual.sibling_log_weight_tree:
            depth -= 1
            new = logaddexp(host.log_weight - LOG2, log_wbar + sibling - LOG2)
            alpha = 0.5 * math.exp(host.log_weight - new)
            value = alpha * node_value(host, depth) + (1.0 - alpha) * value
            log_wbar = new

    for i in range(len(path) - 2, -1, -1):
        rec = nodes[path[i]]
        sibling = rec.right if rec.left == path[i + 1] else rec.left
        new = logaddexp(
            rec.log_weight - LOG2, log_wbar + nodes[sibling].log_weight_tree - LOG2
        )
        alpha = 0.5 * math.exp(rec.log_weight - new)
        value = alpha * node_value(rec, i) + (1.0 - alpha) * value
        log_wbar = new
    return value


def predict_aggregated(tree, x, virtual: VirtualSplit | None = None, prior=None):
    """Aggregated prediction of one tree at ``x``.

    Mixes the node forecasts along the path of ``x`` with coefficients
    ``alpha_b = w_b / (2 w_bar_b)``, which equals the exponentially weighted
    average over all prunings with the branching prior.  With ``virtual``,
    the path ends in the temporary split instead, whose empty leaf predicts
    ``prior`` (the task's default forecast when omitted).
    """
    task = tree.task
    if prior is None:
        prior = task.prior()
    return _aggregate(
        tree,
        x,
        virtual,
        lambda rec, depth: task.predict(rec.stats),
        lambda depth: prior,
    )


def weighted_depth(tree, x, virtual: VirtualSplit | None = None) -> float:
    """Average depth of the leaf containing ``x`` under the pruning weights."""
    return float(
        _aggregate(tree, x, virtual, lambda rec, depth: depth, lambda depth: depth)
    )
