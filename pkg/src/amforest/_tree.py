"""Growable binary-tree storage for Mondrian trees.

Nodes live in a flat list and are addressed by their integer index.  Left
and right links stand for the children ``b0`` and ``b1`` of a node ``b``;
a point goes left when ``x[feature] <= threshold``.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from .forecasters import NodeStats

LEFT = 0
RIGHT = 1


@dataclass(slots=True, eq=False)
class NodeRecord:
    parent: int | None
    left: int | None
    right: int | None
    feature: int | None
    threshold: float | None
    time: float
    # range of the points seen in the node (restricted trees) or the node
    # cell (unrestricted trees)
    low: np.ndarray
    high: np.ndarray
    log_weight: float
    log_weight_tree: float
    stats: NodeStats
    # point stored in a leaf, unrestricted trees only
    point: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def n_samples(self) -> int:
        return self.stats.count


class MondrianTree:
    """Node store plus root handle for one Mondrian tree.

    Parameters
    ----------
    n_features : int
        Dimension of the feature vectors.
    task : ClassificationTask or RegressionTask
        Provides the empty node statistics.
    box : tuple of arrays, optional
        ``(low, high)`` cell of the root.  Restricted trees leave it unset
        and start from an empty range; unrestricted trees pass the unit box.
    """

    def __init__(self, n_features: int, task, box=None):
        n_features = int(n_features)
        if n_features < 1:
            raise ValueError(f"n_features must be >= 1, got {n_features}")
        self.n_features = n_features
        self.task = task
        self.nodes: list[NodeRecord] = []
        # instrumentation for the per-update locality checks
        self.visits = 0
        self.root = self.new_node(parent=None, time=0.0)
        if box is not None:
            low, high = box
            self.nodes[self.root].low = np.array(low, dtype=float)
            self.nodes[self.root].high = np.array(high, dtype=float)

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, node: int) -> NodeRecord:
        return self.nodes[node]

    def new_node(self, parent, time, stats=None) -> int:
        """Append a fresh leaf (``w = w_bar = 1``, empty range) and return its id."""
        d = self.n_features
        record = NodeRecord(
            parent=parent,
            left=None,
            right=None,
            feature=None,
            threshold=None,
            time=float(time),
            low=np.full(d, np.inf),
            high=np.full(d, -np.inf),
            log_weight=0.0,
            log_weight_tree=0.0,
            stats=self.task.empty_stats() if stats is None else stats,
        )
        self.nodes.append(record)
        self.visits += 1
        return len(self.nodes) - 1

    def child_of(self, node: int, x) -> int:
        rec = self.nodes[node]
        return rec.left if x[rec.feature] <= rec.threshold else rec.right

    def leaf_containing(self, x) -> int:
        node = self.root
        nodes = self.nodes
        while nodes[node].left is not None:
            rec = nodes[node]
            node = rec.left if x[rec.feature] <= rec.threshold else rec.right
        return node

    def path(self, x) -> list[int]:
        """Node ids from the root down to the leaf containing ``x``."""
        node = self.root
        out = [node]
        while self.nodes[node].left is not None:
            node = self.child_of(node, x)
            out.append(node)
        return out

    def sibling(self, node: int) -> int:
        parent = self.nodes[self.nodes[node].parent]
        return parent.right if parent.left == node else parent.left

    def split_leaf(self, node: int, feature: int, threshold: float, child_time: float):
        """Turn leaf ``node`` into an internal node with two fresh children."""
        rec = self.nodes[node]
        if not rec.is_leaf:
            raise ValueError(f"node {node} is not a leaf")
        if not child_time > rec.time:
            raise ValueError("children must be born after their parent")
        rec.feature = int(feature)
        rec.threshold = float(threshold)
        left = self.new_node(node, child_time)
        right = self.new_node(node, child_time)
        rec.left, rec.right = left, right
        return left, right

    def insert_internal_above(self, node: int, split, new_birth: float, side: int):
        """Insert a split above ``node``.

        The new internal node takes the place of ``node`` in the tree and
        receives a copy of its record (statistics, weights, range and birth
        time).  ``node`` keeps its subtree and hangs below the new internal
        node on side ``1 - side``; a fresh leaf is created on ``side``.  Both
        children are born at ``new_birth``.

        Returns ``(new_internal, new_leaf)``.
        """
        rec = self.nodes[node]
        if rec.parent is None and node != self.root:
            raise ValueError(f"node {node} is detached from the tree")
        if side not in (LEFT, RIGHT):
            raise ValueError(f"side must be 0 (left) or 1 (right), got {side}")
        if not new_birth > rec.time:
            raise ValueError("new split must be born after the displaced node")
        if not rec.is_leaf and not new_birth < self.nodes[rec.left].time:
            raise ValueError("new split must be born before the displaced node's split")
        feature, threshold = split

        internal = len(self.nodes)
        self.nodes.append(
            NodeRecord(
                parent=rec.parent,
                left=None,
                right=None,
                feature=int(feature),
                threshold=float(threshold),
                time=rec.time,
                low=rec.low.copy(),
                high=rec.high.copy(),
                log_weight=rec.log_weight,
                log_weight_tree=rec.log_weight_tree,
                stats=rec.stats.copy(),
            )
        )
        self.visits += 1
        leaf = self.new_node(internal, new_birth)

        if rec.parent is None:
            self.root = internal
        else:
            parent = self.nodes[rec.parent]
            if parent.left == node:
                parent.left = internal
            else:
                parent.right = internal
        rec.parent = internal
        rec.time = float(new_birth)
        new = self.nodes[internal]
        if side == LEFT:
            new.left, new.right = leaf, node
        else:
            new.left, new.right = node, leaf
        return internal, leaf

    def depth(self, node: int) -> int:
        depth = 0
        while self.nodes[node].parent is not None:
            node = self.nodes[node].parent
            depth += 1
        return depth

    def leaves(self) -> list[int]:
        return [i for i in self.iter_nodes() if self.nodes[i].is_leaf]

    @property
    def n_leaves(self) -> int:
        return len(self.leaves())

    @property
    def n_internal(self) -> int:
        return sum(1 for i in self.iter_nodes() if not self.nodes[i].is_leaf)

    def iter_nodes(self, start: int | None = None):
        """Preorder traversal of the nodes reachable from ``start``."""
        stack = [self.root if start is None else start]
        while stack:
            node = stack.pop()
            yield node
            rec = self.nodes[node]
            if rec.left is not None:
                stack.append(rec.right)
                stack.append(rec.left)

    def copy(self) -> MondrianTree:
        return copy.deepcopy(self)

    def dump(self) -> dict:
        """Plain-array snapshot of the whole store, for debugging and comparison."""
        nodes = self.nodes
        none = -1
        out = {
            "root": np.array([self.root]),
            "parent": np.array([none if r.parent is None else r.parent for r in nodes]),
            "left": np.array([none if r.left is None else r.left for r in nodes]),
            "right": np.array([none if r.right is None else r.right for r in nodes]),
            "feature": np.array([none if r.feature is None else r.feature for r in nodes]),
            "threshold": np.array(
                [np.nan if r.threshold is None else r.threshold for r in nodes]
            ),
            "time": np.array([r.time for r in nodes]),
            "low": np.array([r.low for r in nodes]).reshape(len(nodes), -1),
            "high": np.array([r.high for r in nodes]).reshape(len(nodes), -1),
            "log_weight": np.array([r.log_weight for r in nodes]),
            "log_weight_tree": np.array([r.log_weight_tree for r in nodes]),
            "count": np.array([r.stats.count for r in nodes]),
        }
        if nodes[0].stats.counts is not None:
            out["counts"] = np.array([r.stats.counts for r in nodes])
        else:
            out["label_sum"] = np.array([r.stats.label_sum for r in nodes])
        return out

    def check(self) -> None:
        """Raise ``AssertionError`` if a structural invariant is broken."""
        nodes = self.nodes
        assert nodes[self.root].parent is None
        n_leaves = n_internal = 0
        for node in self.iter_nodes():
            rec = nodes[node]
            assert (rec.left is None) == (rec.right is None)
            assert (rec.feature is None) == rec.is_leaf
            if rec.is_leaf:
                n_leaves += 1
                assert rec.log_weight_tree == rec.log_weight
            else:
                n_internal += 1
                for child in (rec.left, rec.right):
                    assert nodes[child].parent == node
                    assert nodes[child].time > rec.time
                assert rec.log_weight_tree >= rec.log_weight - np.log(2) - 1e-12
            if rec.n_samples >= 1:
                assert np.all(rec.low <= rec.high)
        assert n_internal == n_leaves - 1
