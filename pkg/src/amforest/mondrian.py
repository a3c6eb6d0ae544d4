"""Mondrian partitions: batch sampling and online extension.

Three samplers share the same primitives:

* ``sample_mondrian_pruned`` draws a Mondrian partition of a box, cut at a
  lifetime ``lambda`` (every node born after it is dropped).
* ``extend_unrestricted`` grows the minimal tree separating the points seen
  so far inside the unit cube, splitting whole cells.
* ``node_update_restricted`` grows the tree restricted to the points seen so
  far: splits are drawn only in the gap between a new point and the range of
  a node, and may be inserted above existing internal nodes.

``sample_virtual_split`` is the read-only counterpart used at prediction
time: it draws where a split would be inserted for a query point without
touching the tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._tree import LEFT, RIGHT, MondrianTree
from .aggregation import VirtualSplit

TRAIN_STREAM = 0
PREDICT_STREAM = 1


def make_rng(seed, stream: int, index: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, stream, index)``.

    Trees draw from ``(seed, TRAIN_STREAM, m)`` and their prediction-time
    splits from ``(seed, PREDICT_STREAM, m)``, so interleaving predictions
    never changes the training draws.
    """
    ss = np.random.SeedSequence(seed, spawn_key=(stream, index))
    return np.random.Generator(np.random.PCG64(ss))


def sample_exponential(rate: float, rng: np.random.Generator) -> float:
    """Inverse-CDF draw from Exp(rate); ``inf`` when the rate is zero."""
    if rate <= 0.0:
        return math.inf
    return -math.log1p(-rng.random()) / rate


def _sample_index(weights: np.ndarray, rng) -> int:
    """Index ``j`` drawn with probability ``weights[j] / sum(weights)``."""
    cum = np.cumsum(weights)
    j = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    if j == len(weights):
        j = int(np.flatnonzero(weights > 0)[-1])
    return j


@dataclass
class CellBox:
    low: np.ndarray
    high: np.ndarray

    def __post_init__(self):
        self.low = np.asarray(self.low, dtype=float)
        self.high = np.asarray(self.high, dtype=float)
        if self.low.shape != self.high.shape or self.low.ndim != 1:
            raise ValueError("low and high must be vectors of the same length")
        if np.any(self.low > self.high):
            raise ValueError("low must be <= high componentwise")

    @classmethod
    def unit(cls, n_features: int) -> CellBox:
        return cls(np.zeros(n_features), np.ones(n_features))

    @property
    def sides(self) -> np.ndarray:
        return self.high - self.low

    @property
    def linear_dim(self) -> float:
        return float(self.sides.sum())


def sample_cell_split(low, high, rng):
    """One Mondrian split of the cell ``[low, high]``.

    Returns ``(E, feature, threshold)`` with ``E ~ Exp(|C|)``, the feature
    drawn proportionally to the side lengths and the threshold uniform on
    that side.  ``E`` is ``inf`` for a degenerate cell.
    """
    sides = high - low
    total = float(sides.sum())
    elapsed = sample_exponential(total, rng)
    if math.isinf(elapsed):
        return elapsed, None, None
    j = _sample_index(sides, rng)
    threshold = low[j] + rng.random() * sides[j]
    return elapsed, j, threshold


def sample_mondrian_pruned(box: CellBox, lifetime: float, rng, task=None) -> MondrianTree:
    """Sample a Mondrian partition of ``box`` keeping nodes born before ``lifetime``."""
    if not lifetime > 0:
        raise ValueError(f"lifetime must be > 0, got {lifetime}")
    if task is None:
        from .forecasters import RegressionTask

        task = RegressionTask()
    tree = MondrianTree(len(box.low), task, box=(box.low, box.high))
    stack = [tree.root]
    while stack:
        node = stack.pop()
        rec = tree[node]
        elapsed, j, s = sample_cell_split(rec.low, rec.high, rng)
        if rec.time + elapsed > lifetime:
            continue
        left, right = tree.split_leaf(node, j, s, rec.time + elapsed)
        for child, is_left in ((left, True), (right, False)):
            tree[child].low = rec.low.copy()
            tree[child].high = rec.high.copy()
            if is_left:
                tree[child].high[j] = s
            else:
                tree[child].low[j] = s
        stack.extend((right, left))
    return tree


def new_unrestricted_tree(n_features: int, task) -> MondrianTree:
    box = CellBox.unit(n_features)
    return MondrianTree(n_features, task, box=(box.low, box.high))


def _check_unit(x) -> None:
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("unrestricted trees only accept points in [0, 1]^d")


def extend_unrestricted(tree: MondrianTree, x, rng) -> int:
    """Split the leaf containing ``x`` until ``x`` is alone (up to duplicates).

    The child that keeps the previously stored point inherits the weights and
    statistics of the split leaf; the other child starts fresh.  Returns the
    leaf that now stores ``x``.
    """
    x = np.asarray(x, dtype=float)
    _check_unit(x)
    node = tree.root
    while not tree[node].is_leaf:
        tree.visits += 1
        node = tree.child_of(node, x)
    tree.visits += 1
    rec = tree[node]
    while rec.point is not None and not np.array_equal(rec.point, x):
        other = rec.point
        elapsed, j, s = sample_cell_split(rec.low, rec.high, rng)
        left, right = tree.split_leaf(node, j, s, rec.time + elapsed)
        tree[left].low, tree[left].high = rec.low.copy(), rec.high.copy()
        tree[right].low, tree[right].high = rec.low.copy(), rec.high.copy()
        tree[left].high[j] = s
        tree[right].low[j] = s
        x_side = tree.child_of(node, x)
        other_side = tree.child_of(node, other)
        keeper = tree[other_side]
        keeper.log_weight = rec.log_weight
        keeper.log_weight_tree = rec.log_weight_tree
        keeper.stats = rec.stats.copy()
        keeper.point = other
        rec.point = None
        node = x_side
        rec = tree[node]
    rec.point = x.copy()
    return node


def sample_virtual_split_unrestricted(tree: MondrianTree, x, rng) -> VirtualSplit | None:
    """Dry run of ``extend_unrestricted`` for a query point.

    Uses the same draws, in the same order, as the real extension would.
    """
    x = np.asarray(x, dtype=float)
    _check_unit(x)
    host = tree.leaf_containing(x)
    rec = tree[host]
    if rec.point is None or np.array_equal(rec.point, x):
        return None
    low, high = rec.low.copy(), rec.high.copy()
    time = rec.time
    siblings = []
    first = None
    while True:
        elapsed, j, s = sample_cell_split(low, high, rng)
        time += elapsed
        x_left = x[j] <= s
        if first is None:
            first = (time, (j, s), LEFT if x_left else RIGHT)
        if x_left == (rec.point[j] <= s):
            siblings.append(0.0)
            if x_left:
                high[j] = s
            else:
                low[j] = s
        else:
            siblings.append(rec.log_weight)
            break
    birth, split, side = first
    return VirtualSplit(host, birth, split, side, tuple(reversed(siblings)))


def _range_extension(rec, x):
    below = np.maximum(rec.low - x, 0.0)
    above = np.maximum(x - rec.high, 0.0)
    return below + above


def _sample_gap_split(rec, x, extension, rng):
    j = _sample_index(extension, rng)
    if x[j] < rec.low[j]:
        side = LEFT
        threshold = x[j] + rng.random() * (rec.low[j] - x[j])
    else:
        side = RIGHT
        threshold = rec.high[j] + rng.random() * (x[j] - rec.high[j])
    return side, j, threshold


def _is_empty(rec) -> bool:
    # a fresh restricted root has the empty range [inf, -inf]
    return rec.is_leaf and bool(rec.low[0] > rec.high[0])


def _extend_range(rec, x) -> None:
    np.minimum(rec.low, x, out=rec.low)
    np.maximum(rec.high, x, out=rec.high)


def node_update_restricted(tree: MondrianTree, x, rng, y=None, split_pure: bool = True) -> int:
    """Extend the restricted Mondrian tree with ``x`` and return its leaf.

    Walks down from the root.  At each node the gap between ``x`` and the
    node range gives a rate; a split time is drawn and, if it precedes the
    node's own split (or the node is a leaf), a new split is inserted above
    the node with a fresh leaf for ``x``.  Otherwise the range is extended
    and the walk continues in the child containing ``x``.

    With ``split_pure=False`` a leaf whose labels all equal ``y`` absorbs
    ``x`` without splitting.
    """
    x = np.asarray(x, dtype=float)
    root = tree[tree.root]
    if _is_empty(root):
        tree.visits += 1
        root.low = x.copy()
        root.high = x.copy()
        return tree.root

    node = tree.root
    while True:
        tree.visits += 1
        rec = tree[node]
        extension = _range_extension(rec, x)
        total = float(extension.sum())
        elapsed = sample_exponential(total, rng)
        if total > 0.0 and (rec.is_leaf or rec.time + elapsed < tree[rec.left].time):
            if rec.is_leaf and not split_pure and y is not None and tree.task.is_pure(rec.stats, y):
                _extend_range(rec, x)
                return node
            side, j, threshold = _sample_gap_split(rec, x, extension, rng)
            internal, leaf = tree.insert_internal_above(node, (j, threshold), rec.time + elapsed, side)
            _extend_range(tree[internal], x)
            tree[leaf].low = x.copy()
            tree[leaf].high = x.copy()
            return leaf
        _extend_range(rec, x)
        if rec.is_leaf:
            return node
        node = rec.left if x[rec.feature] <= rec.threshold else rec.right


def sample_virtual_split(tree: MondrianTree, x, rng) -> VirtualSplit | None:
    """Dry run of ``node_update_restricted`` for a query point.

    Returns where the temporary split would go, or ``None`` when ``x`` falls
    inside every range on its path (or the tree is still empty).
    """
    x = np.asarray(x, dtype=float)
    if _is_empty(tree[tree.root]):
        return None
    node = tree.root
    while True:
        rec = tree[node]
        extension = _range_extension(rec, x)
        total = float(extension.sum())
        elapsed = sample_exponential(total, rng)
        if total > 0.0 and (rec.is_leaf or rec.time + elapsed < tree[rec.left].time):
            side, j, threshold = _sample_gap_split(rec, x, extension, rng)
            return VirtualSplit(node, rec.time + elapsed, (j, threshold), side, (rec.log_weight_tree,))
        if rec.is_leaf:
            return None
        node = rec.left if x[rec.feature] <= rec.threshold else rec.right


def depth_of(tree: MondrianTree, node: int) -> int:
    return tree.depth(node)


def leaf_count(tree: MondrianTree) -> int:
    return tree.n_leaves
