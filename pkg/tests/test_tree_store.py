import numpy as np
import pytest

from amforest._tree import LEFT, RIGHT, MondrianTree
from amforest.forecasters import ClassificationTask, RegressionTask
from amforest.mondrian import depth_of, leaf_count

from conftest import stump


def test_new_tree_is_single_leaf():
    tree = MondrianTree(2, ClassificationTask(3))
    assert len(tree) == 1
    root = tree[tree.root]
    assert root.is_leaf and root.time == 0.0
    assert root.log_weight == root.log_weight_tree == 0.0
    assert list(root.stats.counts) == [0, 0, 0]


def test_regression_root_stats():
    root = MondrianTree(1, RegressionTask())[0]
    assert (root.stats.label_sum, root.stats.count) == (0.0, 0)


def test_zero_dimension_rejected():
    with pytest.raises(ValueError):
        MondrianTree(0, ClassificationTask(2))


def test_leaf_containing_and_boundary():
    tree = stump()
    root = tree[tree.root]
    assert tree.leaf_containing(np.array([0.3])) == root.left
    assert tree.leaf_containing(np.array([0.5])) == root.left
    assert tree.leaf_containing(np.array([0.7])) == root.right
    assert MondrianTree(1, ClassificationTask(2)).leaf_containing(np.array([9.0])) == 0


def test_depth_and_leaf_count():
    tree = MondrianTree(1, ClassificationTask(2))
    assert depth_of(tree, tree.root) == 0 and leaf_count(tree) == 1
    tree = stump()
    assert [depth_of(tree, leaf) for leaf in tree.leaves()] == [1, 1]


def test_insert_above_root():
    tree = MondrianTree(1, ClassificationTask(2))
    old_root = tree.root
    internal, leaf = tree.insert_internal_above(old_root, (0, 0.5), 1.0, RIGHT)
    assert tree.root == internal
    new = tree[internal]
    assert (new.left, new.right) == (old_root, leaf)
    assert new.time == 0.0 and tree[old_root].time == 1.0 and tree[leaf].time == 1.0
    tree.check()


def test_insert_above_left_leaf_of_stump():
    tree = stump()
    left = tree[tree.root].left
    tree.insert_internal_above(left, (0, 0.2), 1.5, LEFT)
    assert len(tree) == 5
    assert tree.depth(left) == 2
    tree.check()


def test_inserted_node_copies_displaced_record():
    tree = stump()
    left = tree[tree.root].left
    rec = tree[left]
    rec.log_weight = rec.log_weight_tree = -1.25
    tree.task.update(rec.stats, 1)
    internal, leaf = tree.insert_internal_above(left, (0, 0.2), 1.5, LEFT)
    new = tree[internal]
    assert new.log_weight == -1.25 and new.stats.count == 1
    assert new.stats is not rec.stats
    assert tree[leaf].log_weight == 0.0 and tree[leaf].stats.count == 0


def test_insert_validation():
    tree = stump()
    left = tree[tree.root].left
    with pytest.raises(ValueError):
        tree.insert_internal_above(left, (0, 0.2), 0.5, LEFT)  # before the displaced node
    with pytest.raises(ValueError):
        tree.insert_internal_above(tree.root, (0, 0.2), 2.0, LEFT)  # after the root's split
    with pytest.raises(ValueError):
        tree.insert_internal_above(left, (0, 0.2), 1.5, 2)
    detached = tree.new_node(None, 0.0)
    with pytest.raises(ValueError):
        tree.insert_internal_above(detached, (0, 0.2), 1.0, LEFT)


def test_random_insertions_keep_invariants(rng):
    tree = MondrianTree(2, ClassificationTask(2))
    for _ in range(200):
        node = int(rng.choice(list(tree.iter_nodes())))
        rec = tree[node]
        upper = tree[rec.left].time if not rec.is_leaf else rec.time + 1.0
        birth = rec.time + (upper - rec.time) * rng.uniform(0.01, 0.99)
        tree.insert_internal_above(node, (int(rng.integers(2)), rng.random()), birth, int(rng.integers(2)))
        tree.check()
    for leaf in tree.leaves():
        node, times = leaf, []
        while node is not None:
            times.append(tree[node].time)
            node = tree[node].parent
        assert times == sorted(times, reverse=True) and len(set(times)) == len(times)


def test_ids_are_never_reused():
    tree = stump()
    before = len(tree)
    internal, leaf = tree.insert_internal_above(tree[tree.root].left, (0, 0.1), 1.5, LEFT)
    assert {internal, leaf} == {before, before + 1}


def test_dump_shapes():
    dump = stump().dump()
    assert dump["left"].tolist() == [1, -1, -1]
    assert dump["counts"].shape == (3, 2)
