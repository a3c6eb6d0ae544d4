import numpy as np
import pytest

from amforest._tree import MondrianTree
from amforest.forecasters import ClassificationTask

# lines recorded by test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES = []


def complete_tree(depth, task=None, n_features=1):
    """Complete binary tree of the given depth; children are born one time unit later."""
    tree = MondrianTree(n_features, task or ClassificationTask(2))
    frontier = [(tree.root, 0.0, 1.0)]
    for level in range(depth):
        nxt = []
        for node, low, high in frontier:
            mid = 0.5 * (low + high)
            left, right = tree.split_leaf(node, 0, mid, level + 1.0)
            nxt += [(left, low, mid), (right, mid, high)]
        frontier = nxt
    return tree


def stump(task=None, threshold=0.5):
    tree = MondrianTree(1, task or ClassificationTask(2))
    tree.split_leaf(tree.root, 0, threshold, 1.0)
    return tree


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
