import copy

import numpy as np
import pytest
from sklearn.base import clone

from amforest.data import gauss2
from amforest.forest import (
    AMFClassifier,
    AMFRegressor,
    OnlineDummyClassifier,
    OnlineDummyRegressor,
)
from amforest.metrics import progressive_eval


def _state(forest):
    return [tree.dump() for tree in forest.trees_]


def _same_state(a, b):
    for da, db in zip(a, b):
        assert da.keys() == db.keys()
        for key in da:
            np.testing.assert_array_equal(da[key], db[key])


def test_get_params_and_clone():
    clf = AMFClassifier(n_classes=3, n_trees=4, eta=0.5, random_state=1)
    params = clf.get_params()
    assert params["n_classes"] == 3 and params["n_trees"] == 4 and params["split_pure"] is True
    assert clone(clf).get_params() == params


def test_one_sample_one_leaf():
    clf = AMFClassifier(n_classes=2, n_trees=1, random_state=0).fit([[0.2, 0.3]], [1])
    tree = clf.trees_[0]
    assert tree.n_leaves == 1 and list(tree[tree.root].stats.counts) == [0, 1]


def test_two_distinct_points_two_leaves():
    clf = AMFClassifier(n_classes=2, n_trees=1, random_state=0).fit([[0.2], [0.8]], [0, 1])
    assert clf.trees_[0].n_leaves == 2


def test_unfitted_prediction_is_prior():
    np.testing.assert_allclose(AMFClassifier(n_classes=4).predict_proba([[1.0, 2.0]]), [[0.25] * 4])
    assert AMFRegressor().predict([[1.0]])[0] == 0.0


def test_interleaved_predictions_do_not_change_training():
    X, y = gauss2(150, seed=3)
    plain = AMFClassifier(n_trees=3, random_state=5).fit(X, y)
    mixed = AMFClassifier(n_trees=3, random_state=5)
    for i in range(len(y)):
        mixed.predict_proba(X[i : i + 1] + 3.0)
        mixed.partial_fit(X[i : i + 1], y[i : i + 1])
    _same_state(_state(plain), _state(mixed))


def test_same_seed_same_predictions():
    X, y = gauss2(100, seed=1)
    grid = np.random.default_rng(0).uniform(-4, 4, (30, 2))
    a = AMFClassifier(random_state=9).fit(X, y).predict_proba(grid)
    b = AMFClassifier(random_state=9).fit(X, y).predict_proba(grid)
    np.testing.assert_array_equal(a, b)


def test_forest_averages_tree_predictions(monkeypatch):
    clf = AMFClassifier(n_trees=2, random_state=0).fit([[0.0], [1.0]], [0, 1])
    fake = {0: np.array([0.8, 0.2]), 1: np.array([0.6, 0.4])}
    monkeypatch.setattr(clf, "_tree_predict", lambda m, x: fake[m])
    np.testing.assert_allclose(clf.predict_proba([[0.5]]), [[0.7, 0.3]])
    fake[1] = fake[0]
    np.testing.assert_allclose(clf.predict_proba([[0.5]]), [[0.8, 0.2]])


def test_tree_order_does_not_matter():
    X, y = gauss2(80, seed=2)
    clf = AMFClassifier(n_trees=4, random_state=3).fit(X, y)
    x = np.array([5.0, -5.0])  # outside every range, so each tree draws a temporary split
    twin = copy.deepcopy(clf)
    forward = np.mean(clf.tree_predictions(x), axis=0)
    twin.trees_.reverse()
    twin.pred_rngs_.reverse()
    np.testing.assert_allclose(np.mean(twin.tree_predictions(x), axis=0), forward, atol=1e-15)


def test_validation_errors():
    clf = AMFClassifier(n_classes=2).fit([[0.0, 1.0]], [0])
    with pytest.raises(ValueError):
        clf.partial_fit([[0.0, 1.0, 2.0]], [0])
    with pytest.raises(ValueError):
        clf.partial_fit([[0.0, 1.0]], [2])
    with pytest.raises(ValueError):
        clf.predict([[0.0]])
    with pytest.raises(ValueError):
        AMFClassifier(n_trees=0).fit([[0.0]], [0])
    with pytest.raises(ValueError):
        AMFClassifier(variant="other").fit([[0.0]], [0])
    with pytest.raises(ValueError):
        AMFRegressor(range_bound=1.0).fit([[0.0]], [1.5])
    with pytest.raises(ValueError):
        AMFClassifier().fit([[np.nan]], [0])


def test_unrestricted_variant_runs_in_unit_box(rng):
    X = rng.random((60, 2))
    y = (X[:, 0] > 0.5).astype(int)
    clf = AMFClassifier(variant="unrestricted", n_trees=3, random_state=0).fit(X, y)
    proba = clf.predict_proba(rng.random((20, 2)))
    np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-12)
    with pytest.raises(ValueError):
        clf.partial_fit([[1.5, 0.2]], [0])


def test_split_pure_off_keeps_pure_leaves():
    X = np.linspace(0, 1, 20).reshape(-1, 1)
    y = np.zeros(20, dtype=int)
    faithful = AMFClassifier(n_trees=1, random_state=0).fit(X, y)
    merged = AMFClassifier(n_trees=1, split_pure=False, random_state=0).fit(X, y)
    assert faithful.trees_[0].n_leaves == 20
    assert merged.trees_[0].n_leaves == 1


def test_weighted_depths():
    clf = AMFClassifier(n_trees=3, random_state=0)
    per_tree, mean = clf.weighted_depths([[0.0, 0.0]])
    assert per_tree.tolist() == [[0.0, 0.0, 0.0]] and mean.tolist() == [0.0]
    X, y = gauss2(50, seed=0)
    clf = AMFClassifier(n_trees=1, random_state=0).fit(X, y)
    per_tree, mean = clf.weighted_depths(X[:5])
    np.testing.assert_array_equal(per_tree[:, 0], mean)
    assert np.all(mean > 0)


def test_regressor_learns_a_step(rng):
    X = rng.random((400, 1))
    y = np.where(X[:, 0] > 0.5, 0.8, -0.8)
    reg = AMFRegressor(range_bound=1.0, random_state=0).fit(X, y)
    pred = reg.predict([[0.1], [0.9]])
    assert pred[0] < -0.5 and pred[1] > 0.5


def test_dummy_classifier():
    dummy = OnlineDummyClassifier(2)
    np.testing.assert_allclose(dummy.predict_proba([[0.0]]), [[0.5, 0.5]])
    dummy.partial_fit([[0.0]] * 4, [0, 0, 0, 1])
    np.testing.assert_allclose(dummy.predict_proba([[0.0]]), [[3.5 / 5, 1.5 / 5]])
    dummy.fit([[0.0]] * 2, [0, 1])
    np.testing.assert_allclose(dummy.predict_proba([[0.0]]), [[0.5, 0.5]])


def test_dummy_counts_three_one():
    dummy = OnlineDummyClassifier(2).fit([[0.0]] * 4, [0, 0, 0, 1])
    # (n(k) + 1/2) / (t + K/2) with t = 4
    np.testing.assert_allclose(dummy.predict_proba([[0.0]])[0], [3.5 / 5, 1.5 / 5])


def test_dummy_regressor():
    dummy = OnlineDummyRegressor(2.0)
    assert dummy.predict([[0.0]])[0] == 0.0
    dummy.partial_fit([[0.0], [0.0]], [1.0, 2.0])
    assert dummy.predict([[0.0]])[0] == 1.5


def test_forest_loss_below_mean_tree_loss():
    X, y = gauss2(300, seed=4)
    forest = AMFClassifier(n_trees=5, random_state=2)
    forest_loss, tree_losses = 0.0, np.zeros(5)
    for i in range(len(y)):
        per_tree = forest.tree_predictions(X[i]) if i else [np.full(2, 0.5)] * 5
        probs = np.array([p[y[i]] for p in per_tree])
        forest_loss -= np.log(probs.mean())
        tree_losses -= np.log(probs)
        forest.partial_fit(X[i : i + 1], y[i : i + 1])
    assert forest_loss <= tree_losses.mean() + 1e-12


def test_progressive_eval_regression_stream(rng):
    X = rng.random((100, 1))
    y = np.where(X[:, 0] > 0.5, 0.5, -0.5)
    curves = progressive_eval(
        {"amf": AMFRegressor(random_state=0), "dummy": OnlineDummyRegressor()}, X, y, "regression"
    )
    assert curves["amf"].final < curves["dummy"].final
