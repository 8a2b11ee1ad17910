"""Boosted regression trees: fitting, early stopping, prediction, ensembling."""

import numpy as np
import pytest

from bvqa.errors import ConfigError, ShapeError
from bvqa.regression import (
    GbdtModel,
    TrainConfig,
    ensemble_scores,
    train_gbdt,
)


def make_problem(n=200, dim=6, seed=0, noise=0.1):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, (n, dim))
    y = (2.0 * x[:, 0] + np.sin(3 * x[:, 1]) - x[:, 2] ** 2
         + noise * rng.normal(size=n))
    return x, y


def walk_tree(tree, row):
    node = 0
    while tree.feature[node] != -1:
        if row[tree.feature[node]] <= tree.threshold[node]:
            node = tree.left[node]
        else:
            node = tree.right[node]
    return tree.value[node]


def test_constant_labels_collapse_to_base_score():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(40, 4))
    y = np.full(40, 7.5)
    model = train_gbdt(x[:30], y[:30], x[30:], y[30:])
    assert model.num_trees == 0
    assert model.base_score == 7.5
    assert model.val_rmse_history[0] == 0.0
    assert np.all(model.predict(x) == 7.5)


def test_training_rmse_non_increasing_without_subsampling():
    x, y = make_problem(seed=2)
    config = TrainConfig(max_depth=3, subsample=1.0, max_trees=40,
                         learning_rate=0.2, early_stop_patience=40,
                         min_samples_leaf=2)
    model = train_gbdt(x, y, x, y, config)
    pred = np.full(x.shape[0], model.base_score)
    last = np.sqrt(np.mean((pred - y) ** 2))
    for tree in model.trees:
        pred += model.learning_rate * tree.predict(x)
        rmse = np.sqrt(np.mean((pred - y) ** 2))
        assert rmse <= last + 1e-12
        last = rmse


def test_step_function_fit_exactly():
    x = np.linspace(0, 1, 20)[:, None]
    y = np.where(x[:, 0] < 0.5, -1.0, 2.0)
    config = TrainConfig(max_depth=1, subsample=1.0, max_trees=5,
                         learning_rate=1.0, early_stop_patience=5,
                         min_samples_leaf=1)
    model = train_gbdt(x, y, x, y, config)
    assert np.max(np.abs(model.predict(x) - y)) < 1e-12
    root = model.trees[0]
    assert x[9, 0] < root.threshold[0] < x[10, 0]


def test_predict_matches_per_tree_walk():
    x, y = make_problem(seed=3)
    model = train_gbdt(x[:150], y[:150], x[150:], y[150:],
                       TrainConfig(max_trees=30, seed=5))
    rng = np.random.default_rng(4)
    queries = rng.uniform(-1.2, 1.2, (100, 6))
    expected = np.full(100, model.base_score)
    for tree in model.trees:
        expected += model.learning_rate * np.array(
            [walk_tree(tree, q) for q in queries])
    assert np.allclose(model.predict(queries), expected, atol=0)

    single = model.predict(queries[0])
    assert np.isscalar(single) or single.ndim == 0
    assert float(single) == expected[0]


def test_label_shift_equivariance_on_exact_arithmetic():
    """Dyadic labels keep every mean and residual exactly representable, so
    shifting the labels by 100 must shift the fit by exactly 100."""
    x = np.arange(16, dtype=np.float64)[:, None]
    y = np.arange(16, dtype=np.float64) * 0.25
    config = TrainConfig(max_depth=6, subsample=1.0, max_trees=10,
                         learning_rate=1.0, early_stop_patience=10,
                         min_samples_leaf=1, seed=0)
    base = train_gbdt(x, y, x, y, config)
    shifted = train_gbdt(x, y + 100.0, x, y + 100.0, config)
    assert shifted.base_score == base.base_score + 100.0
    assert np.all(shifted.predict(x) - base.predict(x) == 100.0)
    assert np.all(base.predict(x) == y)  # deep exact interpolation


def test_early_stop_truncates_at_best_validation_round():
    x, y = make_problem(n=120, seed=7, noise=0.5)
    config = TrainConfig(max_depth=4, subsample=0.7, max_trees=400,
                         learning_rate=0.4, early_stop_patience=10,
                         min_samples_leaf=2, seed=3)
    model = train_gbdt(x[:80], y[:80], x[80:], y[80:], config)
    history = np.array(model.val_rmse_history)
    assert model.num_trees == int(np.argmin(history))
    assert history[model.num_trees] == history.min()
    # overfitting region was explored, then cut away
    assert len(history) - 1 > model.num_trees


def test_refit_is_deterministic():
    x, y = make_problem(seed=8)
    config = TrainConfig(max_trees=25, subsample=0.5, seed=11)
    a = train_gbdt(x[:150], y[:150], x[150:], y[150:], config)
    b = train_gbdt(x[:150], y[:150], x[150:], y[150:], config)
    assert a.num_trees == b.num_trees
    assert a.val_rmse_history == b.val_rmse_history
    for ta, tb in zip(a.trees, b.trees):
        assert np.array_equal(ta.feature, tb.feature)
        assert np.array_equal(ta.threshold, tb.threshold)
        assert np.array_equal(ta.value, tb.value)


def test_shape_and_config_validation():
    x, y = make_problem(n=50, seed=9)
    with pytest.raises(ShapeError):
        train_gbdt(x, y[:-1], x, y)
    with pytest.raises(ShapeError):
        train_gbdt(x, y, x[:, :3], y)
    with pytest.raises(ConfigError):
        train_gbdt(x, y, x[:0], y[:0])
    with pytest.raises(ConfigError):
        train_gbdt(x, y, x, y, TrainConfig(subsample=0.0))
    with pytest.raises(ConfigError):
        train_gbdt(x, y, x, y, TrainConfig(max_depth=0))

    model = GbdtModel(trees=[], learning_rate=0.1, base_score=1.0,
                      feature_dim=4)
    with pytest.raises(ShapeError):
        model.predict(np.zeros((3, 5)))
    assert np.all(model.predict(np.zeros((3, 4))) == 1.0)


def test_ensemble_scores():
    report = ensemble_scores([[1.0, 5.0, 9.0]])
    assert report.sub_video_scores == (5.0,)
    assert report.video_score == 5.0

    report = ensemble_scores([[2.0, 4.0]])
    assert report.sub_video_scores == (3.0,)  # even count: midpoint median

    report = ensemble_scores([[10.0]])
    assert report.video_score == 10.0

    report = ensemble_scores([[1.0, 5.0, 9.0], [2.0, 4.0]])
    assert report.sub_video_scores == (5.0, 3.0)
    assert report.video_score == 4.0
    assert report.cube_scores == ((1.0, 5.0, 9.0), (2.0, 4.0))

    with pytest.raises(ConfigError):
        ensemble_scores([])
    with pytest.raises(ConfigError):
        ensemble_scores([[1.0], []])
