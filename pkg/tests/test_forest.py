import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fcassist.forest import (
    N_TREES,
    Forest,
    SchemaError,
    Tree,
    fit_forest,
    fit_tree,
    oob_score,
    score,
    tune,
)
from oracles import cart_instance, exhaustive_cart


def cols(C):
    return [f"c{j}" for j in range(C)]


class TestTree:
    def test_constant_target(self):
        X = np.random.default_rng(0).normal(size=(30, 3))
        tree = fit_tree(X, np.full(30, 4.5), mtry=3, min_node_size=1)
        assert tree.n_leaves == 1
        assert np.all(tree.predict(X) == 4.5)

    def test_step(self):
        x = np.linspace(-1, 1, 41)
        y = (x > 0).astype(float)
        tree = fit_tree(x[:, None], y, mtry=1, min_node_size=1)
        assert tree.n_leaves == 2
        assert tree.threshold[0] == pytest.approx(0.025)
        np.testing.assert_array_equal(tree.predict(x[:, None]), y)

    def test_exhaustive_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            X, y = cart_instance(rng)
            tree = fit_tree(X, y, mtry=X.shape[1], min_node_size=1)
            np.testing.assert_allclose(tree.predict(X), exhaustive_cart(X, y), rtol=0, atol=1e-9)

    @pytest.mark.parametrize("min_node", [2, 5])
    def test_oracle_min_node(self, min_node):
        rng = np.random.default_rng(min_node)
        for _ in range(40):
            X, y = cart_instance(rng)
            tree = fit_tree(X, y, mtry=X.shape[1], min_node_size=min_node)
            np.testing.assert_allclose(tree.predict(X), exhaustive_cart(X, y, min_node), atol=1e-9)

    def test_bootstrap_rows_match_oracle_on_sample(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            X, y = cart_instance(rng)
            rows = rng.integers(0, y.size, y.size)
            tree = fit_tree(X, y, mtry=X.shape[1], min_node_size=1, rows=rows)
            want = exhaustive_cart(X[rows], y[rows])
            np.testing.assert_allclose(tree.predict(X[rows]), want, atol=1e-9)

    @given(st.integers(0, 10_000), st.integers(1, 10))
    def test_leaf_sizes(self, seed, min_node):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(120, 4))
        y = X[:, 0] + rng.normal(size=120)
        tree = fit_tree(X, y, mtry=2, min_node_size=min_node, seed=seed)
        leaves = tree.feature < 0
        assert np.all(tree.count[leaves] >= min_node)
        assert tree.count[leaves].sum() == 120

    def test_binned_columns(self):
        # more distinct values than bins: quantile cuts still find the step
        rng = np.random.default_rng(4)
        x = rng.uniform(-1, 1, 5000)
        y = (x > 0.3).astype(float)
        tree = fit_tree(x[:, None], y, mtry=1, min_node_size=1)
        pred = tree.predict(x[:, None])
        assert np.mean(np.abs(pred - y) < 0.5) > 0.99

    def test_always_split_logged_everywhere(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(300, 12))
        y = X[:, 3] + 0.5 * X[:, 7] + rng.normal(0, 0.3, 300)
        tree, log = fit_tree(X, y, mtry=2, min_node_size=3, always_split=(0, 10), seed=9,
                             log_candidates=True)
        internal = np.nonzero(tree.feature >= 0)[0]
        assert internal.size > 5
        for node in internal:
            assert log[node, 0] and log[node, 10]
            assert log[node].sum() == 4
            assert log[node, tree.feature[node]]

    def test_requires_finite(self):
        with pytest.raises(ValueError):
            fit_tree(np.array([[np.nan], [1.0]]), np.array([1.0, 2.0]), 1, 1)


class TestForest:
    def test_mean_of_trees(self):
        leaf = lambda v: Tree(np.array([-1]), np.zeros(1), np.array([-1]), np.array([-1]),  # noqa: E731
                              np.array([v]), np.array([1]))
        f = Forest(["x"], np.zeros(1), [], 1, 1, 0, "rmse", [leaf(1.0), leaf(3.0)])
        assert f.predict(np.array([[0.3]]))[0] == 2.0

    def test_default_tree_count(self):
        X = np.random.default_rng(0).normal(size=(40, 2))
        f = fit_forest(X, X[:, 0], cols(2), 1, 5, seed=0)
        assert len(f.trees) == N_TREES == 256

    def test_constant_target_zero_oob(self):
        X = np.random.default_rng(0).normal(size=(60, 3))
        f = fit_forest(X, np.full(60, 2.0), cols(3), 2, 1, seed=1, n_trees=16)
        assert f.oob_score == 0.0
        assert oob_score(f, np.full(60, 2.0), "rmsle") == 0.0

    def test_deterministic_serialization(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(80, 4))
        y = X @ [1, 2, 0, 0] + rng.normal(size=80)
        a = fit_forest(X, y, cols(4), 2, 3, seed=42, n_trees=20)
        b = fit_forest(X, y, cols(4), 2, 3, seed=42, n_trees=20)
        c = fit_forest(X, y, cols(4), 2, 3, seed=43, n_trees=20)
        assert a.to_json() == b.to_json()
        assert a.to_json() != c.to_json()

    def test_json_round_trip(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(80, 3))
        X[rng.random(X.shape) < 0.1] = np.nan
        y = 3 + np.abs(np.nan_to_num(X[:, 0]) + rng.normal(size=80))
        f = fit_forest(X, y, cols(3), 2, 2, seed=5, always_split=["c2"], objective="rmsle",
                       n_trees=12)
        text = f.to_json()
        g = Forest.from_json(text)
        assert g.to_json() == text
        Q = rng.normal(size=(50, 3))
        Q[0] = np.nan
        np.testing.assert_array_equal(f.predict(Q), g.predict(Q))
        assert (g.mtry, g.min_node_size, g.objective, g.always_split) == (2, 2, "rmsle", ["c2"])

    def test_not_a_forest(self):
        with pytest.raises(SchemaError):
            Forest.from_json('{"format": "other"}')

    def test_leaf_mean_bound(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(200, 5))
        y = np.exp(X[:, 0]) + rng.normal(size=200)
        f = fit_forest(X, y, cols(5), 2, 1, seed=3, n_trees=64)
        P = f.predict(rng.normal(scale=5, size=(10_000, 5)))
        assert P.min() >= y.min() and P.max() <= y.max()

    def test_oob_fit_quality(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(1, 10, 2000)
        y = x + rng.normal(0, 0.1, 2000)
        f = fit_forest(x[:, None], y, ["x"], mtry=1, min_node_size=5, seed=1, objective="rmsle")
        assert f.oob_score <= 0.05
        assert f.oob_excluded == 0

    def test_oob_excluded_counted(self):
        X = np.arange(6.0)[:, None]
        f = fit_forest(X, np.arange(6.0), ["x"], 1, 1, seed=0, n_trees=1)
        assert f.oob_excluded == int(np.sum(~np.isfinite(f.oob_prediction)))
        assert 0 < f.oob_excluded < 6

    def test_monotone_oob(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(400, 6))
        y = X[:, 0] ** 2 + X[:, 1] + rng.normal(0, 0.5, 400)
        for seed in range(10):
            small = fit_forest(X, y, cols(6), 2, 5, seed=seed, n_trees=32).oob_score
            big = fit_forest(X, y, cols(6), 2, 5, seed=seed, n_trees=256).oob_score
            assert big <= 1.05 * small

    def test_nan_row_imputation(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(100, 3))
        y = X[:, 0] + rng.normal(size=100)
        f = fit_forest(X, y, cols(3), 2, 3, seed=0, n_trees=16)
        nan_pred = f.predict_row({"c0": np.nan, "c1": np.nan, "c2": np.nan})
        assert math.isfinite(nan_pred)
        assert nan_pred == f.predict(np.median(X, axis=0)[None, :])[0]

    def test_constant_forest_row(self):
        X = np.random.default_rng(0).normal(size=(30, 2))
        f = fit_forest(X, np.full(30, 7.0), cols(2), 1, 1, seed=0, n_trees=8)
        assert f.predict_row({"c0": X[3, 0], "c1": X[3, 1]}) == 7.0

    def test_schema_errors(self):
        X = np.random.default_rng(0).normal(size=(30, 2))
        f = fit_forest(X, X[:, 0], cols(2), 1, 1, seed=0, n_trees=4)
        with pytest.raises(SchemaError):
            f.predict_row({"c0": 1.0, "zz": 2.0})
        with pytest.raises(SchemaError):
            f.predict(np.zeros((1, 3)))

    def test_debug_mode_matches_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            X, y = cart_instance(rng)
            f = fit_forest(X, y, cols(X.shape[1]), X.shape[1], 1, seed=0, n_trees=1, bootstrap=False)
            np.testing.assert_allclose(f.predict(X), exhaustive_cart(X, y), atol=1e-9)


class TestObjectives:
    def test_single_row(self):
        assert score(np.array([3.0]), np.array([1.0]), "rmse") == 2.0
        assert score(np.array([3.0]), np.array([1.0]), "rmsle") == pytest.approx(math.log(2))

    def test_perfect(self):
        y = np.array([1.0, 4.0, 9.0])
        assert score(y, y, "rmse") == score(y, y, "rmsle") == 0.0

    def test_rmsle_relative(self):
        assert score(np.array([2.0]), np.array([1.0]), "rmsle") > score(np.array([12.0]), np.array([11.0]), "rmsle")


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(21)
    X = rng.normal(size=(120, 10))
    y = 1 + np.abs(X[:, 0] + 0.5 * X[:, 1] + rng.normal(0, 0.3, 120))
    return X, y


class TestTune:
    def test_trace(self, data):
        X, y = data
        res = tune(X, y, cols(10), "rmsle", seed=4, n_trees=16)
        assert len(res.trace) == 30
        assert [t["phase"] for t in res.trace] == ["warmup"] * 21 + ["refine"] * 9
        assert res.score == min(t["score"] for t in res.trace)
        best = min(res.trace, key=lambda t: t["score"])
        assert (res.mtry, res.min_node_size) == (best["mtry"], best["min_node_size"])
        for t in res.trace:
            assert 1 <= t["mtry"] <= 5 and 1 <= t["min_node_size"] <= 12
        again = tune(X, y, cols(10), "rmsle", seed=4, n_trees=16)
        assert again.trace == res.trace

    def test_needs_50_rows(self, data):
        X, y = data
        with pytest.raises(ValueError):
            tune(X[:49], y[:49], cols(10), "rmse", seed=0)
