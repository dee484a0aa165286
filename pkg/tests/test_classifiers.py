import os

import numpy as np
import pytest

from evoselect.classifiers import (
    CLASSIFIERS,
    DecisionTreeClassifier,
    KNeighborsClassifier,
    RandomForestClassifier,
    SVMClassifier,
    evaluate_classifier,
    load_model,
    make_classifier,
    save_model,
)
from evoselect.classifiers.svm import rbf_kernel, smo_solve
from evoselect.classifiers.tree import TreeNode
from evoselect.exceptions import ConfigurationError, UsageError

XOR_X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
XOR_Y = np.array([0, 0, 1, 1])


def random_problem(rng, max_rows=100, max_features=6, n_classes=3):
    n = int(rng.integers(5, max_rows + 1))
    d = int(rng.integers(1, max_features + 1))
    X = rng.random((n, d))
    y = rng.integers(0, n_classes, n)
    return X, y


class TestKNN:
    def test_nearest_point(self):
        model = KNeighborsClassifier(n_neighbors=1).fit([[0.0], [10.0]], [0, 1])
        assert model.predict([[1.0]]).tolist() == [0]

    def test_majority_among_equidistant(self):
        X = [[1.0, 0.0], [-0.5, np.sqrt(3) / 2], [-0.5, -np.sqrt(3) / 2]]
        model = KNeighborsClassifier(n_neighbors=3).fit(X, [0, 0, 1])
        assert model.predict([[0.0, 0.0]]).tolist() == [0]

    def test_distance_ties_prefer_lower_training_index(self):
        model = KNeighborsClassifier(n_neighbors=1).fit([[1.0], [1.0]], [1, 0])
        assert model.predict([[1.0]]).tolist() == [1]

    def test_k1_memorizes_distinct_points(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            X, y = random_problem(rng)
            X += np.arange(len(X))[:, None] * 1e-3  # ensure distinct rows
            model = KNeighborsClassifier(n_neighbors=1).fit(X, y)
            assert (model.predict(X) == y).all()

    def test_k_larger_than_training_rejected(self):
        with pytest.raises(ConfigurationError):
            KNeighborsClassifier(n_neighbors=5).fit([[0.0], [1.0]], [0, 1])


class TestDecisionTree:
    def test_single_threshold_separates(self):
        X = np.arange(10, dtype=float).reshape(-1, 1)
        y = (X.ravel() >= 5).astype(int)
        model = DecisionTreeClassifier().fit(X, y)
        assert (model.predict(X) == y).all()
        assert model.tree_.feature == 0
        assert model.tree_.threshold == 4.5

    def test_depth_zero_is_majority_leaf(self):
        model = DecisionTreeClassifier(max_depth=0).fit([[0.0], [1.0], [2.0]], [0, 0, 1])
        assert model.tree_.is_leaf
        assert model.predict([[9.0], [-4.0]]).tolist() == [0, 0]

    def test_majority_tie_breaks_to_lowest_class(self):
        model = DecisionTreeClassifier(max_depth=0).fit([[0.0], [1.0]], [1, 0])
        assert model.predict([[0.5]]).tolist() == [0]

    def test_min_samples_leaf_respected(self):
        X = np.arange(8, dtype=float).reshape(-1, 1)
        y = np.array([0, 0, 0, 0, 1, 1, 1, 1])
        model = DecisionTreeClassifier(min_samples_leaf=3).fit(X, y)
        sizes = []
        stack = [model.tree_]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                sizes.append(node.n_samples)
            else:
                stack.extend([node.left, node.right])
        assert all(s >= 3 for s in sizes)

    def test_weighted_child_impurity_never_increases(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            X, y = random_problem(rng)
            model = DecisionTreeClassifier().fit(X, y)
            stack = [model.tree_]
            while stack:
                node = stack.pop()
                if node.is_leaf:
                    continue
                left, right = node.left, node.right
                weighted = (
                    left.n_samples * left.impurity + right.n_samples * right.impurity
                ) / node.n_samples
                assert weighted <= node.impurity + 1e-12
                stack.extend([left, right])

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        X, y = random_problem(rng)
        a = DecisionTreeClassifier(max_features=2, random_state=5).fit(X, y)
        b = DecisionTreeClassifier(max_features=2, random_state=5).fit(X, y)
        assert (a.predict(X) == b.predict(X)).all()


class TestRandomForest:
    def test_degenerate_forest_equals_tree(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            X, y = random_problem(rng)
            tree = DecisionTreeClassifier().fit(X, y)
            forest = RandomForestClassifier(
                n_estimators=1, bootstrap=False, max_features=None
            ).fit(X, y)
            probe = rng.random((25, X.shape[1]))
            assert (tree.predict(probe) == forest.predict(probe)).all()

    def test_forest_deterministic_per_seed(self):
        rng = np.random.default_rng(4)
        X, y = random_problem(rng)
        a = RandomForestClassifier(n_estimators=12, random_state=9).fit(X, y)
        b = RandomForestClassifier(n_estimators=12, random_state=9).fit(X, y)
        assert (a.predict(X) == b.predict(X)).all()

    def test_fits_separable_data(self):
        X = np.vstack([np.zeros((20, 2)), np.ones((20, 2))])
        y = np.repeat([0, 1], 20)
        model = RandomForestClassifier(n_estimators=15).fit(X, y)
        assert (model.predict(X) == y).all()


def xor_dual_oracle(C=10.0, gamma=1.0, steps=80):
    """Grid-search the 4-point dual problem (one variable eliminated by the
    equality constraint); lower bound on the true dual optimum."""
    y = np.where(XOR_Y == 0, 1.0, -1.0)  # class 0 versus rest
    K = rbf_kernel(XOR_X, XOR_X, gamma)
    grid = np.linspace(0.0, C, steps + 1)
    a1, a2, a3 = np.meshgrid(grid, grid, grid, indexing="ij")
    a4 = -(y[0] * a1 + y[1] * a2 + y[2] * a3) / y[3]
    valid = (a4 >= 0.0) & (a4 <= C)
    alphas = np.stack([a1, a2, a3, a4], axis=-1)[valid]
    coef = alphas * y
    objective = alphas.sum(axis=1) - 0.5 * np.einsum("ni,ij,nj->n", coef, K, coef)
    return float(objective.max())


class TestSVM:
    def test_xor_separated_and_duals_in_box(self):
        model = SVMClassifier(C=10.0, gamma=1.0).fit(XOR_X, XOR_Y)
        assert (model.predict(XOR_X) == XOR_Y).all()
        for alphas in model.alphas_:
            assert (alphas >= 0.0).all() and (alphas <= 10.0).all()

    def test_xor_duals_match_brute_force_oracle(self):
        model = SVMClassifier(C=10.0, gamma=1.0).fit(XOR_X, XOR_Y)
        oracle = xor_dual_oracle(C=10.0, gamma=1.0)
        y = np.where(XOR_Y == 0, 1.0, -1.0)
        K = rbf_kernel(XOR_X, XOR_X, 1.0)
        coef = model.alphas_[0] * y
        achieved = model.alphas_[0].sum() - 0.5 * float(coef @ K @ coef)
        assert achieved >= oracle - 0.05

    def test_duals_in_box_on_random_data(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            X, y = random_problem(rng, max_rows=40)
            model = SVMClassifier(C=1.5).fit(X, y)
            for alphas in model.alphas_:
                assert (alphas >= 0.0).all() and (alphas <= 1.5).all()

    def test_gamma_defaults_to_inverse_dimension(self):
        model = SVMClassifier().fit(np.random.default_rng(0).random((12, 4)), [0, 1] * 6)
        assert model.gamma_ == 0.25

    def test_sweep_cap_sets_convergence_flag(self):
        rng = np.random.default_rng(2)
        X = rng.random((30, 2))
        y = rng.integers(0, 2, 30)
        with pytest.warns(UserWarning):
            model = SVMClassifier(C=100.0, max_passes=1).fit(X, y)
        assert not all(model.converged_)

    def test_smo_respects_box_exactly(self):
        rng = np.random.default_rng(5)
        X = rng.random((25, 3))
        y = np.where(rng.random(25) > 0.5, 1.0, -1.0)
        K = rbf_kernel(X, X, 0.7)
        alphas, _, _ = smo_solve(K, y, 2.0, 1e-3, 250, np.random.default_rng(0))
        assert (alphas >= 0.0).all() and (alphas <= 2.0).all()

    def test_deterministic(self):
        rng = np.random.default_rng(8)
        X, y = random_problem(rng, max_rows=40)
        a = SVMClassifier(random_state=4).fit(X, y).predict(X)
        b = SVMClassifier(random_state=4).fit(X, y).predict(X)
        assert (a == b).all()


class TestContracts:
    @pytest.mark.parametrize("name", sorted(CLASSIFIERS))
    def test_empty_training_rejected(self, name):
        with pytest.raises(UsageError):
            make_classifier(name).fit(np.empty((0, 3)), [])

    @pytest.mark.parametrize("name", sorted(CLASSIFIERS))
    def test_feature_width_mismatch_rejected(self, name):
        model = make_classifier(name, {} if name != "knn" else {"n_neighbors": 1})
        model.fit([[0.0, 1.0], [1.0, 0.0]], [0, 1])
        with pytest.raises(UsageError):
            model.predict([[1.0]])

    @pytest.mark.parametrize("name", sorted(CLASSIFIERS))
    def test_unfitted_predict_rejected(self, name):
        with pytest.raises(UsageError):
            make_classifier(name).predict([[0.0]])

    @pytest.mark.parametrize("name", sorted(CLASSIFIERS))
    def test_single_class_training(self, name):
        model = make_classifier(name, {"n_neighbors": 1} if name == "knn" else {})
        model.fit([[0.0], [1.0], [2.0]], [5, 5, 5])
        assert model.predict([[0.7], [9.0]]).tolist() == [5, 5]

    @pytest.mark.parametrize("name", sorted(CLASSIFIERS))
    def test_train_time_recorded(self, name):
        model = make_classifier(name, {"n_neighbors": 1} if name == "knn" else {})
        model.fit([[0.0], [1.0]], [0, 1])
        assert model.train_time_ >= 0.0

    def test_unknown_name_rejected(self):
        with pytest.raises(UsageError):
            make_classifier("boosted-stump")

    def test_evaluate_classifier_records_test_time(self):
        model = KNeighborsClassifier(n_neighbors=1).fit([[0.0], [1.0]], [0, 1])
        metrics = evaluate_classifier(model, np.array([[0.1], [0.9]]), [0, 1], 2)
        assert metrics.accuracy == 1.0
        assert metrics.test_time >= 0.0


class TestPersistence:
    @pytest.mark.parametrize("name", sorted(CLASSIFIERS))
    def test_round_trip_preserves_predictions(self, name, tmp_path):
        rng = np.random.default_rng(13)
        X, y = random_problem(rng, max_rows=50)
        params = {"n_neighbors": 3} if name == "knn" else {}
        if name == "rf":
            params = {"n_estimators": 5}
        model = make_classifier(name, params).fit(X, y)
        path = os.fspath(tmp_path / f"{name}.json")
        save_model(model, path)
        loaded = load_model(path)
        probe = rng.random((30, X.shape[1]))
        assert (model.predict(probe) == loaded.predict(probe)).all()

    def test_unfitted_model_rejected(self, tmp_path):
        with pytest.raises(UsageError):
            save_model(KNeighborsClassifier(), os.fspath(tmp_path / "m.json"))

    def test_wrong_format_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('{"format": "something-else"}')
        with pytest.raises(UsageError):
            load_model(os.fspath(path))


def test_tree_node_leaf_flag():
    node = TreeNode(prediction=1, impurity=0.5, n_samples=4)
    assert node.is_leaf
    node.feature = 2
    assert not node.is_leaf
