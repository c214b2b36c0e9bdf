import math

import numpy as np
import pytest

from debias_clr.downstream import (
    ALL_KINDS,
    EvalReport,
    VariantData,
    balance_training_set,
    cohen_kappa,
    confusion_counts,
    evaluate,
    fit,
    mcc,
)
from debias_clr.downstream.forest import DecisionTree, RandomForest
from debias_clr.errors import DimensionMismatch, SingleClassTraining
from debias_clr.numerics import RandomStream


def brute_mcc(tp, fp, fn, tn):
    num = tp * tn - fp * fn
    den = math.sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
    return 0.0 if den == 0 else num / den


def brute_kappa(tp, fp, fn, tn):
    n = tp + fp + fn + tn
    po = (tp + tn) / n
    pe = ((tp + fn) * (tp + fp) + (tn + fp) * (tn + fn)) / n / n
    return 0.0 if pe >= 1.0 else (po - pe) / (1 - pe)


class TestMetrics:
    def test_worked_example(self):
        counts = (3, 1, 2, 4)
        assert mcc(counts) == pytest.approx(10 / math.sqrt(600), abs=1e-12)
        assert mcc(counts) == pytest.approx(0.40825, abs=1e-5)
        assert cohen_kappa(counts) == pytest.approx(0.4, abs=1e-12)

    def test_perfect_and_inverted(self):
        assert mcc((5, 0, 0, 5)) == 1.0
        assert mcc((0, 5, 5, 0)) == -1.0
        assert cohen_kappa((5, 0, 0, 5)) == 1.0

    def test_chance_level_kappa_zero(self):
        # Prediction independent of truth with matching marginals.
        assert cohen_kappa((1, 1, 1, 1)) == pytest.approx(0.0, abs=1e-12)

    def test_label_swap_invariance(self):
        for seed in range(50):
            s = RandomStream(seed)
            tp, fp, fn, tn = (int(s.uniform() * 20) + 1 for _ in range(4))
            swapped = (tn, fn, fp, tp)  # relabel both truth and prediction
            assert mcc((tp, fp, fn, tn)) == pytest.approx(mcc(swapped), abs=1e-12)
            assert cohen_kappa((tp, fp, fn, tn)) == pytest.approx(
                cohen_kappa(swapped), abs=1e-12
            )

    def test_brute_force_1000_random_matrices(self):
        s = RandomStream(99)
        for _ in range(1000):
            counts = tuple(int(s.uniform() * 50) for _ in range(4))
            if sum(counts) == 0:
                continue
            assert mcc(counts) == pytest.approx(brute_mcc(*counts), abs=1e-12)
            assert cohen_kappa(counts) == pytest.approx(brute_kappa(*counts), abs=1e-12)

    def test_confusion_counts(self):
        t = [1, 1, 0, 0, 1]
        p = [1, 0, 0, 1, 1]
        assert confusion_counts(t, p) == (2, 1, 1, 1)

    def test_majority_dummy_half_on_balanced(self):
        y = np.array([0, 1] * 50)
        pred = np.ones_like(y)
        counts = confusion_counts(y, pred)
        assert (counts[0] + counts[3]) / sum(counts) == 0.5


def blobs(seed, n=200, gap=4.0):
    s = RandomStream(seed)
    X = s.normal(n * 2).reshape(n, 2)
    y = (np.arange(n) % 2).astype(np.uint8)
    X[y == 1] += gap
    return X, y


class TestClassifiers:
    @pytest.mark.parametrize("seed", range(5))
    def test_lr_separable_blobs(self, seed):
        X, y = blobs(seed)
        model = fit("logistic_regression", X, y, stream=RandomStream(seed))
        assert np.mean(model.predict(X) == y) >= 0.99

    def test_knn_memorizes_with_k1(self):
        X, y = blobs(7, n=40, gap=0.0)
        model = fit("knn", X, y, hyper={"k": 1}, stream=RandomStream(0))
        assert np.mean(model.predict(X) == y) == 1.0

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_deterministic_given_seed(self, kind):
        X, y = blobs(3, n=80, gap=1.0)
        Q, _ = blobs(4, n=30, gap=1.0)
        a = fit(kind, X, y, stream=RandomStream(11)).predict(Q)
        b = fit(kind, X, y, stream=RandomStream(11)).predict(Q)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_better_than_chance_on_blobs(self, kind):
        X, y = blobs(5)
        Q, yq = blobs(6)
        model = fit(kind, X, y, stream=RandomStream(2))
        assert np.mean(model.predict(Q) == yq) > 0.9

    def test_single_class_rejected(self):
        X, _ = blobs(1, n=20)
        with pytest.raises(SingleClassTraining):
            fit("knn", X, np.zeros(20, dtype=int), stream=RandomStream(0))

    def test_constant_features_single_label(self):
        X, y = blobs(2, n=40)
        model = fit("logistic_regression", X, y, stream=RandomStream(0))
        Q = np.full((7, 2), 1.5)
        assert len(set(model.predict(Q).tolist())) == 1

    def test_empty_predict_rejected(self):
        X, y = blobs(2, n=40)
        model = fit("knn", X, y, stream=RandomStream(0))
        with pytest.raises(DimensionMismatch):
            model.predict(np.empty((0, 2)))

    def test_predict_row_permutation_equivariance(self):
        X, y = blobs(8, n=60)
        Q, _ = blobs(9, n=20)
        model = fit("mlp", X, y, stream=RandomStream(1))
        base = model.predict(Q)
        perm = RandomStream(3).permutation(20)
        assert np.array_equal(model.predict(Q[perm]), base[perm])

    def test_train_row_order_invariance_knn_lr(self):
        X, y = blobs(10, n=80, gap=3.0)
        Q, _ = blobs(11, n=30, gap=3.0)
        perm = RandomStream(4).permutation(80)
        for kind in ("knn", "logistic_regression"):
            a = fit(kind, X, y, stream=RandomStream(5)).predict(Q)
            b = fit(kind, X[perm], y[perm], stream=RandomStream(5)).predict(Q)
            assert np.array_equal(a, b)


class TestForest:
    def test_tree_fits_xor(self):
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] * 10)
        y = np.array([0, 1, 1, 0] * 10, dtype=np.uint8)
        tree = DecisionTree().fit(X, y, RandomStream(0))
        assert np.mean(tree.predict(X) == y) == 1.0

    def test_max_depth_limits_tree(self):
        X, y = blobs(12, n=100, gap=0.5)
        tree = DecisionTree(max_depth=1).fit(X, y, RandomStream(0))
        assert len(tree.feature) <= 3  # root plus two leaves

    def test_forest_improves_over_stump(self):
        X, y = blobs(13, n=150, gap=1.2)
        Q, yq = blobs(14, n=60, gap=1.2)
        stump = DecisionTree(max_depth=1).fit(X, y, RandomStream(1))
        forest = RandomForest(n_trees=30).fit(X, y, RandomStream(1))
        assert np.mean(forest.predict(Q) == yq) >= np.mean(stump.predict(Q) == yq)

    def test_min_samples_leaf_respected(self):
        X, y = blobs(15, n=60, gap=1.0)
        tree = DecisionTree(min_samples_leaf=10).fit(X, y, RandomStream(2))
        counts = _leaf_counts(tree, X)
        assert min(counts) >= 10


def _leaf_counts(tree, X):
    cur = np.zeros(len(X), dtype=np.int64)
    active = tree.label[cur] < 0
    while np.any(active):
        rows = np.flatnonzero(active)
        nodes = cur[rows]
        go = X[rows, tree.feature[nodes]] < tree.threshold[nodes]
        cur[rows] = np.where(go, tree.left[nodes], tree.right[nodes])
        active = tree.label[cur] < 0
    return np.bincount(cur)[np.bincount(cur) > 0]


class TestEvaluate:
    def test_identical_variants_identical_rows(self):
        X, y = blobs(20, n=120)
        Q, yq = blobs(21, n=40)
        variants = {
            "raw": VariantData(X, Q),
            "debias_clr": VariantData(X.copy(), Q.copy()),
        }
        report = evaluate(variants, y, yq, "length_of_stay", RandomStream(0),
                          kinds=("knn", "logistic_regression"))
        for kind in ("knn", "logistic_regression"):
            a = report.cell(kind, "raw")
            b = report.cell(kind, "debias_clr")
            assert (a.accuracy, a.mcc, a.kappa) == (b.accuracy, b.mcc, b.kappa)

    def test_cell_error_captured(self):
        X, y = blobs(22, n=60)
        variants = {"raw": VariantData(X, X[:, :1])}  # test dim mismatch
        report = evaluate(variants, y, y, "length_of_stay", RandomStream(0),
                          kinds=("knn",), balance=False)
        assert report.cell("knn", "raw").error is not None

    def test_balancing_applied(self):
        s = RandomStream(23)
        X = s.normal(200 * 2).reshape(200, 2)
        y = np.array([0] * 40 + [1] * 160, dtype=np.uint8)
        Xb, yb = balance_training_set(X, y, RandomStream(1))
        assert int(np.sum(yb == 0)) == int(np.sum(yb == 1)) == 160
        np.testing.assert_array_equal(Xb[:200], X)

    def test_report_round_trip(self, tmp_path):
        X, y = blobs(24, n=80)
        report = evaluate({"raw": VariantData(X, X)}, y, y, "sensitive_probe",
                          RandomStream(0), kinds=("knn",))
        path = str(tmp_path / "eval.json")
        report.save(path)
        loaded = EvalReport.load(path)
        assert loaded.to_json_dict() == report.to_json_dict()
        assert "knn" in report.to_text()

    def test_negative_kappa_flagged(self):
        # Force anti-correlated predictions via a label-inverted training set.
        X = np.array([[0.0], [1.0]] * 30)
        y_train = np.array([1, 0] * 30, dtype=np.uint8)
        y_test = np.array([0, 1] * 30, dtype=np.uint8)
        report = evaluate({"raw": VariantData(X, X)}, y_train, y_test,
                          "length_of_stay", RandomStream(0), kinds=("knn",),
                          balance=False)
        cell = report.cell("knn", "raw")
        assert cell.kappa < 0 and cell.kappa_negative
