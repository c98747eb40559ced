import math

import numpy as np
import pytest

from costeval.data import Dataset
from costeval.learners import (
    LinearModel,
    Standardizer,
    TrainConfig,
    fit_delta_regression,
    fit_logistic,
    loss_and_gradient,
    predict,
    predict_class,
)


def ridge_solution(X, y, lam):
    """Closed-form minimizer of sum (w.x + b - y)^2 + (lam/2)||w||^2."""
    n, d = X.shape
    A = np.hstack([X, np.ones((n, 1))])
    penalty = np.eye(d + 1)
    penalty[d, d] = 0.0
    return np.linalg.solve(2.0 * A.T @ A + lam * penalty, 2.0 * A.T @ y)


def params(model):
    return np.concatenate([model.weights, [model.bias]])


def random_problem(rng, n=30, d=3, noise=0.3):
    X = rng.standard_normal((n, d))
    w = rng.standard_normal(d)
    deltas = X @ w + noise * rng.standard_normal(n)
    return Dataset(X, deltas), w


class TestLossAndGradient:
    def test_zero_model_logistic_loss_is_log2_per_example(self):
        rng = np.random.Generator(np.random.PCG64(0))
        ds, _ = random_problem(rng, n=40)
        model = LinearModel(np.zeros(ds.dim), 0.0, "logistic")
        loss, _ = loss_and_gradient(model, ds, np.ones(40), 0.0)
        assert loss == pytest.approx(40 * math.log(2), rel=1e-12)

    def test_penalty_only_gradient(self):
        rng = np.random.Generator(np.random.PCG64(1))
        ds, _ = random_problem(rng, n=10)
        w = rng.standard_normal(ds.dim)
        model = LinearModel(w, 0.5, "logistic")
        lam = 2.5
        loss, grad = loss_and_gradient(model, ds, np.zeros(10), lam)
        assert np.array_equal(grad[:-1], lam * w)
        assert grad[-1] == 0.0
        assert loss == pytest.approx(0.5 * lam * float(w @ w))

    @pytest.mark.parametrize("kind", ["logistic", "linear"])
    def test_gradient_matches_central_differences(self, kind):
        rng = np.random.Generator(np.random.PCG64(42))
        h = 1e-5
        for _ in range(50):
            n, d = 10, 4
            ds, _ = random_problem(rng, n=n, d=d, noise=0.5)
            theta = rng.standard_normal(d + 1)
            weights = rng.uniform(0.1, 2.0, size=n)
            lam = float(rng.uniform(0.0, 2.0))
            model = LinearModel(theta[:d], float(theta[d]), kind)
            _, grad = loss_and_gradient(model, ds, weights, lam)
            for j in range(d + 1):
                up = theta.copy()
                up[j] += h
                down = theta.copy()
                down[j] -= h
                loss_up, _ = loss_and_gradient(
                    LinearModel(up[:d], float(up[d]), kind), ds, weights, lam
                )
                loss_down, _ = loss_and_gradient(
                    LinearModel(down[:d], float(down[d]), kind), ds, weights, lam
                )
                fd = (loss_up - loss_down) / (2 * h)
                rel = abs(grad[j] - fd) / max(1.0, abs(grad[j]), abs(fd))
                assert rel < 1e-5

    def test_weight_length_checked(self):
        rng = np.random.Generator(np.random.PCG64(2))
        ds, _ = random_problem(rng, n=10)
        model = LinearModel(np.zeros(ds.dim), 0.0, "logistic")
        with pytest.raises(ValueError):
            loss_and_gradient(model, ds, np.ones(9), 1.0)


class TestFitLogistic:
    def test_separable_two_points(self):
        ds = Dataset(np.array([[1.0], [-1.0]]), np.array([1.0, -1.0]))
        model = fit_logistic(ds, np.ones(2), TrainConfig(l2_lambda=0.5))
        assert model.weights[0] > 0
        assert abs(model.bias) < 1e-8
        labels, _ = predict(model, ds.features)
        assert np.array_equal(labels, [1, -1])

    def test_weight_and_lambda_scaling_identity(self):
        # all weights c with lambda scaled by c is the unweighted problem
        # bit for bit (c a power of two keeps the normalization exact)
        rng = np.random.Generator(np.random.PCG64(3))
        ds, _ = random_problem(rng, n=50)
        base = fit_logistic(ds, np.ones(50), TrainConfig(l2_lambda=0.8))
        scaled = fit_logistic(
            ds, np.full(50, 4.0), TrainConfig(l2_lambda=0.8 * 4.0)
        )
        assert np.array_equal(base.weights, scaled.weights)
        assert base.bias == scaled.bias

    def test_unit_weights_reproduce_standard_training(self):
        rng = np.random.Generator(np.random.PCG64(4))
        ds, _ = random_problem(rng, n=40)
        cfg = TrainConfig()
        a = fit_logistic(ds, np.ones(40), cfg)
        b = fit_logistic(ds, np.ones(40), TrainConfig(weight_normalization=False))
        assert np.array_equal(a.weights, b.weights)
        assert a.bias == b.bias

    def test_label_invariance_under_weight_scaling(self):
        rng = np.random.Generator(np.random.PCG64(5))
        ds, _ = random_problem(rng, n=60)
        weights = rng.uniform(0.2, 3.0, size=60)
        cfg = TrainConfig(l2_lambda=1.0)
        base = fit_logistic(ds, weights, cfg)
        scaled = fit_logistic(ds, 3.0 * weights, TrainConfig(l2_lambda=3.0))
        labels_a, _ = predict(base, ds.features)
        labels_b, _ = predict(scaled, ds.features)
        assert np.array_equal(labels_a, labels_b)

    def test_matches_fine_grid_on_tiny_problem(self):
        # independent second opinion: dense grid refinement over (w, b)
        rng = np.random.Generator(np.random.PCG64(6))
        X = rng.standard_normal((20, 1))
        deltas = np.sign(X[:, 0]) * rng.uniform(0.5, 2.0, size=20)
        ds = Dataset(X, deltas)
        cfg = TrainConfig(l2_lambda=1.0)
        model = fit_logistic(ds, np.ones(20), cfg)

        def objective(w, b):
            z = X[:, 0] * w + b
            margins = ds.labels * z
            return float(np.sum(np.logaddexp(0.0, -margins)) + 0.5 * 1.0 * w * w)

        w_grid = np.linspace(-5, 5, 201)
        b_grid = np.linspace(-5, 5, 201)
        best = min((objective(w, b), w, b) for w in w_grid for b in b_grid)
        span = 0.1
        for _ in range(6):
            _, w0, b0 = best
            w_grid = np.linspace(w0 - span, w0 + span, 41)
            b_grid = np.linspace(b0 - span, b0 + span, 41)
            best = min((objective(w, b), w, b) for w in w_grid for b in b_grid)
            span /= 10.0
        got = objective(model.weights[0], model.bias)
        assert got <= best[0] + 1e-4

    def test_determinism_bit_identical(self):
        rng = np.random.Generator(np.random.PCG64(7))
        ds, _ = random_problem(rng, n=30)
        weights = rng.uniform(0.1, 2.0, size=30)
        a = fit_logistic(ds, weights, TrainConfig())
        b = fit_logistic(ds, weights, TrainConfig())
        assert np.array_equal(a.weights, b.weights)
        assert a.bias == b.bias

    def test_single_class_rejected(self):
        ds = Dataset(np.ones((4, 1)), np.array([1.0, 2.0, 3.0, 4.0]))
        with pytest.raises(ValueError, match="class"):
            fit_logistic(ds, np.ones(4), TrainConfig())

    def test_class_with_zero_weight_rejected(self):
        ds = Dataset(np.ones((4, 1)), np.array([1.0, 2.0, -3.0, -4.0]))
        weights = np.array([1.0, 1.0, 0.0, 0.0])
        with pytest.raises(ValueError, match="class"):
            fit_logistic(ds, weights, TrainConfig())

    def test_negative_weights_rejected(self):
        ds = Dataset(np.ones((2, 1)), np.array([1.0, -1.0]))
        with pytest.raises(ValueError):
            fit_logistic(ds, np.array([1.0, -1.0]), TrainConfig())

    def test_parameters_finite(self):
        rng = np.random.Generator(np.random.PCG64(8))
        ds, _ = random_problem(rng, n=50, noise=0.0)
        model = fit_logistic(ds, np.ones(50), TrainConfig(l2_lambda=0.0))
        assert np.all(np.isfinite(model.weights)) and math.isfinite(model.bias)


class TestFitDeltaRegression:
    def test_noiseless_recovery(self):
        rng = np.random.Generator(np.random.PCG64(9))
        X = rng.standard_normal((80, 4))
        w = np.array([1.5, -0.5, 0.25, 2.0])
        ds = Dataset(X, X @ w)
        model = fit_delta_regression(ds, TrainConfig(l2_lambda=0.0))
        assert np.abs(model.weights - w).max() < 1e-4
        assert abs(model.bias) < 1e-4

    def test_matches_ridge_normal_equations(self):
        rng = np.random.Generator(np.random.PCG64(10))
        for _ in range(10):
            d = int(rng.integers(1, 6))
            ds, _ = random_problem(rng, n=50, d=d, noise=0.4)
            lam = 1.0
            model = fit_delta_regression(ds, TrainConfig(l2_lambda=lam))
            expected = ridge_solution(ds.features, ds.deltas, lam)
            assert np.abs(params(model) - expected).max() < 1e-4

    def test_constant_target_gives_intercept_only(self):
        rng = np.random.Generator(np.random.PCG64(11))
        X = rng.standard_normal((40, 3))
        ds = Dataset(X, np.full(40, 1.7))
        model = fit_delta_regression(ds, TrainConfig(l2_lambda=0.0))
        assert np.abs(model.weights).max() < 1e-6
        assert model.bias == pytest.approx(1.7, abs=1e-6)

    def test_empty_rejected(self):
        ds = Dataset(np.zeros((0, 2)), np.zeros(0))
        with pytest.raises(ValueError):
            fit_delta_regression(ds, TrainConfig())


class TestPredict:
    def test_boundary_is_positive(self):
        model = LinearModel(np.array([1.0]), 0.0, "logistic")
        label, score = predict_class(model, np.array([0.0]))
        assert label == 1
        assert score == 0.5

    def test_logistic_score_is_probability(self):
        model = LinearModel(np.array([2.0]), 0.0, "logistic")
        label, score = predict_class(model, np.array([1.1]))
        assert label == 1
        assert 0.5 < score < 1.0

    def test_linear_negative_score(self):
        model = LinearModel(np.array([1.0]), 0.0, "linear")
        label, score = predict_class(model, np.array([-0.2]))
        assert label == -1
        assert score == pytest.approx(-0.2)

    def test_dimension_mismatch_rejected(self):
        model = LinearModel(np.array([1.0, 2.0]), 0.0, "linear")
        with pytest.raises(ValueError):
            predict(model, np.zeros((3, 3)))


class TestSerialization:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.Generator(np.random.PCG64(12))
        model = LinearModel(rng.standard_normal(5), float(rng.standard_normal()), "linear")
        path = tmp_path / "model.txt"
        model.save(path)
        loaded = LinearModel.load(path)
        assert loaded.kind == model.kind
        assert np.array_equal(loaded.weights, model.weights)
        assert loaded.bias == model.bias

    def test_bad_record_rejected(self):
        with pytest.raises(ValueError):
            LinearModel.from_text("something else\n")


class TestStandardizer:
    def test_train_statistics_applied_everywhere(self):
        rng = np.random.Generator(np.random.PCG64(13))
        train = Dataset(rng.standard_normal((50, 2)) * 4 + 2, rng.standard_normal(50))
        test = Dataset(rng.standard_normal((20, 2)) * 4 + 2, rng.standard_normal(20))
        std = Standardizer().fit(train)
        t_train = std.transform(train)
        t_test = std.transform(test)
        assert np.abs(t_train.features.mean(axis=0)).max() < 1e-12
        assert np.abs(t_train.features.std(axis=0) - 1).max() < 1e-12
        # test split is shifted by the same statistics, not its own
        assert not np.allclose(t_test.features.mean(axis=0), 0.0, atol=1e-3)

    def test_constant_feature_passes_through(self):
        train = Dataset(np.ones((10, 1)), np.ones(10))
        std = Standardizer().fit(train)
        out = std.transform(train)
        assert np.all(out.features == 0.0)

    def test_unfitted_rejected(self):
        with pytest.raises(ValueError):
            Standardizer().transform(Dataset(np.ones((2, 1)), np.ones(2)))
