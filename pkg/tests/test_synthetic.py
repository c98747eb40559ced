import numpy as np
import pytest

from costeval.data import Dataset
from costeval.learners import TrainConfig, fit_delta_regression
from costeval.metrics import Predictions, nec
from costeval.synthetic import SyntheticConfig, generate


class TestConfig:
    def test_defaults_valid(self):
        cfg = SyntheticConfig()
        assert cfg.n == 10000 and cfg.dim == 10

    def test_bad_values_rejected(self):
        with pytest.raises(ValueError):
            SyntheticConfig(n=0)
        with pytest.raises(ValueError):
            SyntheticConfig(dim=0)
        with pytest.raises(ValueError):
            SyntheticConfig(weight_norm=0.0)
        with pytest.raises(ValueError):
            SyntheticConfig(noise_sigma=-0.1)


class TestGenerate:
    def test_deterministic_bit_identical(self):
        cfg = SyntheticConfig(n=500, seed=77)
        a, wa = generate(cfg)
        b, wb = generate(cfg)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.deltas, b.deltas)
        assert np.array_equal(wa, wb)

    def test_different_seeds_differ(self):
        a, _ = generate(SyntheticConfig(n=100, seed=1))
        b, _ = generate(SyntheticConfig(n=100, seed=2))
        assert not np.array_equal(a.deltas, b.deltas)

    def test_true_weight_norm(self):
        _, w = generate(SyntheticConfig(n=10, dim=7, weight_norm=2.5, seed=3))
        assert np.linalg.norm(w) == pytest.approx(2.5, rel=1e-12)

    def test_noiseless_costs_exactly_linear(self):
        ds, w = generate(SyntheticConfig(n=300, dim=4, noise_sigma=0.0, seed=4))
        assert np.array_equal(ds.deltas, ds.features @ w)
        model = fit_delta_regression(ds, TrainConfig(l2_lambda=0.0))
        assert np.abs(model.weights - w).max() < 1e-4
        assert abs(model.bias) < 1e-4

    def test_variance_decomposition(self):
        cfg = SyntheticConfig(n=100000, dim=10, weight_norm=1.0, noise_sigma=0.5, seed=5)
        ds, _ = generate(cfg)
        # Var(w.x) = ||w||^2 = 1 for isotropic unit features, plus sigma^2
        assert ds.deltas.var() == pytest.approx(1.25, rel=0.03)

    def test_label_balance(self):
        ds, _ = generate(SyntheticConfig(n=100000, seed=6))
        positive = ds.class_counts[1] / len(ds)
        assert abs(positive - 0.5) < 0.01

    def test_cost_source_tag(self):
        ds, _ = generate(SyntheticConfig(n=10, seed=0))
        assert ds.cost_source == "synthetic"

    def test_true_weights_beat_perturbed_policy(self):
        # sanity ordering: the generating direction scores lower nec than
        # a randomly nudged one, on average over nudges
        ds, w = generate(SyntheticConfig(n=50000, seed=8))
        rng = np.random.Generator(np.random.PCG64(9))

        def policy_nec(direction):
            labels = np.where(ds.features @ direction >= 0, 1, -1)
            return nec(ds, Predictions(labels))

        base = policy_nec(w)
        worse = 0
        trials = 20
        for _ in range(trials):
            nudge = rng.standard_normal(ds.dim)
            nudge *= 0.1 * np.linalg.norm(w) / np.linalg.norm(nudge)
            if policy_nec(w + nudge) >= base:
                worse += 1
        assert worse >= trials - 2
