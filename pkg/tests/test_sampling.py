import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costeval.data import Dataset
from costeval.sampling import (
    SamplingPlan,
    p_up_resample,
    tdown_filter,
    uniform_passthrough,
)


def make_dataset(deltas):
    deltas = np.asarray(deltas, dtype=float)
    # unique feature values so resampled rows can be traced back
    features = np.arange(len(deltas), dtype=float).reshape(-1, 1)
    return Dataset(features, deltas)


class TestPUp:
    def test_equal_costs_uniform_and_size_preserved(self):
        ds = make_dataset([1.0, 1.0, -1.0, -1.0])
        out = p_up_resample(ds, seed=0)
        assert len(out) == 4
        assert out.class_counts == ds.class_counts

    def test_draw_frequencies_proportional_to_cost(self):
        # one class with costs 3:1 -> example 0 drawn 75% of the time
        ds = make_dataset([3.0, 1.0, -1.0])
        counts = np.zeros(3)
        draws = 0
        for seed in range(100):
            out = p_up_resample(ds, seed=seed)
            pos_rows = out.features[out.deltas > 0, 0].astype(int)
            for row in pos_rows:
                counts[row] += 1
            draws += len(pos_rows)
        assert draws == 200
        freq = counts[0] / draws
        assert abs(freq - 0.75) < 0.1

    def test_zero_cost_examples_never_drawn(self):
        ds = make_dataset([2.0, 0.0, -1.0, -3.0])
        for seed in range(50):
            out = p_up_resample(ds, seed=seed)
            assert 1.0 not in out.features[:, 0]

    def test_class_balance_preserved_exactly(self):
        rng = np.random.Generator(np.random.PCG64(1))
        deltas = np.concatenate([rng.uniform(0.1, 2, 30), -rng.uniform(0.1, 2, 70)])
        ds = make_dataset(deltas)
        out = p_up_resample(ds, seed=5)
        assert out.class_counts == ds.class_counts

    def test_all_zero_class_rejected(self):
        ds = make_dataset([0.0, 0.0, -1.0])
        with pytest.raises(ValueError, match="zero-cost"):
            p_up_resample(ds, seed=0)

    def test_same_seed_same_multiset(self):
        rng = np.random.Generator(np.random.PCG64(2))
        ds = make_dataset(rng.standard_normal(50))
        a = p_up_resample(ds, seed=9)
        b = p_up_resample(ds, seed=9)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.deltas, b.deltas)


class TestTdown:
    def test_distinct_costs_keep_top_k(self):
        deltas = [float(v) for v in range(1, 11)]
        ds = make_dataset(deltas)
        out = tdown_filter(ds, 30)
        assert sorted(out.deltas) == [8.0, 9.0, 10.0]

    def test_ties_at_cutoff(self):
        ds = make_dataset([5.0, 5.0, 1.0, 1.0])
        out = tdown_filter(ds, 50)
        assert sorted(out.deltas) == [5.0, 5.0]

    def test_tie_break_by_original_index(self):
        ds = make_dataset([2.0, 2.0, 2.0, 2.0])
        out = tdown_filter(ds, 50)
        assert list(out.features[:, 0]) == [0.0, 1.0]

    def test_k_100_is_identity(self):
        rng = np.random.Generator(np.random.PCG64(3))
        ds = make_dataset(rng.standard_normal(37))
        out = tdown_filter(ds, 100)
        assert np.array_equal(out.features, ds.features)
        assert np.array_equal(out.deltas, ds.deltas)

    def test_tiny_class_keeps_one(self):
        ds = make_dataset([4.0, -1.0, -2.0, -3.0])
        out = tdown_filter(ds, 30)
        assert (out.deltas > 0).sum() == 1

    def test_per_class_counts_are_ceil(self):
        deltas = list(range(1, 8)) + [-v for v in range(1, 11)]
        ds = make_dataset([float(v) for v in deltas])
        out = tdown_filter(ds, 30)
        counts = out.class_counts
        assert counts[1] == 3  # ceil(0.3 * 7)
        assert counts[-1] == 3  # ceil(0.3 * 10)

    def test_single_class_dataset_filtered_within_class(self):
        ds = make_dataset([1.0, 2.0])
        out = tdown_filter(ds, 50)
        assert list(out.deltas) == [2.0]

    def test_empty_dataset_rejected(self):
        ds = Dataset(np.zeros((0, 1)), np.zeros(0))
        with pytest.raises(ValueError, match="empty"):
            tdown_filter(ds, 50)

    def test_bad_k_rejected(self):
        ds = make_dataset([1.0, -1.0])
        for k in (0, 101):
            with pytest.raises(ValueError):
                tdown_filter(ds, k)

    @settings(max_examples=60)
    @given(
        deltas=st.lists(
            st.floats(min_value=-10, max_value=10, allow_nan=False),
            min_size=2,
            max_size=40,
        ),
        k1=st.integers(1, 100),
        k2=st.integers(1, 100),
    )
    def test_monotone_in_k(self, deltas, k1, k2):
        if not (any(d >= 0 for d in deltas) and any(d < 0 for d in deltas)):
            deltas = deltas + [1.0, -1.0]
        ds = make_dataset(deltas)
        k1, k2 = min(k1, k2), max(k1, k2)
        small = set(tdown_filter(ds, k1).features[:, 0])
        large = set(tdown_filter(ds, k2).features[:, 0])
        assert small <= large

    @settings(max_examples=60)
    @given(
        deltas=st.lists(
            st.floats(min_value=-10, max_value=10, allow_nan=False),
            min_size=2,
            max_size=40,
        ),
        k=st.integers(1, 99),
    )
    def test_min_kept_not_below_max_dropped(self, deltas, k):
        if not (any(d >= 0 for d in deltas) and any(d < 0 for d in deltas)):
            deltas = deltas + [1.0, -1.0]
        ds = make_dataset(deltas)
        out = tdown_filter(ds, k)
        kept_rows = set(out.features[:, 0].astype(int))
        for cls in (-1, 1):
            in_class = np.flatnonzero(ds.labels == cls)
            kept = [i for i in in_class if i in kept_rows]
            dropped = [i for i in in_class if i not in kept_rows]
            if kept and dropped:
                assert min(abs(ds.deltas[i]) for i in kept) >= max(
                    abs(ds.deltas[i]) for i in dropped
                )


class TestPassthrough:
    def test_identity(self):
        ds = make_dataset([1.0, -2.0, 0.5])
        assert uniform_passthrough(ds) is ds

    def test_empty_dataset(self):
        ds = Dataset(np.zeros((0, 1)), np.zeros(0))
        assert uniform_passthrough(ds) is ds

    def test_singleton(self):
        ds = make_dataset([1.0])
        assert uniform_passthrough(ds) is ds


class TestSamplingPlan:
    def test_parse_spellings(self):
        assert SamplingPlan.parse("uniform").strategy == "uniform"
        assert SamplingPlan.parse("p_up", seed=3).seed == 3
        plan = SamplingPlan.parse("tdown30")
        assert (plan.strategy, plan.k) == ("tdown", 30)

    def test_bad_spellings(self):
        for text in ("tdownx", "tdown0", "tdown101", "upsample"):
            with pytest.raises(ValueError):
                SamplingPlan.parse(text)

    def test_apply_dispatch(self):
        ds = make_dataset([3.0, 1.0, -1.0, -2.0])
        assert SamplingPlan.parse("uniform").apply(ds) is ds
        assert len(SamplingPlan.parse("p_up", seed=1).apply(ds)) == 4
        assert len(SamplingPlan.parse("tdown50").apply(ds)) == 2
