"""Training-distribution modifications driven by example costs.

Two transforms, both applied per class so class balance is preserved:

* ``p_up_resample``: resample with replacement, picking example i with
  probability |delta_i| / sum of |delta| within its class. Keeps per-class
  sizes; zero-cost examples are never drawn.
* ``tdown_filter``: keep only the top k% of each class by |delta|
  (ties broken by original index), dropping the low-cost remainder.

Resampling uses the NumPy PCG64 generator seeded explicitly, so results are
reproducible; filtering is seed-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset

STRATEGIES = ("uniform", "p_up", "tdown")

_CLASS_ORDER = (-1, 1)


@dataclass(frozen=True)
class SamplingPlan:
    """Strategy name, top-k percentage for tdown, and the resampling seed."""

    strategy: str
    k: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.strategy == "tdown":
            if self.k is None or not (1 <= self.k <= 100):
                raise ValueError("tdown needs k in [1, 100]")
        elif self.k is not None:
            raise ValueError(f"strategy {self.strategy!r} takes no k")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "SamplingPlan":
        """Parse a strategy spelling like 'uniform', 'p_up', or 'tdown30'."""
        if text in ("uniform", "p_up"):
            return cls(strategy=text, seed=seed)
        if text.startswith("tdown"):
            try:
                k = int(text[len("tdown"):])
            except ValueError:
                raise ValueError(f"bad tdown spelling: {text!r}")
            return cls(strategy="tdown", k=k, seed=seed)
        raise ValueError(f"unknown sampling strategy: {text!r}")

    def apply(self, dataset: Dataset) -> Dataset:
        if self.strategy == "uniform":
            return uniform_passthrough(dataset)
        if self.strategy == "p_up":
            return p_up_resample(dataset, self.seed)
        return tdown_filter(dataset, self.k)


def _class_indices(dataset: Dataset):
    labels = dataset.labels
    for cls in _CLASS_ORDER:
        idx = np.flatnonzero(labels == cls)
        yield cls, idx


def p_up_resample(dataset: Dataset, seed: int) -> Dataset:
    """Cost-proportional upsampling with replacement, per class.

    Each class is resampled to its own original size, drawing example i with
    probability proportional to |delta_i| within the class. A class whose
    costs are all zero has no sampling law and is rejected.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    picks = []
    for cls, idx in _class_indices(dataset):
        if idx.size == 0:
            continue
        costs = np.abs(dataset.deltas[idx])
        support = idx[costs > 0.0]
        support_costs = costs[costs > 0.0]
        if support.size == 0:
            raise ValueError(
                f"class {cls:+d} has only zero-cost examples; "
                "cost-proportional sampling is undefined"
            )
        probs = support_costs / support_costs.sum()
        picks.append(rng.choice(support, size=idx.size, replace=True, p=probs))
    if not picks:
        raise ValueError("cannot resample an empty dataset")
    return dataset.subset(np.concatenate(picks))


def tdown_filter(dataset: Dataset, k: int) -> Dataset:
    """Keep the top ceil(k% of the class size) examples by |delta|, per class.

    Sorting is by |delta| descending with original index as the tie-break, so
    the transform is fully deterministic. k = 100 is the identity. The ceil
    keep-count means a class is never emptied.
    """
    if not (1 <= k <= 100):
        raise ValueError("k must be in [1, 100]")
    if len(dataset) == 0:
        raise ValueError("cannot filter an empty dataset")
    kept = []
    for cls, idx in _class_indices(dataset):
        if idx.size == 0:
            continue
        costs = np.abs(dataset.deltas[idx])
        order = np.lexsort((idx, -costs))
        keep_count = -(-k * idx.size // 100)
        kept.append(idx[order[:keep_count]])
    return dataset.subset(np.sort(np.concatenate(kept)))


def uniform_passthrough(dataset: Dataset) -> Dataset:
    """The unmodified training set (baseline)."""
    return dataset
