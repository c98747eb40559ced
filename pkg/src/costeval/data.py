"""Datasets: CSV ingestion, stratified splitting, and subsampling.

A Dataset is an ordered collection of (feature vector, signed cost) pairs.
CSV is the single interchange format: a header of feature columns
``f0,f1,...,f{d-1}`` followed by the schema columns that carry the raw
annotation (``n_yes,n_no`` | ``z`` | ``score`` | ``delta``). The signed cost
is derived on load by the matching cost rule.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import costs
from .costs import CostedExample, VoteCount, labels_of

COST_SOURCES = ("votes", "threshold", "rating", "rewards", "synthetic", "precomputed")
SCHEMAS = ("votes", "threshold", "rating", "precomputed_delta")

_SCHEMA_COLUMNS = {
    "votes": ("n_yes", "n_no"),
    "threshold": ("z",),
    "rating": ("score",),
    "precomputed_delta": ("delta",),
}

_SCHEMA_SOURCE = {
    "votes": "votes",
    "threshold": "threshold",
    "rating": "rating",
    "precomputed_delta": "precomputed",
}


class Dataset:
    """Ordered examples with uniform feature dimension and finite signed costs."""

    def __init__(
        self,
        features: np.ndarray,
        deltas: np.ndarray,
        cost_source: str = "precomputed",
        name: str = "dataset",
    ) -> None:
        features = np.asarray(features, dtype=float)
        deltas = np.asarray(deltas, dtype=float)
        if features.ndim != 2:
            raise ValueError("features must be a 2-d (n, d) array")
        if deltas.ndim != 1 or deltas.shape[0] != features.shape[0]:
            raise ValueError("deltas must be a 1-d array aligned with features")
        if not np.all(np.isfinite(features)):
            raise ValueError("features must be finite")
        if not np.all(np.isfinite(deltas)):
            raise ValueError("deltas must be finite")
        if cost_source not in COST_SOURCES:
            raise ValueError(f"cost_source must be one of {COST_SOURCES}")
        self.features = features
        self.deltas = deltas
        self.cost_source = cost_source
        self.name = name
        self._labels: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def labels(self) -> np.ndarray:
        """Per-example labels sign(delta), with 0 mapping to +1. Cached."""
        if self._labels is None:
            self._labels = labels_of(self.deltas)
        return self._labels

    @property
    def class_counts(self) -> dict[int, int]:
        labels = self.labels
        return {
            -1: int(np.count_nonzero(labels == -1)),
            1: int(np.count_nonzero(labels == 1)),
        }

    def __getitem__(self, i: int) -> CostedExample:
        return CostedExample(features=self.features[i], delta=float(self.deltas[i]))

    def examples(self):
        for i in range(len(self)):
            yield self[i]

    def subset(self, indices) -> "Dataset":
        """New Dataset holding the given rows, in the given order."""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[indices],
            deltas=self.deltas[indices],
            cost_source=self.cost_source,
            name=self.name,
        )


@dataclass(frozen=True)
class SplitSpec:
    """Train/validation/test fractions, shuffle seed, and stratification flag."""

    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0
    stratify_on_sign: bool = True

    def __post_init__(self) -> None:
        if len(self.fractions) != 3 or any(f <= 0 for f in self.fractions):
            raise ValueError("fractions must be three positive numbers")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ValueError("fractions must sum to 1")


def largest_remainder(total: int, fractions) -> list[int]:
    """Integer allocation of ``total`` by fractions, exact in sum.

    Floors the quotas, then hands leftover units to the largest fractional
    remainders; remainder ties break toward the earlier bucket.
    """
    quotas = [f * total for f in fractions]
    base = [int(math.floor(q)) for q in quotas]
    leftover = total - sum(base)
    remainders = sorted(
        range(len(fractions)), key=lambda j: (-(quotas[j] - base[j]), j)
    )
    for j in remainders[:leftover]:
        base[j] += 1
    return base


def _parse_float(text: str, path: str, line_no: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"{path}:{line_no}: column '{column}': not a number: {text!r}")
    if not math.isfinite(value):
        raise ValueError(f"{path}:{line_no}: column '{column}': non-finite value")
    return value


def _parse_count(text: str, path: str, line_no: int, column: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ValueError(
            f"{path}:{line_no}: column '{column}': not an integer count: {text!r}"
        )
    if value < 0:
        raise ValueError(f"{path}:{line_no}: column '{column}': negative count")
    return value


def load_csv(
    path,
    schema: str,
    *,
    tau: float | None = None,
    midpoint: float | None = None,
    orientation: str | None = None,
    name: str | None = None,
) -> Dataset:
    """Load a dataset from CSV, deriving the signed cost per the schema.

    The header must read ``f0,...,f{d-1}`` followed by the schema columns.
    Schema parameters: ``tau`` for threshold, ``midpoint`` and ``orientation``
    for rating. Errors carry the 1-based line number of the offending row.
    """
    if schema not in SCHEMAS:
        raise ValueError(f"schema must be one of {SCHEMAS}")
    if schema == "threshold" and tau is None:
        raise ValueError("threshold schema needs tau")
    if schema == "rating" and (midpoint is None or orientation is None):
        raise ValueError("rating schema needs midpoint and orientation")
    path = Path(path)
    display = str(path)

    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{display}:1: empty file, header row required")
        tail = _SCHEMA_COLUMNS[schema]
        d = len(header) - len(tail)
        if d < 1:
            raise ValueError(f"{display}:1: header has no feature columns")
        expected = [f"f{i}" for i in range(d)] + list(tail)
        if header != expected:
            raise ValueError(
                f"{display}:1: header mismatch for schema '{schema}': "
                f"expected {','.join(expected)}, got {','.join(header)}"
            )

        feature_rows: list[list[float]] = []
        deltas: list[float] = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"{display}:{line_no}: expected {len(header)} columns, got {len(row)}"
                )
            feats = [
                _parse_float(row[j], display, line_no, header[j]) for j in range(d)
            ]
            if schema == "votes":
                yes = _parse_count(row[d], display, line_no, "n_yes")
                no = _parse_count(row[d + 1], display, line_no, "n_no")
                delta = costs.votes_to_delta(VoteCount(yes=yes, no=no))
            elif schema == "threshold":
                z = _parse_float(row[d], display, line_no, "z")
                delta = costs.threshold_to_delta(z, tau)
            elif schema == "rating":
                score = _parse_float(row[d], display, line_no, "score")
                try:
                    delta = costs.rating_to_delta(score, midpoint, orientation)
                except ValueError as exc:
                    raise ValueError(f"{display}:{line_no}: {exc}")
            else:
                delta = _parse_float(row[d], display, line_no, "delta")
            feature_rows.append(feats)
            deltas.append(delta)

    if not feature_rows:
        raise ValueError(f"{display}: no data rows")
    return Dataset(
        features=np.asarray(feature_rows, dtype=float),
        deltas=np.asarray(deltas, dtype=float),
        cost_source=_SCHEMA_SOURCE[schema],
        name=name if name is not None else path.stem,
    )


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset in the precomputed-delta schema.

    Values use shortest round-trip decimal formatting, so a reload reproduces
    features and costs bit-for-bit.
    """
    path = Path(path)
    header = [f"f{i}" for i in range(dataset.dim)] + ["delta"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(len(dataset)):
            cells = [repr(float(v)) for v in dataset.features[i]]
            cells.append(repr(float(dataset.deltas[i])))
            fh.write(",".join(cells) + "\n")


def _allocate_split(n: int, spec: SplitSpec, what: str) -> list[int]:
    counts = largest_remainder(n, spec.fractions)
    if any(c == 0 for c in counts):
        raise ValueError(
            f"{what} has {n} examples: too few to populate train/validation/test "
            f"at fractions {spec.fractions}"
        )
    return counts

def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Partition into (train, validation, test), stratified on the cost sign.

    Within each class the indices are shuffled by the seeded generator and cut
    at the cumulative fractions, sizes fixed by largest-remainder rounding, so
    per-class proportions sit within one example of the targets. Each split
    keeps original row order. Deterministic given the seed.
    """
    if len(dataset) == 0:
        raise ValueError("cannot split an empty dataset")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    groups: list[np.ndarray]
    if spec.stratify_on_sign:
        labels = dataset.labels
        groups = [np.flatnonzero(labels == cls) for cls in (-1, 1)]
        groups = [g for g in groups if g.size > 0]
    else:
        groups = [np.arange(len(dataset))]

    parts: list[list[np.ndarray]] = [[], [], []]
    for group in groups:
        what = "dataset" if len(groups) == 1 else f"class {dataset.labels[group[0]]:+d}"
        counts = _allocate_split(group.size, spec, what)
        shuffled = rng.permutation(group)
        start = 0
        for j, count in enumerate(counts):
            parts[j].append(shuffled[start : start + count])
            start += count

    picks = [np.sort(np.concatenate(p)) for p in parts]
    return tuple(dataset.subset(p) for p in picks)


def subsample_train(train: Dataset, n_target: int, seed: int) -> Dataset:
    """Stratified uniform subsample without replacement of size ``n_target``.

    Per-class counts follow largest-remainder proportional allocation; row
    order is preserved. Deterministic given the seed; the full-size case
    returns the identical example sequence.
    """
    if n_target < 1:
        raise ValueError("n_target must be >= 1")
    if n_target > len(train):
        raise ValueError(f"n_target {n_target} exceeds train size {len(train)}")
    labels = train.labels
    groups = [np.flatnonzero(labels == cls) for cls in (-1, 1)]
    groups = [g for g in groups if g.size > 0]
    fractions = [g.size / len(train) for g in groups]
    counts = largest_remainder(n_target, fractions)
    rng = np.random.Generator(np.random.PCG64(seed))
    picks = []
    for group, count in zip(groups, counts):
        if count > group.size:
            raise ValueError("allocation exceeded class size")
        chosen = rng.choice(group, size=count, replace=False)
        picks.append(chosen)
    return train.subset(np.sort(np.concatenate(picks)))
