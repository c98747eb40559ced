"""Evaluation metrics for cost-sensitive binary classification.

Two headline numbers are computed for every evaluation:

* normalized excess cost (NEC): cost-weighted error with the per-example
  costs normalized to mean one,

      nec = sum(|delta_i| * wrong_i) / sum(|delta_i|)

* error rate: the plain fraction of wrong labels.

Their ratio (error rate / nec) exceeds 1 whenever mistakes concentrate on
low-cost examples. Both metrics live in [0, 1]: 0 for a perfect predictor,
0.5 in expectation for a coin flip, 1 for a perfectly inverted one. When all
costs share one magnitude, nec equals error rate exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .costs import labels_of
from .data import Dataset

SCORE_KINDS = ("probability", "delta")


@dataclass(frozen=True)
class Predictions:
    """Per-example label decisions, optionally with continuous scores.

    ``score_kind`` says how to read ``scores``: ``"probability"`` for
    class-probability estimates, ``"delta"`` for signed-cost estimates.
    """

    labels: np.ndarray
    scores: np.ndarray | None = None
    score_kind: str | None = None

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be a 1-d vector")
        if not np.all(np.isin(labels, (-1, 1))):
            raise ValueError("labels must be -1 or +1")
        object.__setattr__(self, "labels", labels)
        if self.scores is not None:
            scores = np.asarray(self.scores, dtype=float)
            if scores.shape != labels.shape:
                raise ValueError("scores must align with labels")
            if not np.all(np.isfinite(scores)):
                raise ValueError("scores must be finite")
            if self.score_kind not in SCORE_KINDS:
                raise ValueError(f"score_kind must be one of {SCORE_KINDS}")
            if self.score_kind == "probability" and (
                scores.min() < 0.0 or scores.max() > 1.0
            ):
                raise ValueError("probability scores must lie in [0, 1]")
            object.__setattr__(self, "scores", scores)
        elif self.score_kind is not None:
            raise ValueError("score_kind given without scores")

    def __len__(self) -> int:
        return int(self.labels.shape[0])


@dataclass(frozen=True)
class MetricReport:
    """Metrics of one evaluation. ``ratio`` is None when nec is 0."""

    nec: float
    error_rate: float
    ratio: float | None
    delta_mae: float | None
    n: int


@dataclass(frozen=True)
class MeanCI:
    """Sample mean with a 95% Student-t confidence half-width."""

    mean: float
    half_width: float


@dataclass(frozen=True)
class AggregateReport:
    """Per-metric mean +- CI over seeds; ``ratio`` is the ratio of means."""

    nec: MeanCI
    error_rate: MeanCI
    ratio: float | None
    delta_mae: MeanCI | None
    n_seeds: int


def _check_alignment(dataset: Dataset, preds: Predictions) -> None:
    if len(preds) != len(dataset):
        raise ValueError(
            f"predictions cover {len(preds)} examples, dataset has {len(dataset)}"
        )


def nec(dataset: Dataset, preds: Predictions) -> float:
    """Normalized excess cost of the predictions on the dataset.

    Zero-cost examples contribute to neither sum. Raises on a degenerate
    dataset whose costs are all zero. Costs are pre-divided by their maximum
    before summing; the ratio is unchanged mathematically, and a dataset-wide
    cost rescaling then cannot shift the value through rounding.
    """
    _check_alignment(dataset, preds)
    abs_costs = np.abs(dataset.deltas)
    top = float(abs_costs.max(initial=0.0))
    if top <= 0.0:
        raise ValueError("nec undefined: all costs are zero")
    scaled = abs_costs / top
    total = float(np.sum(scaled))
    wrong = preds.labels != dataset.labels
    return float(np.sum(scaled[wrong]) / total)


def error_rate(dataset: Dataset, preds: Predictions) -> float:
    """Fraction of examples whose predicted label differs from the cost sign."""
    if len(dataset) == 0:
        raise ValueError("error rate undefined on an empty dataset")
    _check_alignment(dataset, preds)
    wrong = preds.labels != dataset.labels
    return float(np.count_nonzero(wrong) / len(dataset))


def delta_mae(dataset: Dataset, preds: Predictions) -> float:
    """Mean absolute error of predicted signed costs against true ones."""
    _check_alignment(dataset, preds)
    if preds.scores is None or preds.score_kind != "delta":
        raise ValueError("delta_mae needs predictions with delta scores")
    return float(np.mean(np.abs(preds.scores - dataset.deltas)))


def evaluate(dataset: Dataset, preds: Predictions) -> MetricReport:
    """Full metric report; includes delta MAE when delta scores are present."""
    nec_value = nec(dataset, preds)
    err = error_rate(dataset, preds)
    ratio = err / nec_value if nec_value > 0.0 else None
    mae = None
    if preds.scores is not None and preds.score_kind == "delta":
        mae = delta_mae(dataset, preds)
    return MetricReport(
        nec=nec_value, error_rate=err, ratio=ratio, delta_mae=mae, n=len(dataset)
    )


def mean_ci(values, confidence: float = 0.95) -> MeanCI:
    """Mean with Student-t confidence half-width (needs >= 2 values).

    The t quantile with n-1 degrees of freedom is used rather than the
    normal 1.96 because seed counts are small.
    """
    arr = np.asarray(list(values), dtype=float)
    if arr.size < 2:
        raise ValueError("need at least 2 values for a confidence interval")
    if not np.all(np.isfinite(arr)):
        raise ValueError("values must be finite")
    if np.all(arr == arr[0]):
        return MeanCI(mean=float(arr[0]), half_width=0.0)
    n = arr.size
    sd = float(np.std(arr, ddof=1))
    quantile = float(stats.t.ppf(0.5 + confidence / 2.0, df=n - 1))
    return MeanCI(mean=float(np.mean(arr)), half_width=quantile * sd / math.sqrt(n))


def aggregate(reports) -> AggregateReport:
    """Aggregate per-seed reports into mean +- 95% CI per metric.

    The ratio column is the ratio of the metric means (undefined when the
    mean nec is zero). Delta MAE is aggregated only when every report has it.
    """
    reports = list(reports)
    if len(reports) < 2:
        raise ValueError("need at least 2 reports to aggregate")
    nec_ci = mean_ci(r.nec for r in reports)
    err_ci = mean_ci(r.error_rate for r in reports)
    ratio = err_ci.mean / nec_ci.mean if nec_ci.mean > 0.0 else None
    mae_ci = None
    if all(r.delta_mae is not None for r in reports):
        mae_ci = mean_ci(r.delta_mae for r in reports)
    return AggregateReport(
        nec=nec_ci,
        error_rate=err_ci,
        ratio=ratio,
        delta_mae=mae_ci,
        n_seeds=len(reports),
    )


def delta_histogram(dataset: Dataset, bins: int) -> list[tuple[float, float, int]]:
    """Equal-width histogram of the signed costs.

    Bins span [min delta, max delta]; the last bin includes its upper edge, so
    counts always sum to n. A zero-width range (all costs equal) is widened by
    a nominal 0.5 on each side.
    """
    if len(dataset) == 0:
        raise ValueError("histogram undefined on an empty dataset")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    deltas = dataset.deltas
    lo = float(deltas.min())
    hi = float(deltas.max())
    if lo == hi:
        lo -= 0.5
        hi += 0.5
    counts, edges = np.histogram(deltas, bins=bins, range=(lo, hi))
    return [
        (float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(bins)
    ]
