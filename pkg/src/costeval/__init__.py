"""Instance-level cost-sensitive classifier evaluation and training."""

__version__ = "0.1.0"

from .costs import (
    CostedExample,
    RewardPair,
    VoteCount,
    label_of,
    rating_to_delta,
    rewards_to_delta,
    threshold_to_delta,
    votes_to_delta,
)
from .data import Dataset, SplitSpec, load_csv, save_csv, split, subsample_train
from .learners import (
    LinearModel,
    Standardizer,
    TrainConfig,
    fit_delta_regression,
    fit_logistic,
    loss_and_gradient,
    predict,
    predict_class,
)
from .metrics import (
    AggregateReport,
    MeanCI,
    MetricReport,
    Predictions,
    aggregate,
    delta_histogram,
    delta_mae,
    error_rate,
    evaluate,
    mean_ci,
    nec,
)
from .sampling import SamplingPlan, p_up_resample, tdown_filter, uniform_passthrough
from .synthetic import SyntheticConfig, generate

__all__ = [
    "AggregateReport",
    "CostedExample",
    "Dataset",
    "LinearModel",
    "MeanCI",
    "MetricReport",
    "Predictions",
    "RewardPair",
    "SamplingPlan",
    "SplitSpec",
    "Standardizer",
    "SyntheticConfig",
    "TrainConfig",
    "VoteCount",
    "aggregate",
    "delta_histogram",
    "delta_mae",
    "error_rate",
    "evaluate",
    "fit_delta_regression",
    "fit_logistic",
    "generate",
    "label_of",
    "load_csv",
    "loss_and_gradient",
    "mean_ci",
    "nec",
    "p_up_resample",
    "predict",
    "predict_class",
    "rating_to_delta",
    "rewards_to_delta",
    "save_csv",
    "split",
    "subsample_train",
    "tdown_filter",
    "threshold_to_delta",
    "uniform_passthrough",
    "votes_to_delta",
]
