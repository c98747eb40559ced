"""Deterministic linear learners.

Two objectives over a linear score z = w.x + b:

* logistic: weighted binary cross-entropy on the cost-sign labels,
  sum_i a_i * log(1 + exp(-y_i z_i)) + (lambda/2) ||w||^2
* linear: squared error against the signed cost itself,
  sum_i a_i * (z_i - delta_i)^2 + (lambda/2) ||w||^2

Both are minimized by full-batch gradient descent from zero initialization
with a halving backtracking rule: reproducible, no stochastic minibatching,
bit-identical models for identical inputs. The bias is never penalized.

When ``weight_normalization`` is on (default) the whole objective is rescaled
by 1/mean(example weights): weights end up with mean one and the L2 strength
is divided by the same factor. This is a pure rescaling, so the minimizer is
unchanged, and training becomes exactly invariant to the overall scale of the
example weights (scaling all weights and the L2 strength by c > 0 reproduces
the unscaled trajectory bit-for-bit).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .data import Dataset

MODEL_KINDS = ("logistic", "linear")

_MIN_STEP = 1e-20


@dataclass(frozen=True)
class TrainConfig:
    l2_lambda: float = 1.0
    learning_rate: float = 1.0
    max_iters: int = 5000
    grad_tol: float = 1e-6
    weight_normalization: bool = True

    def __post_init__(self) -> None:
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be > 0")


@dataclass(frozen=True)
class LinearModel:
    """Weight vector plus bias; ``kind`` selects the prediction rule."""

    weights: np.ndarray
    bias: float
    kind: str

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 1:
            raise ValueError("weights must be a 1-d vector")
        if not (np.all(np.isfinite(weights)) and np.isfinite(self.bias)):
            raise ValueError("model parameters must be finite")
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"kind must be one of {MODEL_KINDS}")
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])

    def to_text(self) -> str:
        lines = [
            "linear_model v1",
            f"kind {self.kind}",
            f"dim {self.dim}",
            f"bias {float(self.bias)!r}",
            "weights " + " ".join(repr(float(w)) for w in self.weights),
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "LinearModel":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != "linear_model v1":
            raise ValueError("not a linear_model v1 record")
        fields = {}
        for ln in lines[1:]:
            key, _, rest = ln.partition(" ")
            fields[key] = rest
        kind = fields["kind"]
        dim = int(fields["dim"])
        bias = float(fields["bias"])
        weights = np.array([float(t) for t in fields["weights"].split()], dtype=float)
        if weights.shape[0] != dim:
            raise ValueError("weight count does not match recorded dimension")
        return cls(weights=weights, bias=bias, kind=kind)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "LinearModel":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def _scores(model: LinearModel, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[1] != model.dim:
        raise ValueError(
            f"features must be (n, {model.dim}), got {features.shape}"
        )
    return features @ model.weights + model.bias


def predict(model: LinearModel, features: np.ndarray):
    """Batch predictions: (labels in {-1,+1}, continuous scores).

    The label thresholds the linear score at zero (boundary counts as +1),
    which for the logistic kind is exactly the probability >= 0.5 rule. Scores
    are class probabilities for the logistic kind and signed-cost estimates
    for the linear kind.
    """
    z = _scores(model, features)
    labels = np.where(z >= 0.0, 1, -1).astype(np.int64)
    scores = expit(z) if model.kind == "logistic" else z
    return labels, scores


def predict_class(model: LinearModel, features) -> tuple[int, float]:
    """Single-example prediction: (label, score)."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 1:
        raise ValueError("features must be a 1-d vector")
    labels, scores = predict(model, features[None, :])
    return int(labels[0]), float(scores[0])


def _objective(
    theta: np.ndarray,
    features: np.ndarray,
    targets: np.ndarray,
    weights: np.ndarray,
    l2_lambda: float,
    kind: str,
):
    """Objective value and gradient at packed parameters [w..., b]."""
    w = theta[:-1]
    b = theta[-1]
    z = features @ w + b
    if kind == "logistic":
        margins = targets * z
        loss = float(np.sum(weights * np.logaddexp(0.0, -margins)))
        dz = weights * (-targets) * expit(-margins)
    else:
        residuals = z - targets
        loss = float(np.sum(weights * residuals * residuals))
        dz = 2.0 * weights * residuals
    loss += 0.5 * l2_lambda * float(w @ w)
    grad = np.empty_like(theta)
    grad[:-1] = features.T @ dz + l2_lambda * w
    grad[-1] = float(np.sum(dz))
    return loss, grad


def loss_and_gradient(
    model: LinearModel,
    dataset: Dataset,
    example_weights: np.ndarray,
    l2_lambda: float,
):
    """Exact objective and gradient at the model's parameters.

    The gradient is packed as [d/dw_0 ... d/dw_{d-1}, d/db]. No weight
    normalization is applied here; values follow the raw summed objective.
    """
    example_weights = _check_weights(example_weights, len(dataset))
    if l2_lambda < 0:
        raise ValueError("l2_lambda must be >= 0")
    if dataset.dim != model.dim:
        raise ValueError("model dimension does not match dataset")
    targets = (
        dataset.labels.astype(float) if model.kind == "logistic" else dataset.deltas
    )
    theta = np.concatenate([model.weights, [model.bias]])
    return _objective(
        theta, dataset.features, targets, example_weights, l2_lambda, model.kind
    )


def _check_weights(example_weights, n: int) -> np.ndarray:
    weights = np.asarray(example_weights, dtype=float)
    if weights.shape != (n,):
        raise ValueError(f"example_weights must have shape ({n},)")
    if not np.all(np.isfinite(weights)):
        raise ValueError("example_weights must be finite")
    if np.any(weights < 0):
        raise ValueError("example_weights must be >= 0")
    return weights


def _fit(
    features: np.ndarray,
    targets: np.ndarray,
    weights: np.ndarray,
    cfg: TrainConfig,
    kind: str,
) -> LinearModel:
    l2_lambda = cfg.l2_lambda
    if cfg.weight_normalization:
        mean_weight = float(np.mean(weights))
        if mean_weight <= 0:
            raise ValueError("example weights must not all be zero")
        weights = weights / mean_weight
        l2_lambda = l2_lambda / mean_weight

    theta = np.zeros(features.shape[1] + 1)
    step = cfg.learning_rate
    loss, grad = _objective(theta, features, targets, weights, l2_lambda, kind)
    for _ in range(cfg.max_iters):
        if float(np.max(np.abs(grad))) < cfg.grad_tol:
            break
        while True:
            candidate = theta - step * grad
            cand_loss, cand_grad = _objective(
                candidate, features, targets, weights, l2_lambda, kind
            )
            if cand_loss <= loss:
                theta, loss, grad = candidate, cand_loss, cand_grad
                break
            step *= 0.5
            if step < _MIN_STEP:
                break
        if step < _MIN_STEP:
            break

    model = LinearModel(weights=theta[:-1].copy(), bias=float(theta[-1]), kind=kind)
    return model


def fit_logistic(
    dataset: Dataset, example_weights: np.ndarray, cfg: TrainConfig
) -> LinearModel:
    """Weighted logistic regression on the cost-sign labels.

    Uniform weights give standard cross-entropy training; weights |delta_i|
    give cost-weighted training. Requires a positively weighted example of
    each class.
    """
    weights = _check_weights(example_weights, len(dataset))
    labels = dataset.labels
    for cls in (-1, 1):
        if not np.any((labels == cls) & (weights > 0)):
            raise ValueError(
                f"class {cls:+d} has no positively weighted example; "
                "cannot fit a classifier"
            )
    return _fit(dataset.features, labels.astype(float), weights, cfg, "logistic")


def fit_delta_regression(dataset: Dataset, cfg: TrainConfig) -> LinearModel:
    """Least-squares regression of the signed cost; classify by its sign."""
    if len(dataset) == 0:
        raise ValueError("cannot fit on an empty dataset")
    weights = np.ones(len(dataset))
    return _fit(dataset.features, dataset.deltas, weights, cfg, "linear")


class Standardizer:
    """Per-feature (x - mean) / std transform, statistics from one dataset.

    Fit on the training split only, then apply to every split. Constant
    features get scale 1 so they pass through centered.
    """

    def __init__(self) -> None:
        self.mean_: np.ndarray | None = None
        self.scale_: np.ndarray | None = None

    def fit(self, dataset: Dataset) -> "Standardizer":
        self.mean_ = dataset.features.mean(axis=0)
        scale = dataset.features.std(axis=0)
        scale[scale == 0.0] = 1.0
        self.scale_ = scale
        return self

    def transform(self, dataset: Dataset) -> Dataset:
        if self.mean_ is None:
            raise ValueError("standardizer not fitted")
        return Dataset(
            features=(dataset.features - self.mean_) / self.scale_,
            deltas=dataset.deltas,
            cost_source=dataset.cost_source,
            name=dataset.name,
        )
