"""Signed per-example misclassification costs.

Every example carries a signed cost ``delta``: the sign is the binary label
(+1 / -1) and the magnitude is the cost of misclassifying that example.
This module holds the cost type and the rules that derive delta from raw
annotation data: multi-annotator vote counts, distance to a decision
threshold, centered confidence ratings, and explicit reward pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ORIENTATIONS = ("midpoint_minus_score", "score_minus_midpoint")


@dataclass(frozen=True)
class VoteCount:
    """Yes/no annotator vote tallies for one example."""

    yes: int
    no: int

    def __post_init__(self) -> None:
        for name in ("yes", "no"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise ValueError(f"vote count '{name}' must be an integer, got {v!r}")
            if v < 0:
                raise ValueError(f"vote count '{name}' must be >= 0, got {v}")


@dataclass(frozen=True)
class RewardPair:
    """Rewards of the two actions: ``reward_neg`` for -1, ``reward_pos`` for +1."""

    reward_neg: float
    reward_pos: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.reward_neg) and math.isfinite(self.reward_pos)):
            raise ValueError("rewards must be finite")


@dataclass(frozen=True)
class CostedExample:
    """A feature vector paired with its signed cost."""

    features: np.ndarray
    delta: float

    def __post_init__(self) -> None:
        feats = np.asarray(self.features, dtype=float)
        if feats.ndim != 1:
            raise ValueError("features must be a 1-d vector")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features must be finite")
        if not math.isfinite(self.delta):
            raise ValueError("delta must be finite")
        object.__setattr__(self, "features", feats)

    @property
    def label(self) -> int:
        return label_of(self.delta)


def votes_to_delta(votes: VoteCount) -> float:
    """Smoothed log-odds of the yes vote: ln((yes+1)/(no+1)).

    The add-one smoothing keeps the value finite under unanimous votes.
    Computed as log1p(yes) - log1p(no) so swapping yes and no flips the sign
    exactly, not just up to rounding.
    """
    return math.log1p(votes.yes) - math.log1p(votes.no)


def threshold_to_delta(z: float, tau: float) -> float:
    """Signed distance of a continuous measurement from its decision threshold."""
    if not (math.isfinite(z) and math.isfinite(tau)):
        raise ValueError("measurement and threshold must be finite")
    return z - tau


def rating_to_delta(
    score: float,
    midpoint: float,
    orientation: str,
    scale_min: float | None = None,
    scale_max: float | None = None,
) -> float:
    """Signed cost from a single confidence rating, centered on the scale midpoint.

    ``orientation`` selects which end of the scale is the positive class:
    ``"midpoint_minus_score"`` gives midpoint - score, ``"score_minus_midpoint"``
    the opposite. The scale bounds default to a 1-based odd-point scale
    (1 .. 2*midpoint - 1); pass them explicitly for any other scale.
    """
    if orientation not in ORIENTATIONS:
        raise ValueError(
            f"orientation must be one of {ORIENTATIONS}, got {orientation!r}"
        )
    if not (math.isfinite(score) and math.isfinite(midpoint)):
        raise ValueError("score and midpoint must be finite")
    if (scale_min is None) != (scale_max is None):
        raise ValueError("pass both scale bounds or neither")
    if scale_min is None:
        if midpoint <= 1:
            raise ValueError(
                "cannot infer scale bounds for midpoint <= 1; pass them explicitly"
            )
        scale_min, scale_max = 1.0, 2.0 * midpoint - 1.0
    if scale_min >= scale_max:
        raise ValueError("scale_min must be < scale_max")
    if abs(midpoint - (scale_min + scale_max) / 2.0) > 1e-9:
        raise ValueError(
            f"midpoint {midpoint} is not the midpoint of [{scale_min}, {scale_max}]"
        )
    if not (scale_min <= score <= scale_max):
        raise ValueError(f"score {score} outside scale [{scale_min}, {scale_max}]")
    if orientation == "midpoint_minus_score":
        return midpoint - score
    return score - midpoint


def rewards_to_delta(rewards: RewardPair) -> float:
    """Reward difference between the +1 and -1 actions."""
    return rewards.reward_pos - rewards.reward_neg


def label_of(delta: float) -> int:
    """Binary label carried by a signed cost: +1 when delta >= 0, else -1.

    Zero cost maps to +1, matching the sign-threshold inference rule used by
    the regression learner; such examples carry zero metric weight either way.
    """
    if not math.isfinite(delta):
        raise ValueError("delta must be finite")
    return 1 if delta >= 0 else -1


def labels_of(deltas: np.ndarray) -> np.ndarray:
    """Vectorized ``label_of`` over an array of signed costs."""
    deltas = np.asarray(deltas, dtype=float)
    if not np.all(np.isfinite(deltas)):
        raise ValueError("deltas must be finite")
    return np.where(deltas >= 0.0, 1, -1).astype(np.int64)
