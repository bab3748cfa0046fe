"""Confusion-matrix scores and learning curves."""

from cayley_learn.metrics.confusion import (
    ConfusionMatrix,
    accuracy,
    chi_squared,
    confusion,
    f1,
    phi_binary,
    phi_multiclass,
    score,
)
from cayley_learn.metrics.curves import (
    CurveResult,
    LearningCurvePoint,
    aggregate,
    fixed_split_trials,
    gammas_from_sizes,
    learning_curve,
)

__all__ = [
    "ConfusionMatrix",
    "CurveResult",
    "LearningCurvePoint",
    "accuracy",
    "aggregate",
    "chi_squared",
    "confusion",
    "f1",
    "fixed_split_trials",
    "gammas_from_sizes",
    "learning_curve",
    "phi_binary",
    "phi_multiclass",
    "score",
]
