"""
Confusion matrices and the scores derived from them.

Counts are indexed [predicted][actual]. Scores that are undefined for a
matrix (a zero marginal, an empty positive class) are returned as None.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from cayley_learn.core.errors import DomainError, ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    K: int
    counts: np.ndarray

    def __post_init__(self):
        if self.counts.shape != (self.K + 1, self.K + 1):
            raise ShapeError(f"counts must be {(self.K + 1, self.K + 1)}, got {self.counts.shape}")
        if (self.counts < 0).any():
            raise DomainError("confusion counts must be non-negative")

    @classmethod
    def from_counts(cls, counts) -> ConfusionMatrix:
        arr = np.asarray(counts, dtype=np.int64)
        return cls(K=arr.shape[0] - 1, counts=arr)

    @classmethod
    def binary(cls, tp: int, fp: int, fn: int, tn: int) -> ConfusionMatrix:
        return cls.from_counts([[tn, fn], [fp, tp]])

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def _require_binary(self) -> None:
        if self.K != 1:
            raise DomainError(f"binary score needs K=1, got K={self.K}")

    @property
    def tp(self) -> int:
        self._require_binary()
        return int(self.counts[1, 1])

    @property
    def fp(self) -> int:
        self._require_binary()
        return int(self.counts[1, 0])

    @property
    def fn(self) -> int:
        self._require_binary()
        return int(self.counts[0, 1])

    @property
    def tn(self) -> int:
        self._require_binary()
        return int(self.counts[0, 0])

    def predicted_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def actual_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def confusion(pred, actual, K: int) -> ConfusionMatrix:
    """
    Raises:
        ShapeError: if the label lists differ in length
        DomainError: for a label outside 0..K
    """
    pred = np.asarray(pred, dtype=np.int64).ravel()
    actual = np.asarray(actual, dtype=np.int64).ravel()
    if pred.shape != actual.shape:
        raise ShapeError(f"{pred.shape[0]} predictions for {actual.shape[0]} labels")
    for name, labels in (("predicted", pred), ("actual", actual)):
        if labels.size and (labels.min() < 0 or labels.max() > K):
            raise DomainError(f"{name} label outside 0..{K}")
    counts = np.zeros((K + 1, K + 1), dtype=np.int64)
    np.add.at(counts, (pred, actual), 1)
    return ConfusionMatrix(K=K, counts=counts)


def accuracy(cm: ConfusionMatrix) -> float:
    """
    Raises:
        DomainError: for an empty matrix
    """
    if cm.n == 0:
        raise DomainError("accuracy of an empty confusion matrix")
    return float(np.trace(cm.counts)) / cm.n


def phi_binary(cm: ConfusionMatrix) -> float | None:
    """Matthews correlation of a 2x2 matrix; None when a marginal is zero."""
    tp, fp, fn, tn = cm.tp, cm.fp, cm.fn, cm.tn
    product = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if product == 0:
        return None
    return (tp * tn - fp * fn) / math.sqrt(product)


def phi_multiclass(cm: ConfusionMatrix) -> float | None:
    """
    Multiclass correlation (c s - sum p_k t_k) / sqrt((s^2 - sum p_k^2)(s^2 - sum t_k^2)).

    c is the trace, s the total, p and t the predicted and actual marginals.
    Equals phi_binary on 2x2 matrices.
    """
    c = int(np.trace(cm.counts))
    s = cm.n
    p = cm.predicted_totals().astype(object)
    t = cm.actual_totals().astype(object)
    left = s * s - int(np.dot(p, p))
    right = s * s - int(np.dot(t, t))
    if left == 0 or right == 0:
        return None
    return (c * s - int(np.dot(p, t))) / math.sqrt(left * right)


def f1(cm: ConfusionMatrix) -> float | None:
    """2TP / (2TP + FP + FN); None when TP + FP + FN = 0."""
    tp, fp, fn = cm.tp, cm.fp, cm.fn
    if tp + fp + fn == 0:
        return None
    return 2 * tp / (2 * tp + fp + fn)


def chi_squared(cm: ConfusionMatrix) -> float:
    """Pearson chi-squared of the matrix against independent marginals."""
    n = cm.n
    if n == 0:
        raise DomainError("chi-squared of an empty confusion matrix")
    observed = cm.counts.astype(np.float64)
    expected = np.outer(cm.predicted_totals(), cm.actual_totals()) / n
    mask = expected > 0
    return float((((observed - expected) ** 2)[mask] / expected[mask]).sum())


def predicted_one_fraction(pred) -> float | None:
    pred = np.asarray(pred)
    if pred.size == 0:
        return None
    return float((pred == 1).mean())


def score(pred, actual, K: int) -> dict[str, float | None]:
    """accuracy, phi, f1 and predicted_one for one run; phi is multiclass when K > 1."""
    cm = confusion(pred, actual, K)
    if cm.n == 0:
        return {"accuracy": None, "phi": None, "f1": None, "predicted_one": None}
    binary = K == 1
    phi = phi_binary(cm) if binary else phi_multiclass(cm)
    if phi is None:
        logger.warning(f"phi is undefined for confusion counts {cm.counts.tolist()}")
    return {
        "accuracy": accuracy(cm),
        "phi": phi,
        "f1": f1(cm) if binary else None,
        "predicted_one": predicted_one_fraction(pred),
    }
