"""
Linear max-margin classifier trained by stochastic subgradient descent.

Minimises lam/2 |w|^2 + mean hinge loss with step 1/(lam t). The bias is
folded into w through a constant feature, so it is regularised too.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from cayley_learn.core.errors import DomainError, ShapeError
from cayley_learn.learn.encoding import EncodedSet

logger = logging.getLogger(__name__)


@dataclass
class LinearModel:
    """
    Attributes:
        weights: One weight per feature
        bias: Offset of the decision function
        lam: Regularisation strength used in training
        epochs: Passes over the training set
        seed: Shuffling seed
        loss_trace: Objective value after each epoch
    """

    weights: np.ndarray
    bias: float
    lam: float = 1e-4
    epochs: int = 10
    seed: int = 0
    loss_trace: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.dim:
            raise ShapeError(f"feature length {X.shape[1]} does not match model dimension {self.dim}")
        return X @ self.weights + self.bias

    def predict(self, X) -> np.ndarray:
        """Labels in {0, 1}; a zero score maps to 0."""
        return (self.decision_function(X) > 0).astype(np.int64)

    def predict_set(self, data: EncodedSet) -> np.ndarray:
        out = np.empty(len(data), dtype=np.int64)
        for idx, X in data.chunks():
            out[idx] = self.predict(X)
        return out


def _objective(w: np.ndarray, data: EncodedSet, signs: np.ndarray, lam: float) -> float:
    hinge = 0.0
    for idx, X in data.chunks():
        margins = signs[idx] * (X @ w[:-1] + w[-1])
        hinge += float(np.maximum(0.0, 1.0 - margins).sum())
    return lam / 2 * float(w @ w) + hinge / len(data)


def train_linear(data: EncodedSet, lam: float = 1e-4, epochs: int = 10, seed: int = 0, project: bool = True) -> LinearModel:
    """
    Fit a linear classifier to binary labels.

    Args:
        data: Encoded training set with labels in {0, 1}
        lam: Regularisation strength
        epochs: Passes over the data, each in a fresh random order
        seed: Seed of the visiting order
        project: Project w onto the ball of radius 1/sqrt(lam) after each step

    Raises:
        DomainError: for an empty set or labels outside {0, 1}
    """
    if len(data) == 0:
        raise DomainError("cannot train on an empty set")
    if not np.isin(data.y, (0, 1)).all():
        raise DomainError("linear classifier needs binary labels")

    present = np.unique(data.y)
    if present.size == 1:
        label = int(present[0])
        logger.warning(f"Training set holds only label {label}; returning a constant classifier")
        return LinearModel(
            weights=np.zeros(data.dim), bias=1.0 if label else -1.0, lam=lam, epochs=epochs, seed=seed
        )

    signs = np.where(data.y == 1, 1.0, -1.0)
    rng = np.random.default_rng(seed)
    w = np.zeros(data.dim + 1)
    radius = 1.0 / np.sqrt(lam)
    trace = []
    t = 0
    for epoch in range(epochs):
        order = rng.permutation(len(data))
        for idx, X in data.chunks(order):
            for i, x in zip(idx, X):
                t += 1
                eta = 1.0 / (lam * t)
                margin = signs[i] * (x @ w[:-1] + w[-1])
                w *= 1.0 - eta * lam
                if margin < 1.0:
                    w[:-1] += eta * signs[i] * x
                    w[-1] += eta * signs[i]
                if project:
                    norm = np.linalg.norm(w)
                    if norm > radius:
                        w *= radius / norm
        trace.append(_objective(w, data, signs, lam))
        logger.debug(f"linear epoch {epoch + 1}/{epochs}: objective {trace[-1]:.6f}")

    return LinearModel(weights=w[:-1].copy(), bias=float(w[-1]), lam=lam, epochs=epochs, seed=seed, loss_trace=trace)
