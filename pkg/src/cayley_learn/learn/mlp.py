"""
Feed-forward network: fully connected layers with elementwise sigmoid, then
a softmax output over K + 1 classes.

The default loss is the mean squared error between softmax outputs and
one-hot targets; cross-entropy is available. Training is mini-batch gradient
descent with momentum and backpropagation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from cayley_learn.core.errors import DomainError, ShapeError
from cayley_learn.learn.encoding import EncodedSet

logger = logging.getLogger(__name__)

Loss = Literal["mse", "cross-entropy"]


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class MlpModel:
    """
    Attributes:
        sizes: Layer widths from input to output
        weights: weights[l] has shape (sizes[l], sizes[l+1])
        biases: biases[l] has shape (sizes[l+1],)
        loss: Training loss
        loss_trace: Mean training loss after each epoch
    """

    sizes: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    loss: Loss = "mse"
    loss_trace: list[float] = field(default_factory=list)

    def __post_init__(self):
        if len(self.sizes) < 2:
            raise ShapeError("a network needs at least an input and an output layer")
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape != (self.sizes[l], self.sizes[l + 1]) or b.shape != (self.sizes[l + 1],):
                raise ShapeError(f"layer {l} has weights {W.shape} / bias {b.shape}, sizes {self.sizes}")

    @classmethod
    def initialise(cls, sizes: list[int], seed: int, loss: Loss = "mse") -> MlpModel:
        """Weights uniform in +-1/sqrt(fan_in), biases zero."""
        rng = np.random.default_rng(seed)
        weights = []
        biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(sizes=list(sizes), weights=weights, biases=biases, loss=loss)

    @property
    def n_classes(self) -> int:
        return self.sizes[-1]

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.sizes[0]:
            raise ShapeError(f"feature length {X.shape[1]} does not match input layer {self.sizes[0]}")
        return X

    def forward(self, X) -> list[np.ndarray]:
        """Activations of every layer, input first and softmax output last."""
        activations = [self._check(X)]
        last = len(self.weights) - 1
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = activations[-1] @ W + b
            activations.append(softmax(z) if l == last else sigmoid(z))
        return activations

    def predict_proba(self, X) -> np.ndarray:
        return self.forward(X)[-1]

    def predict(self, X) -> np.ndarray:
        """Argmax class; ties go to the lower label."""
        return np.argmax(self.predict_proba(X), axis=1).astype(np.int64)

    def predict_set(self, data: EncodedSet) -> np.ndarray:
        out = np.empty(len(data), dtype=np.int64)
        for idx, X in data.chunks():
            out[idx] = self.predict(X)
        return out

    def parameters(self) -> list[np.ndarray]:
        return [p for pair in zip(self.weights, self.biases) for p in pair]


def loss_and_gradients(model: MlpModel, X, y) -> tuple[float, list[np.ndarray]]:
    """
    Mean loss over the batch and its gradient for every parameter.

    Gradients are returned in the order of ``model.parameters()``.
    """
    activations = model.forward(X)
    p = activations[-1]
    batch = p.shape[0]
    y = np.asarray(y, dtype=np.int64)
    target = np.zeros_like(p)
    target[np.arange(batch), y] = 1.0

    if model.loss == "mse":
        diff = p - target
        loss = float((diff**2).sum() / batch)
        g = 2.0 * diff / batch
        delta = p * (g - (g * p).sum(axis=1, keepdims=True))
    else:
        loss = float(-np.log(np.clip(p[np.arange(batch), y], 1e-300, None)).sum() / batch)
        delta = (p - target) / batch

    grads: list[np.ndarray] = []
    for l in range(len(model.weights) - 1, -1, -1):
        a_prev = activations[l]
        grads.append(delta.sum(axis=0))
        grads.append(a_prev.T @ delta)
        if l > 0:
            delta = (delta @ model.weights[l].T) * a_prev * (1.0 - a_prev)
    grads.reverse()
    return loss, grads


def train_mlp(
    data: EncodedSet,
    hidden: list[int],
    n_classes: int,
    epochs: int = 10,
    learning_rate: float = 0.5,
    momentum: float = 0.9,
    batch_size: int = 32,
    loss: Loss = "mse",
    seed: int = 0,
) -> MlpModel:
    """
    Fit a network to labels in 0..n_classes-1.

    Raises:
        DomainError: for fewer than two classes, an empty set or a bad label
        ShapeError: for a hidden layer of width < 1
    """
    if n_classes < 2:
        raise DomainError("a classifier needs at least two classes")
    if len(data) == 0:
        raise DomainError("cannot train on an empty set")
    if any(h < 1 for h in hidden):
        raise ShapeError(f"hidden layer sizes must be >= 1, got {hidden}")
    if data.y.min() < 0 or data.y.max() >= n_classes:
        raise DomainError(f"labels must lie in 0..{n_classes - 1}")

    model = MlpModel.initialise([data.dim, *hidden, n_classes], seed=seed, loss=loss)
    params = model.parameters()
    velocity = [np.zeros_like(p) for p in params]
    rng = np.random.default_rng([seed, 1])

    for epoch in range(epochs):
        order = rng.permutation(len(data))
        total = 0.0
        for idx, X in data.chunks(order, size=batch_size):
            batch_loss, grads = loss_and_gradients(model, X, data.y[idx])
            total += batch_loss * len(idx)
            for p, v, g in zip(params, velocity, grads):
                v *= momentum
                v -= learning_rate * g
                p += v
        model.loss_trace.append(total / len(data))
        if (epoch + 1) % max(1, epochs // 10) == 0:
            logger.debug(f"mlp epoch {epoch + 1}/{epochs}: loss {model.loss_trace[-1]:.6f}")
    return model
