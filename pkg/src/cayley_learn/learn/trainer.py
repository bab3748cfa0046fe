"""Dispatch from a TrainerConfig to the linear or MLP classifier."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from cayley_learn.core.errors import DomainError
from cayley_learn.core.schema import TrainerConfig
from cayley_learn.datasets.records import Dataset
from cayley_learn.learn.encoding import EncodedSet, FeatureEncoder
from cayley_learn.learn.linear import LinearModel, train_linear
from cayley_learn.learn.mlp import MlpModel, train_mlp

logger = logging.getLogger(__name__)

Model = LinearModel | MlpModel


@dataclass
class TrainedModel:
    model: Model
    encoder: FeatureEncoder
    config: TrainerConfig

    def predict_dataset(self, dataset: Dataset, cache_bytes: int | None = None) -> np.ndarray:
        if not len(dataset):
            return np.empty(0, dtype=np.int64)
        return self.model.predict_set(EncodedSet.from_dataset(dataset, self.encoder, cache_bytes))


def encoder_for(dataset: Dataset, config: TrainerConfig) -> FeatureEncoder:
    """Encoder sized to the whole dataset, so every split shares one feature space."""
    return FeatureEncoder.for_dataset(dataset, config.encoding, config.max_symbol)


def fit(
    train: Dataset,
    config: TrainerConfig,
    encoder: FeatureEncoder | None = None,
    seed: int | None = None,
    cache_bytes: int | None = None,
) -> TrainedModel:
    """
    Train the configured classifier on a dataset.

    Args:
        seed: Overrides ``config.seed`` (used for per-repeat seeding)

    Raises:
        DomainError: for a linear model on a multiclass task
    """
    encoder = encoder or encoder_for(train, config)
    seed = config.seed if seed is None else seed
    data = EncodedSet.from_dataset(train, encoder, cache_bytes)
    if config.model == "linear":
        if train.K != 1:
            raise DomainError(f"the linear classifier is binary; task {train.task} has K={train.K}")
        model: Model = train_linear(data, lam=config.lam, epochs=config.epochs, seed=seed, project=config.project)
    else:
        model = train_mlp(
            data,
            hidden=config.hidden,
            n_classes=train.K + 1,
            epochs=config.epochs,
            learning_rate=config.learning_rate,
            momentum=config.momentum,
            batch_size=config.batch_size,
            loss=config.loss,
            seed=seed,
        )
    logger.debug(f"Trained {config.model} on {len(train)} records (dim {encoder.dim})")
    return TrainedModel(model=model, encoder=encoder, config=config)


def predict(model: Model | TrainedModel, x) -> int | np.ndarray:
    """
    Label of one feature vector, or labels of a batch in input order.

    Raises:
        ShapeError: if the feature length does not match the model
    """
    if isinstance(model, TrainedModel):
        model = model.model
    arr = np.asarray(x, dtype=np.float64)
    labels = model.predict(arr)
    return int(labels[0]) if arr.ndim == 1 else labels
