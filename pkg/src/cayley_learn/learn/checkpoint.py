"""Versioned JSON checkpoints of trained models."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from cayley_learn.core.errors import ConfigError
from cayley_learn.core.schema import TrainerConfig
from cayley_learn.core.storage import atomic_write
from cayley_learn.learn.encoding import FeatureEncoder
from cayley_learn.learn.linear import LinearModel
from cayley_learn.learn.mlp import MlpModel
from cayley_learn.learn.trainer import TrainedModel

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


class Checkpoint(BaseModel):
    format_version: int = Field(default=CHECKPOINT_VERSION)
    kind: Literal["linear", "mlp"]
    encoder: dict[str, Any]
    trainer: TrainerConfig
    manifest_hash: Optional[str] = Field(default=None, description="Hash of the training set manifest")
    shapes: list[list[int]] = Field(default_factory=list)
    parameters: list[list[float]] = Field(default_factory=list, description="Flattened arrays")
    loss_trace: list[float] = Field(default_factory=list)


def save_model(path: Path | str, trained: TrainedModel, manifest_hash: str | None = None) -> Path:
    model = trained.model
    if isinstance(model, LinearModel):
        arrays = [model.weights, np.array([model.bias])]
        kind = "linear"
    else:
        arrays = model.parameters()
        kind = "mlp"
    checkpoint = Checkpoint(
        kind=kind,
        encoder=trained.encoder.to_dict(),
        trainer=trained.config,
        manifest_hash=manifest_hash,
        shapes=[list(a.shape) for a in arrays],
        parameters=[np.asarray(a, dtype=np.float64).ravel().tolist() for a in arrays],
        loss_trace=list(model.loss_trace),
    )
    path = Path(path)
    atomic_write(path, checkpoint.model_dump_json(indent=2) + "\n")
    logger.info(f"Saved {kind} checkpoint to {path}")
    return path


def load_model(path: Path | str) -> TrainedModel:
    """
    Raises:
        ConfigError: for an unsupported checkpoint version
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    checkpoint = Checkpoint.model_validate(raw)
    if checkpoint.format_version != CHECKPOINT_VERSION:
        raise ConfigError(f"unsupported checkpoint version {checkpoint.format_version}")
    arrays = [np.asarray(p, dtype=np.float64).reshape(s) for p, s in zip(checkpoint.parameters, checkpoint.shapes)]
    config = checkpoint.trainer
    if checkpoint.kind == "linear":
        model = LinearModel(
            weights=arrays[0],
            bias=float(arrays[1][0]),
            lam=config.lam,
            epochs=config.epochs,
            seed=config.seed,
            loss_trace=checkpoint.loss_trace,
        )
    else:
        weights, biases = arrays[0::2], arrays[1::2]
        sizes = [weights[0].shape[0]] + [w.shape[1] for w in weights]
        model = MlpModel(
            sizes=sizes, weights=weights, biases=biases, loss=config.loss, loss_trace=checkpoint.loss_trace
        )
    return TrainedModel(model=model, encoder=FeatureEncoder(**checkpoint.encoder), config=config)
