"""Feature encoding and from-scratch classifiers."""

from cayley_learn.learn.checkpoint import load_model, save_model
from cayley_learn.learn.encoding import EncodedSet, FeatureEncoder, encode
from cayley_learn.learn.linear import LinearModel, train_linear
from cayley_learn.learn.mlp import MlpModel, loss_and_gradients, train_mlp
from cayley_learn.learn.trainer import TrainedModel, fit, predict

__all__ = [
    "EncodedSet",
    "FeatureEncoder",
    "LinearModel",
    "MlpModel",
    "TrainedModel",
    "encode",
    "fit",
    "load_model",
    "loss_and_gradients",
    "predict",
    "save_model",
    "train_linear",
    "train_mlp",
]
