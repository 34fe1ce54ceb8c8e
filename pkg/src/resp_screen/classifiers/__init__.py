"""The three baseline frame classifiers and their shared interface."""

import numpy as np

from ..errors import DimensionMismatch
from .balance import LabeledFrameSet, Standardizer, balanced_weights, oversample
from .forest import RfConfig, RfModel, train_rf
from .logistic import LrConfig, LrModel, train_lr
from .mlp import MlpConfig, MlpModel, train_mlp
from .persist import load_model, save_model

MODEL_KINDS = ("lr", "mlp", "rf")

__all__ = [
    "MODEL_KINDS", "LabeledFrameSet", "Standardizer", "balanced_weights", "oversample",
    "LrConfig", "LrModel", "train_lr", "MlpConfig", "MlpModel", "train_mlp",
    "RfConfig", "RfModel", "train_rf", "train_model", "predict_frames",
    "save_model", "load_model",
]


def train_model(kind, frames, seed=0, config=None, n_jobs=1):
    """Train a classifier of the given kind with its default (balanced) configuration."""
    if kind == "lr":
        return train_lr(frames, config or LrConfig())
    if kind == "mlp":
        return train_mlp(frames, seed, config or MlpConfig())
    if kind == "rf":
        return train_rf(frames, seed, config or RfConfig(), n_jobs=n_jobs)
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def predict_frames(model, features):
    """Per-frame COVID probability for a T x D feature matrix."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.n_features:
        raise DimensionMismatch(f"model expects {model.n_features} features, got shape {features.shape}")
    return np.clip(model.predict_proba(features), 0.0, 1.0)
