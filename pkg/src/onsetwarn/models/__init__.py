"""The three forecaster families and their shared training utilities."""
from __future__ import annotations

import numpy as np

from onsetwarn.models.gbdt import Binner, GBDTConfig, GBDTModel, Tree, train_gbdt
from onsetwarn.models.io import load_model, save_model
from onsetwarn.models.losses import (
    compute_pos_weight,
    sigmoid,
    weighted_bce,
    weighted_bce_grad,
)
from onsetwarn.models.lstm import LSTMConfig, LSTMModel
from onsetwarn.models.tcn import TCNConfig, TCNModel
from onsetwarn.models.training import AdamW, EpochRecord, TrainConfig, evaluate_logits, train_neural


def predict_scores(model, X: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Risk scores in (0, 1): sigmoid of the model's logits, input order kept."""
    if isinstance(model, GBDTModel):
        return model.predict_scores(X)
    return sigmoid(evaluate_logits(model, np.asarray(X, dtype=np.float64), batch_size))


__all__ = [
    "AdamW",
    "Binner",
    "EpochRecord",
    "GBDTConfig",
    "GBDTModel",
    "LSTMConfig",
    "LSTMModel",
    "TCNConfig",
    "TCNModel",
    "TrainConfig",
    "Tree",
    "compute_pos_weight",
    "evaluate_logits",
    "load_model",
    "predict_scores",
    "save_model",
    "sigmoid",
    "train_gbdt",
    "train_neural",
    "weighted_bce",
    "weighted_bce_grad",
]
