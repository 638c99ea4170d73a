"""Mini-batch training for the neural forecasters.

AdamW-style decoupled weight decay, global gradient-norm clipping, and
early stopping on validation performance with best-epoch weight restore.
Deterministic for a fixed seed: one generator drives shuffling and dropout.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from onsetwarn.errors import DegenerateLabelsError, NonFiniteLossError
from onsetwarn.models.losses import sigmoid, weighted_bce, weighted_bce_grad

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    max_epochs: int = 50
    patience: int = 10
    learning_rate: float = 1e-3
    weight_decay: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    grad_clip_norm: float | None = 1.0
    batch_size: int = 32
    pos_weight: float = 1.0
    seed: int = 0
    early_stop_metric: str = "loss"  # "loss" or "f1"

    def __post_init__(self) -> None:
        if self.patience > self.max_epochs:
            raise ValueError("patience must not exceed max_epochs")
        if self.early_stop_metric not in ("loss", "f1"):
            raise ValueError("early_stop_metric must be 'loss' or 'f1'")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_f1: float


class AdamW:
    """Adam moments plus decoupled weight decay."""

    def __init__(self, params: dict[str, np.ndarray], cfg: TrainConfig):
        self.cfg = cfg
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        cfg = self.cfg
        self.t += 1
        bc1 = 1.0 - cfg.beta1**self.t
        bc2 = 1.0 - cfg.beta2**self.t
        for k, p in params.items():
            g = grads[k]
            self.m[k] = cfg.beta1 * self.m[k] + (1.0 - cfg.beta1) * g
            self.v[k] = cfg.beta2 * self.v[k] + (1.0 - cfg.beta2) * g * g
            m_hat = self.m[k] / bc1
            v_hat = self.v[k] / bc2
            p -= cfg.learning_rate * (m_hat / (np.sqrt(v_hat) + cfg.eps) + cfg.weight_decay * p)


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float | None) -> float:
    """Scale all gradients so the global L2 norm is at most max_norm."""
    total = float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))
    if max_norm is not None and max_norm > 0 and total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


def _binary_f1(scores: np.ndarray, labels: np.ndarray, threshold: float = 0.5) -> float:
    pred = scores >= threshold
    tp = int((pred & (labels == 1)).sum())
    fp = int((pred & (labels == 0)).sum())
    fn = int((~pred & (labels == 1)).sum())
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def evaluate_logits(model, X: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Deterministic forward pass in evaluation mode, batched for memory."""
    out = []
    for start in range(0, X.shape[0], batch_size):
        logits, _ = model.forward(X[start : start + batch_size], train_mode=False)
        out.append(logits)
    return np.concatenate(out) if out else np.zeros(0)


def train_neural(
    model,
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    cfg: TrainConfig,
) -> list[EpochRecord]:
    """Train in place; the model ends with its best-validation-epoch weights.

    Stops once the validation metric has not improved for cfg.patience
    consecutive epochs. Returns the per-epoch training log.
    """
    y_train = np.asarray(y_train, dtype=np.float64)
    y_val = np.asarray(y_val, dtype=np.float64)
    if len(np.unique(y_train)) < 2:
        raise DegenerateLabelsError("training labels contain a single class")

    rng = np.random.default_rng(cfg.seed)
    optimizer = AdamW(model.params, cfg)
    n = X_train.shape[0]
    best_params = {k: v.copy() for k, v in model.params.items()}
    best_metric: float | None = None
    bad_epochs = 0
    records: list[EpochRecord] = []

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            logits, cache = model.forward(X_train[idx], train_mode=True, rng=rng)
            loss, dlogits = weighted_bce_grad(logits, y_train[idx], cfg.pos_weight)
            if not np.isfinite(loss):
                raise NonFiniteLossError(f"non-finite training loss at epoch {epoch}")
            grads = model.backward(cache, dlogits)
            clip_gradients(grads, cfg.grad_clip_norm)
            optimizer.step(model.params, grads)
            loss_sum += loss * len(idx)
        train_loss = loss_sum / n

        val_logits = evaluate_logits(model, X_val, cfg.batch_size)
        val_loss = weighted_bce(val_logits, y_val, cfg.pos_weight)
        if not np.isfinite(val_loss):
            raise NonFiniteLossError(f"non-finite validation loss at epoch {epoch}")
        val_f1 = _binary_f1(sigmoid(val_logits), y_val)
        records.append(EpochRecord(epoch, train_loss, val_loss, val_f1))

        metric = val_loss if cfg.early_stop_metric == "loss" else -val_f1
        if best_metric is None or metric < best_metric:
            best_metric = metric
            best_params = {k: v.copy() for k, v in model.params.items()}
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= cfg.patience:
                log.info("early stop at epoch %d (best %s)", epoch, cfg.early_stop_metric)
                break

    model.params.update({k: v.copy() for k, v in best_params.items()})
    return records
