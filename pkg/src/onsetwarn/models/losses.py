"""Classification loss utilities shared by all three forecaster families."""
from __future__ import annotations

import numpy as np

from onsetwarn.errors import DegenerateLabelsError


def sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    """Numerically stable logistic function."""
    scalar = np.isscalar(z) or (isinstance(z, np.ndarray) and z.ndim == 0)
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return float(out[0]) if scalar else out


def softplus(z: np.ndarray) -> np.ndarray:
    """log(1 + exp(z)) without overflow."""
    z = np.asarray(z, dtype=np.float64)
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def compute_pos_weight(labels) -> float:
    """Positive-class loss weight: negative count over positive count."""
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError(
            f"both classes required, got {n_pos} positives / {n_neg} negatives"
        )
    return n_neg / n_pos


def weighted_bce(logits, labels, pos_weight: float = 1.0) -> float:
    """Mean class-weighted binary cross-entropy on logits.

    Per sample: -[w*y*log(sigmoid(z)) + (1-y)*log(1-sigmoid(z))], evaluated
    in log-sum-exp form so large |z| cannot overflow.
    """
    z = np.atleast_1d(np.asarray(logits, dtype=np.float64))
    y = np.atleast_1d(np.asarray(labels, dtype=np.float64))
    sp = softplus(-z)
    losses = pos_weight * y * sp + (1.0 - y) * (z + sp)
    return float(losses.mean())


def weighted_bce_grad(logits, labels, pos_weight: float = 1.0) -> tuple[float, np.ndarray]:
    """Loss plus d(mean loss)/d(logits)."""
    z = np.atleast_1d(np.asarray(logits, dtype=np.float64))
    y = np.atleast_1d(np.asarray(labels, dtype=np.float64))
    p = sigmoid(z)
    dz = (pos_weight * y * (p - 1.0) + (1.0 - y) * p) / z.shape[0]
    return weighted_bce(z, y, pos_weight), dz
