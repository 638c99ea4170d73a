"""Temporal convolutional network: residual blocks of causal convolutions.

Each block applies one dilated causal convolution (kernel 3) followed by a
pointwise channel-mixing convolution, each with ReLU and dropout, plus a
residual path (1x1 projection when channel widths differ). Dilations 1, 2, 4
give a receptive field of 1 + 2*(1+2+4) = 15 days at the final time step.
The last-time-step representation feeds a single affine head.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from onsetwarn.errors import ShapeMismatchError


@dataclass(frozen=True)
class TCNConfig:
    input_dim: int
    channels: int = 64
    levels: int = 3
    kernel_size: int = 3
    dropout: float = 0.2
    dilations: tuple[int, ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.dilations:
            object.__setattr__(self, "dilations", tuple(2**i for i in range(self.levels)))
        if len(self.dilations) != self.levels:
            raise ValueError("need one dilation per level")

    @property
    def receptive_field(self) -> int:
        return 1 + (self.kernel_size - 1) * sum(self.dilations)


def causal_conv(x: np.ndarray, w: np.ndarray, b: np.ndarray, dilation: int) -> np.ndarray:
    """y[t] = sum_j x[t - j*dilation] @ w[j] + b, with zero left padding."""
    L = x.shape[1]
    y = x @ w[0] + b
    for j in range(1, w.shape[0]):
        off = j * dilation
        if off >= L:
            break
        y[:, off:, :] += x[:, : L - off, :] @ w[j]
    return y


def causal_conv_backward(
    x: np.ndarray, w: np.ndarray, dy: np.ndarray, dilation: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients (dx, dw, db) of causal_conv given dy."""
    L = x.shape[1]
    c_in, c_out = w.shape[1], w.shape[2]
    dx = dy @ w[0].T
    dw = np.zeros_like(w)
    dw[0] = x.reshape(-1, c_in).T @ dy.reshape(-1, c_out)
    db = dy.sum(axis=(0, 1))
    for j in range(1, w.shape[0]):
        off = j * dilation
        if off >= L:
            break
        dx[:, : L - off, :] += dy[:, off:, :] @ w[j].T
        dw[j] = x[:, : L - off, :].reshape(-1, c_in).T @ dy[:, off:, :].reshape(-1, c_out)
    return dx, dw, db


def _uniform_init(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    k = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-k, k, size=shape)


class TCNModel:
    """Sequence classifier mapping an (L, d) window to one logit."""

    kind = "tcn"

    def __init__(self, config: TCNConfig):
        self.config = config
        self.params: dict[str, np.ndarray] = {}
        rng = np.random.default_rng(config.seed)
        c = config.channels
        k = config.kernel_size
        c_in = config.input_dim
        for i in range(config.levels):
            self.params[f"convA_w{i}"] = _uniform_init(rng, (k, c_in, c), k * c_in)
            self.params[f"convA_b{i}"] = np.zeros(c)
            self.params[f"convB_w{i}"] = _uniform_init(rng, (c, c), c)
            self.params[f"convB_b{i}"] = np.zeros(c)
            if c_in != c:
                self.params[f"proj_w{i}"] = _uniform_init(rng, (c_in, c), c_in)
            c_in = c
        self.params["head_w"] = _uniform_init(rng, (c, 1), c)
        self.params["head_b"] = np.zeros(1)

    def forward(
        self,
        X: np.ndarray,
        train_mode: bool = False,
        rng: np.random.Generator | None = None,
    ) -> tuple[np.ndarray, dict]:
        """Return (logits (B,), cache). X is (B, L, d) or a single (L, d)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            X = X[None, :, :]
        if X.ndim != 3 or X.shape[2] != self.config.input_dim:
            raise ShapeMismatchError(
                f"expected (B, L, {self.config.input_dim}) input, got {X.shape}"
            )
        drop = self.config.dropout if train_mode else 0.0
        if drop > 0.0 and rng is None:
            raise ValueError("training-mode dropout needs an rng")

        cache: dict = {"blocks": []}
        h = X
        for i, dilation in enumerate(self.config.dilations):
            wA, bA = self.params[f"convA_w{i}"], self.params[f"convA_b{i}"]
            wB, bB = self.params[f"convB_w{i}"], self.params[f"convB_b{i}"]
            a1 = causal_conv(h, wA, bA, dilation)
            r1 = np.maximum(a1, 0.0)
            mA = None
            if drop > 0.0:
                mA = (rng.random(r1.shape) >= drop) / (1.0 - drop)
                r1 = r1 * mA
            a2 = r1 @ wB + bB
            r2 = np.maximum(a2, 0.0)
            mB = None
            if drop > 0.0:
                mB = (rng.random(r2.shape) >= drop) / (1.0 - drop)
                r2 = r2 * mB
            proj_key = f"proj_w{i}"
            res = h @ self.params[proj_key] if proj_key in self.params else h
            out = r2 + res
            cache["blocks"].append(
                {"x": h, "a1": a1, "r1": r1, "a2": a2, "mA": mA, "mB": mB, "dilation": dilation}
            )
            h = out

        h_final = h[:, -1, :]
        head_mask = None
        if drop > 0.0:
            head_mask = (rng.random(h_final.shape) >= drop) / (1.0 - drop)
            h_final = h_final * head_mask
        cache["head_mask"] = head_mask
        cache["h_final"] = h_final
        cache["L"] = X.shape[1]
        logits = (h_final @ self.params["head_w"])[:, 0] + self.params["head_b"][0]
        return logits, cache

    def backward(self, cache: dict, dlogits: np.ndarray) -> dict[str, np.ndarray]:
        """Gradients of a scalar loss given d(loss)/d(logits)."""
        grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        dlogits = np.asarray(dlogits, dtype=np.float64).reshape(-1, 1)

        grads["head_w"] = cache["h_final"].T @ dlogits
        grads["head_b"] = dlogits.sum(axis=0)
        dh_final = dlogits @ self.params["head_w"].T
        if cache["head_mask"] is not None:
            dh_final = dh_final * cache["head_mask"]

        first = cache["blocks"][0]["x"]
        d_out = np.zeros((first.shape[0], cache["L"], self.config.channels))
        d_out[:, -1, :] = dh_final
        for i in reversed(range(self.config.levels)):
            bc = cache["blocks"][i]
            wA = self.params[f"convA_w{i}"]
            wB = self.params[f"convB_w{i}"]
            dr2 = d_out if bc["mB"] is None else d_out * bc["mB"]
            da2 = dr2 * (bc["a2"] > 0.0)
            c = wB.shape[1]
            grads[f"convB_w{i}"] = bc["r1"].reshape(-1, wB.shape[0]).T @ da2.reshape(-1, c)
            grads[f"convB_b{i}"] = da2.sum(axis=(0, 1))
            dr1 = da2 @ wB.T
            if bc["mA"] is not None:
                dr1 = dr1 * bc["mA"]
            da1 = dr1 * (bc["a1"] > 0.0)
            dx, dwA, dbA = causal_conv_backward(bc["x"], wA, da1, bc["dilation"])
            grads[f"convA_w{i}"] = dwA
            grads[f"convA_b{i}"] = dbA
            proj_key = f"proj_w{i}"
            if proj_key in self.params:
                c_in = self.params[proj_key].shape[0]
                grads[proj_key] = bc["x"].reshape(-1, c_in).T @ d_out.reshape(-1, c)
                dx += d_out @ self.params[proj_key].T
            else:
                dx += d_out
            d_out = dx
        return grads
