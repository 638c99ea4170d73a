"""Stacked unidirectional LSTM with manual backpropagation through time.

Two recurrent layers by default, gate order [input, forget, cell, output].
The final hidden state of the top layer feeds a single affine head; dropout
(element-wise, inverted) is applied between layers and before the head in
training mode only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from onsetwarn.errors import ShapeMismatchError


@dataclass(frozen=True)
class LSTMConfig:
    input_dim: int
    hidden_dim: int = 64
    num_layers: int = 2
    dropout: float = 0.2
    seed: int = 0


def _uniform_init(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    k = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-k, k, size=shape)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class LSTMModel:
    """Sequence classifier mapping an (L, d) window to one logit."""

    kind = "lstm"

    def __init__(self, config: LSTMConfig):
        self.config = config
        self.params: dict[str, np.ndarray] = {}
        rng = np.random.default_rng(config.seed)
        h = config.hidden_dim
        d_in = config.input_dim
        for layer in range(config.num_layers):
            self.params[f"wx{layer}"] = _uniform_init(rng, (d_in, 4 * h), d_in)
            self.params[f"wh{layer}"] = _uniform_init(rng, (h, 4 * h), h)
            bias = np.zeros(4 * h)
            bias[h : 2 * h] = 1.0  # forget gate opens at init
            self.params[f"b{layer}"] = bias
            d_in = h
        self.params["head_w"] = _uniform_init(rng, (h, 1), h)
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

        B, L, _ = X.shape
        h_dim = self.config.hidden_dim
        cache: dict = {"layers": [], "B": B, "L": L}
        x_seq = X
        for layer in range(self.config.num_layers):
            wx = self.params[f"wx{layer}"]
            wh = self.params[f"wh{layer}"]
            b = self.params[f"b{layer}"]
            gates = np.zeros((B, L, 4 * h_dim))
            C = np.zeros((B, L, h_dim))
            TC = np.zeros((B, L, h_dim))
            H = np.zeros((B, L, h_dim))
            h = np.zeros((B, h_dim))
            c = np.zeros((B, h_dim))
            for t in range(L):
                z = x_seq[:, t, :] @ wx + h @ wh + b
                gi = _sigmoid(z[:, :h_dim])
                gf = _sigmoid(z[:, h_dim : 2 * h_dim])
                gg = np.tanh(z[:, 2 * h_dim : 3 * h_dim])
                go = _sigmoid(z[:, 3 * h_dim :])
                c = gf * c + gi * gg
                tc = np.tanh(c)
                h = go * tc
                gates[:, t, :h_dim] = gi
                gates[:, t, h_dim : 2 * h_dim] = gf
                gates[:, t, 2 * h_dim : 3 * h_dim] = gg
                gates[:, t, 3 * h_dim :] = go
                C[:, t, :] = c
                TC[:, t, :] = tc
                H[:, t, :] = h
            layer_cache = {"x": x_seq, "gates": gates, "C": C, "TC": TC, "H": H, "mask": None}
            out = H
            if drop > 0.0 and layer < self.config.num_layers - 1:
                mask = (rng.random((B, L, h_dim)) >= drop) / (1.0 - drop)
                layer_cache["mask"] = mask
                out = H * mask
            cache["layers"].append(layer_cache)
            x_seq = out

        h_final = cache["layers"][-1]["H"][:, -1, :]
        head_mask = None
        if drop > 0.0:
            head_mask = (rng.random((B, h_dim)) >= drop) / (1.0 - drop)
            h_final = h_final * head_mask
        cache["head_mask"] = head_mask
        cache["h_final"] = h_final
        logits = (h_final @ self.params["head_w"])[:, 0] + self.params["head_b"][0]
        return logits, cache

    def backward(self, cache: dict, dlogits: np.ndarray) -> dict[str, np.ndarray]:
        """Gradients of a scalar loss given d(loss)/d(logits)."""
        grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        dlogits = np.asarray(dlogits, dtype=np.float64).reshape(-1, 1)
        B = cache["B"]
        L = cache["L"]
        h_dim = self.config.hidden_dim

        grads["head_w"] = cache["h_final"].T @ dlogits
        grads["head_b"] = dlogits.sum(axis=0)
        dh_final = dlogits @ self.params["head_w"].T
        if cache["head_mask"] is not None:
            dh_final = dh_final * cache["head_mask"]

        d_out = np.zeros((B, L, h_dim))
        d_out[:, -1, :] = dh_final
        for layer in reversed(range(self.config.num_layers)):
            lc = cache["layers"][layer]
            wx = self.params[f"wx{layer}"]
            wh = self.params[f"wh{layer}"]
            gates, C, TC = lc["gates"], lc["C"], lc["TC"]
            x_seq, H = lc["x"], lc["H"]
            dwx = np.zeros_like(wx)
            dwh = np.zeros_like(wh)
            db = np.zeros_like(self.params[f"b{layer}"])
            dx_seq = np.zeros_like(x_seq)
            dh_rec = np.zeros((B, h_dim))
            dc_rec = np.zeros((B, h_dim))
            for t in reversed(range(L)):
                gi = gates[:, t, :h_dim]
                gf = gates[:, t, h_dim : 2 * h_dim]
                gg = gates[:, t, 2 * h_dim : 3 * h_dim]
                go = gates[:, t, 3 * h_dim :]
                c_prev = C[:, t - 1, :] if t > 0 else np.zeros((B, h_dim))
                h_prev = H[:, t - 1, :] if t > 0 else np.zeros((B, h_dim))

                dh = d_out[:, t, :] + dh_rec
                do = dh * TC[:, t, :]
                dc = dc_rec + dh * go * (1.0 - TC[:, t, :] ** 2)
                di = dc * gg
                dg = dc * gi
                df = dc * c_prev
                dz = np.concatenate(
                    [
                        di * gi * (1.0 - gi),
                        df * gf * (1.0 - gf),
                        dg * (1.0 - gg**2),
                        do * go * (1.0 - go),
                    ],
                    axis=1,
                )
                dwx += x_seq[:, t, :].T @ dz
                dwh += h_prev.T @ dz
                db += dz.sum(axis=0)
                dx_seq[:, t, :] = dz @ wx.T
                dh_rec = dz @ wh.T
                dc_rec = dc * gf
            grads[f"wx{layer}"] = dwx
            grads[f"wh{layer}"] = dwh
            grads[f"b{layer}"] = db
            if layer > 0:
                below_mask = cache["layers"][layer - 1]["mask"]
                d_out = dx_seq if below_mask is None else dx_seq * below_mask
        return grads
