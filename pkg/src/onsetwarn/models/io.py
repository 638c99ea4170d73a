"""Versioned, self-describing model files (JSON, deterministic bytes)."""
from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from onsetwarn.errors import ConfigError
from onsetwarn.models.gbdt import GBDTConfig, GBDTModel, Tree
from onsetwarn.models.lstm import LSTMConfig, LSTMModel
from onsetwarn.models.tcn import TCNConfig, TCNModel

FORMAT_NAME = "onsetwarn-model"
FORMAT_VERSION = 1


def _model_payload(model) -> dict:
    if isinstance(model, GBDTModel):
        return {
            "kind": "gbdt",
            "config": asdict(model.config),
            "base_score": model.base_score,
            "learning_rate": model.learning_rate,
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "value": t.value.tolist(),
                }
                for t in model.trees
            ],
        }
    if isinstance(model, (LSTMModel, TCNModel)):
        return {
            "kind": model.kind,
            "config": asdict(model.config),
            "params": {k: v.tolist() for k, v in sorted(model.params.items())},
        }
    raise ConfigError(f"cannot serialize model of type {type(model).__name__}")


def save_model(model, path: str | Path) -> None:
    payload = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        **_model_payload(model),
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path: str | Path):
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != FORMAT_NAME:
        raise ConfigError(f"{path}: not an {FORMAT_NAME} file")
    if payload.get("format_version") != FORMAT_VERSION:
        raise ConfigError(f"{path}: unsupported format version {payload.get('format_version')}")
    kind = payload["kind"]
    if kind == "gbdt":
        cfg = GBDTConfig(**payload["config"])
        model = GBDTModel(
            config=cfg,
            base_score=payload["base_score"],
            learning_rate=payload["learning_rate"],
        )
        for td in payload["trees"]:
            model.trees.append(
                Tree(
                    feature=np.array(td["feature"], dtype=np.int32),
                    threshold=np.array(td["threshold"], dtype=np.float64),
                    left=np.array(td["left"], dtype=np.int32),
                    right=np.array(td["right"], dtype=np.int32),
                    value=np.array(td["value"], dtype=np.float64),
                )
            )
        return model
    if kind == "lstm":
        model = LSTMModel(LSTMConfig(**payload["config"]))
    elif kind == "tcn":
        cfgd = payload["config"]
        cfgd["dilations"] = tuple(cfgd.get("dilations") or ())
        model = TCNModel(TCNConfig(**cfgd))
    else:
        raise ConfigError(f"{path}: unknown model kind {kind!r}")
    for key, values in payload["params"].items():
        model.params[key] = np.array(values, dtype=np.float64)
    return model
