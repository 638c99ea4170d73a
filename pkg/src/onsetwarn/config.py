"""Run configuration: flat `key = value` files, defaults, CLI overrides.

Every resolved run writes its full configuration to `run-manifest.txt` in
the output directory; that manifest is itself a valid config file, so any
run can be reproduced byte-identically with `--config run-manifest.txt`.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

from onsetwarn.errors import ConfigError

MODEL_NAMES = ("gbdt", "lstm", "tcn")


@dataclass
class RunConfig:
    # paths
    data_csv: str = "daily.csv"
    out_dir: str = "runs/default"

    # chronological split
    train_years: tuple[int, ...] = (2020, 2021)
    val_year: int = 2022
    test_year: int = 2023

    # event labeling
    gap: int = 5
    h_min: int = 3
    h_max: int = 7
    window_len: int = 30
    count_year_opening_event: bool = True

    # features
    normalize_cyclic: bool = False

    # model selection
    model: str = "all"
    seed: int = 7

    # GBDT
    gbdt_rounds: int = 400
    gbdt_learning_rate: float = 0.05
    gbdt_max_depth: int = 4
    gbdt_subsample: float = 0.9
    gbdt_colsample: float = 0.9
    gbdt_bins: int = 256
    gbdt_min_leaf: int = 5
    gbdt_min_gain: float = 0.0
    gbdt_l2: float = 1.0
    gbdt_pos_weight: bool = False

    # neural architectures
    hidden_dim: int = 64
    lstm_layers: int = 2
    tcn_levels: int = 3
    tcn_kernel: int = 3
    dropout: float = 0.2

    # neural optimization
    max_epochs: int = 50
    patience: int = 10
    adam_lr: float = 1e-3
    weight_decay: float = 1e-2
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    grad_clip_norm: float = 1.0
    batch_size: int = 32
    early_stop_metric: str = "loss"

    # evaluation
    grid_start: float = 0.05
    grid_stop: float = 0.95
    grid_step: float = 0.05
    episode_gap: int = 1
    near_miss_slack: int = 2
    svg: bool = False

    # synthetic data generation
    synth_years: tuple[int, ...] = (2020, 2021, 2022, 2023, 2024)
    synth_label_noise: float = 0.0

    def models_selected(self) -> tuple[str, ...]:
        if self.model == "all":
            return MODEL_NAMES
        if self.model not in MODEL_NAMES:
            raise ConfigError(f"unknown model {self.model!r}; use one of {MODEL_NAMES + ('all',)}")
        return (self.model,)

    def out_path(self) -> Path:
        return Path(self.out_dir)


def _parse_value(raw: str, template) -> object:
    raw = raw.strip()
    if isinstance(template, bool):
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ConfigError(f"expected true/false, got {raw!r}")
    if isinstance(template, tuple):
        if not raw:
            return ()
        return tuple(int(part.strip()) for part in raw.split(","))
    if isinstance(template, int):
        return int(raw)
    if isinstance(template, float):
        return float(raw)
    return raw


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    """Overlay `key = value` lines onto defaults (or a given base config)."""
    cfg = dataclasses.replace(base) if base is not None else RunConfig()
    known = {f.name: f for f in fields(RunConfig)}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in known:
            raise ConfigError(f"line {line_no}: unknown config key {key!r}")
        template = getattr(RunConfig(), key)
        try:
            setattr(cfg, key, _parse_value(raw, template))
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"line {line_no}: bad value for {key}: {exc}")
    return cfg


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), base)


def render_config(cfg: RunConfig) -> str:
    """Config file text with every resolved key, stable order."""
    lines = [f"{f.name} = {_format_value(getattr(cfg, f.name))}" for f in fields(RunConfig)]
    return "\n".join(lines) + "\n"


def write_manifest(cfg: RunConfig) -> Path:
    out = cfg.out_path()
    out.mkdir(parents=True, exist_ok=True)
    manifest = out / "run-manifest.txt"
    manifest.write_text(render_config(cfg), encoding="utf-8")
    return manifest
