"""End-to-end pipeline stages behind the CLI subcommands.

Artifacts per run directory:
    daily.csv, triggers.csv          from `synth`
    prepared/*.npy, prepared/meta.json, labels.csv   from `prepare`
    model_<name>.json, trainlog_<name>.csv           from `train`
    metrics.csv, metrics_val.csv, events_<name>.csv,
    alerts_<name>.csv, timeline_<name>.svg           from `evaluate`
    report.txt                                       from `report`
    run-manifest.txt                                 from every stage
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import json
import logging
from dataclasses import asdict
from pathlib import Path

import numpy as np

from onsetwarn.config import RunConfig, write_manifest
from onsetwarn.errors import ConfigError, DegenerateLabelsError
from onsetwarn.evaluation import (
    EventReport,
    StandardMetrics,
    build_report,
    default_threshold_grid,
    select_threshold,
)
from onsetwarn.features import (
    FEATURE_NAMES,
    apply_normalizer,
    cyclic_column_indices,
    feature_matrix,
    fit_normalizer,
)
from onsetwarn.ingest import YearSeries, impute_series, make_split, parse_dataset, serialize_dataset
from onsetwarn.labeling import build_label_sequences, build_windows, stack_windows
from onsetwarn.models import (
    GBDTConfig,
    LSTMConfig,
    LSTMModel,
    TCNConfig,
    TCNModel,
    TrainConfig,
    compute_pos_weight,
    load_model,
    predict_scores,
    save_model,
    train_gbdt,
    train_neural,
)
from onsetwarn.synth import SynthConfig, generate_with_triggers

log = logging.getLogger(__name__)


def _fmt(value) -> str:
    """Deterministic CSV cell: shortest round-trip repr for floats."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def resolve_data_path(cfg: RunConfig) -> Path:
    p = Path(cfg.data_csv)
    if p.exists():
        return p
    candidate = cfg.out_path() / cfg.data_csv
    if candidate.exists():
        return candidate
    raise ConfigError(f"input CSV not found: {cfg.data_csv} (also tried {candidate})")


# --- synth ------------------------------------------------------------------


def run_synth(cfg: RunConfig) -> Path:
    """Write the synthetic dataset plus the ground-truth trigger sidecar."""
    out = cfg.out_path()
    out.mkdir(parents=True, exist_ok=True)
    synth_cfg = SynthConfig(years=tuple(cfg.synth_years), seed=cfg.seed, label_noise=cfg.synth_label_noise)
    series, triggers = generate_with_triggers(synth_cfg)
    data_path = out / "daily.csv"
    data_path.write_text(serialize_dataset(series), encoding="utf-8")

    rows = []
    for ys in series:
        trig = triggers[ys.year]
        rows.extend([d.isoformat(), int(t)] for d, t in zip(ys.dates, trig))
    _write_csv(out / "triggers.csv", ["date", "trigger"], rows)
    write_manifest(cfg)
    log.info("synth: wrote %s (%d years)", data_path, len(series))
    return data_path


# --- prepare ----------------------------------------------------------------


def run_prepare(cfg: RunConfig) -> Path:
    """Build normalized window samples and the per-day label export."""
    out = cfg.out_path()
    out.mkdir(parents=True, exist_ok=True)
    series_list = parse_dataset(resolve_data_path(cfg).read_text(encoding="utf-8"))
    split = make_split(series_list, cfg.train_years, cfg.val_year, cfg.test_year)

    imputed: dict[int, YearSeries] = {}
    repair_total = 0
    for ys in [*split.train, split.validation, split.test]:
        fixed, counts = impute_series(ys)
        imputed[ys.year] = fixed
        repair_total += counts.total()
    if repair_total:
        log.info("prepare: repaired %d out-of-range cells", repair_total)

    passthrough = () if cfg.normalize_cyclic else cyclic_column_indices()
    train_mats = [feature_matrix(imputed[y]) for y in split.train_years]
    norm = fit_normalizer(train_mats, passthrough=passthrough)

    roles = {
        "train": [imputed[y] for y in split.train_years],
        "val": [imputed[split.validation.year]],
        "test": [imputed[split.test.year]],
    }
    prepared = out / "prepared"
    prepared.mkdir(exist_ok=True)
    meta: dict = {
        "feature_names": list(FEATURE_NAMES),
        "window_len": cfg.window_len,
        "h_min": cfg.h_min,
        "h_max": cfg.h_max,
        "gap": cfg.gap,
        "normalizer_mu": norm.mu.tolist(),
        "normalizer_sigma": norm.sigma.tolist(),
        "years": {"train": list(split.train_years), "val": split.validation.year, "test": split.test.year},
        "dates": {},
        "events": {},
    }
    label_rows: list[list] = []
    for role, series_group in roles.items():
        samples_all = []
        events_all: list[str] = []
        for ys in series_group:
            seqs, events = build_label_sequences(
                ys,
                gap=cfg.gap,
                h_min=cfg.h_min,
                h_max=cfg.h_max,
                count_year_opening_event=cfg.count_year_opening_event,
            )
            feats = apply_normalizer(feature_matrix(ys), norm)
            samples, retained = build_windows(
                feats, seqs, window_len=cfg.window_len, h_max=cfg.h_max
            )
            samples_all.extend(samples)
            events_all.extend(d.isoformat() for d in events.dates)
            label_rows.extend(
                [d.isoformat(), int(seqs.m[i]), int(seqs.e[i]), int(seqs.y[i]), int(retained[i])]
                for i, d in enumerate(seqs.dates)
            )
        X, y, dates = stack_windows(samples_all)
        np.save(prepared / f"X_{role}.npy", X)
        np.save(prepared / f"y_{role}.npy", y.astype(np.int8))
        meta["dates"][role] = [d.isoformat() for d in dates]
        meta["events"][role] = events_all

    (prepared / "meta.json").write_text(
        json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8"
    )
    _write_csv(out / "labels.csv", ["date", "m", "e", "y", "retained"], label_rows)
    write_manifest(cfg)
    log.info("prepare: windows train/val/test = %s/%s/%s",
             len(meta["dates"]["train"]), len(meta["dates"]["val"]), len(meta["dates"]["test"]))
    return prepared


def load_prepared(cfg: RunConfig) -> dict:
    prepared = cfg.out_path() / "prepared"
    meta_path = prepared / "meta.json"
    if not meta_path.exists():
        raise ConfigError(f"prepared data not found: {meta_path}; run `onsetwarn prepare` first")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    data = {"meta": meta}
    for role in ("train", "val", "test"):
        data[f"X_{role}"] = np.load(prepared / f"X_{role}.npy")
        data[f"y_{role}"] = np.load(prepared / f"y_{role}.npy")
        data[f"dates_{role}"] = [dt.date.fromisoformat(s) for s in meta["dates"][role]]
        data[f"events_{role}"] = [dt.date.fromisoformat(s) for s in meta["events"][role]]
    return data


# --- train ------------------------------------------------------------------


def model_path(cfg: RunConfig, name: str) -> Path:
    return cfg.out_path() / f"model_{name}.json"


def _train_one(cfg: RunConfig, name: str, data: dict) -> None:
    X_train, y_train = data["X_train"], data["y_train"]
    X_val, y_val = data["X_val"], data["y_val"]
    d = X_train.shape[2]
    out = cfg.out_path()

    if name == "gbdt":
        gcfg = GBDTConfig(
            n_rounds=cfg.gbdt_rounds,
            learning_rate=cfg.gbdt_learning_rate,
            max_depth=cfg.gbdt_max_depth,
            subsample=cfg.gbdt_subsample,
            colsample=cfg.gbdt_colsample,
            n_bins=cfg.gbdt_bins,
            min_samples_leaf=cfg.gbdt_min_leaf,
            min_gain=cfg.gbdt_min_gain,
            l2_reg=cfg.gbdt_l2,
            pos_weight=compute_pos_weight(y_train) if cfg.gbdt_pos_weight else None,
            seed=cfg.seed,
        )
        model, rounds = train_gbdt(X_train, y_train, gcfg, X_val, y_val)
        rows = [[r["round"], r["train_loss"], r.get("val_loss")] for r in rounds]
        _write_csv(out / "trainlog_gbdt.csv", ["epoch", "train_loss", "val_loss"], rows)
        save_model(model, model_path(cfg, name))
        return

    if name == "lstm":
        model = LSTMModel(
            LSTMConfig(
                input_dim=d,
                hidden_dim=cfg.hidden_dim,
                num_layers=cfg.lstm_layers,
                dropout=cfg.dropout,
                seed=cfg.seed,
            )
        )
    elif name == "tcn":
        model = TCNModel(
            TCNConfig(
                input_dim=d,
                channels=cfg.hidden_dim,
                levels=cfg.tcn_levels,
                kernel_size=cfg.tcn_kernel,
                dropout=cfg.dropout,
                seed=cfg.seed,
            )
        )
    else:
        raise ConfigError(f"unknown model name {name!r}")

    tcfg = TrainConfig(
        max_epochs=cfg.max_epochs,
        patience=cfg.patience,
        learning_rate=cfg.adam_lr,
        weight_decay=cfg.weight_decay,
        beta1=cfg.adam_beta1,
        beta2=cfg.adam_beta2,
        eps=cfg.adam_eps,
        grad_clip_norm=cfg.grad_clip_norm if cfg.grad_clip_norm > 0 else None,
        batch_size=cfg.batch_size,
        pos_weight=compute_pos_weight(y_train),
        seed=cfg.seed,
        early_stop_metric=cfg.early_stop_metric,
    )
    records = train_neural(model, X_train, y_train, X_val, y_val, tcfg)
    rows = [[r.epoch, r.train_loss, r.val_loss] for r in records]
    _write_csv(out / f"trainlog_{name}.csv", ["epoch", "train_loss", "val_loss"], rows)
    save_model(model, model_path(cfg, name))


def run_train(cfg: RunConfig) -> list[Path]:
    data = load_prepared(cfg)
    if data["X_train"].shape[0] == 0:
        raise DegenerateLabelsError("no training windows; check split years and data")
    paths = []
    for name in cfg.models_selected():
        log.info("train: %s", name)
        _train_one(cfg, name, data)
        paths.append(model_path(cfg, name))
    write_manifest(cfg)
    return paths


# --- evaluate ----------------------------------------------------------------

METRIC_COLUMNS = [
    "model",
    "threshold",
    "f1",
    "precision",
    "recall",
    "auroc",
    "event_recall",
    "mean_lead_days",
    "alert_precision",
    "episode_precision",
    "alerts",
    "false_alerts",
    "near_miss_alerts",
    "strict_false_alerts",
    "episodes",
    "near_miss_episodes",
    "strict_false_episodes",
]


def _metric_row(name: str, metrics: StandardMetrics, report: EventReport) -> list:
    return [
        name,
        metrics.threshold,
        metrics.f1,
        metrics.precision,
        metrics.recall,
        metrics.auroc,
        report.event_recall,
        report.mean_lead_days,
        report.alert_precision,
        report.episode_precision,
        report.alerts,
        report.false_alerts,
        report.near_miss_alerts,
        report.strict_false_alerts,
        report.episodes,
        report.near_miss_episodes,
        report.strict_false_episodes,
    ]


def run_evaluate(cfg: RunConfig) -> Path:
    from onsetwarn.report import render_timeline_svg

    data = load_prepared(cfg)
    out = cfg.out_path()
    grid = default_threshold_grid(cfg.grid_start, cfg.grid_stop, cfg.grid_step)

    test_rows = []
    val_rows = []
    for name in cfg.models_selected():
        path = model_path(cfg, name)
        if not path.exists():
            raise ConfigError(f"model file not found: {path}; run `onsetwarn train` first")
        model = load_model(path)
        val_scores = predict_scores(model, data["X_val"])
        thr = select_threshold(val_scores, data["y_val"], grid)
        test_scores = predict_scores(model, data["X_test"])

        kwargs = dict(
            h_min=cfg.h_min,
            h_max=cfg.h_max,
            near_miss_slack=cfg.near_miss_slack,
            episode_gap=cfg.episode_gap,
        )
        report, metrics = build_report(
            test_scores, data["dates_test"], data["y_test"], data["events_test"], thr, **kwargs
        )
        val_report, val_metrics = build_report(
            val_scores, data["dates_val"], data["y_val"], data["events_val"], thr, **kwargs
        )
        test_rows.append(_metric_row(name, metrics, report))
        val_rows.append(_metric_row(name, val_metrics, val_report))

        _write_csv(
            out / f"events_{name}.csv",
            ["event_date", "detected", "lead_days", "undetectable"],
            [
                [r.event_date.isoformat(), int(r.detected), r.lead_days, int(r.undetectable)]
                for r in report.events
            ],
        )
        episode_of = {}
        for ep_id, ep in enumerate(report.episode_list):
            for day in ep.alert_dates:
                episode_of[day] = ep_id
        score_of = {d: float(s) for d, s in zip(data["dates_test"], test_scores)}
        _write_csv(
            out / f"alerts_{name}.csv",
            ["date", "score", "class", "episode_id"],
            [
                [d.isoformat(), score_of[d], c, episode_of[d]]
                for d, c in zip(report.alert_dates, report.alert_classes)
            ],
        )
        if cfg.svg:
            svg = render_timeline_svg(
                data["dates_test"], test_scores, thr, data["events_test"], report.episode_list
            )
            (out / f"timeline_{name}.svg").write_text(svg, encoding="utf-8")

    _write_csv(out / "metrics.csv", METRIC_COLUMNS, test_rows)
    _write_csv(out / "metrics_val.csv", METRIC_COLUMNS, val_rows)
    write_manifest(cfg)
    return out / "metrics.csv"


# --- exports ------------------------------------------------------------------


def export_features(cfg: RunConfig) -> Path:
    """Engineered (pre-normalization) feature matrix for all split years."""
    series_list = parse_dataset(resolve_data_path(cfg).read_text(encoding="utf-8"))
    split = make_split(series_list, cfg.train_years, cfg.val_year, cfg.test_year)
    out = cfg.out_path()
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for ys in [*split.train, split.validation, split.test]:
        fixed, _ = impute_series(ys)
        mat = feature_matrix(fixed)
        rows.extend(
            [d.isoformat(), *[float(v) for v in mat[i]]] for i, d in enumerate(fixed.dates)
        )
    path = out / "features.csv"
    _write_csv(path, ["date", *FEATURE_NAMES], rows)
    write_manifest(cfg)
    return path


def export_labels(cfg: RunConfig) -> Path:
    """Per-day label export; identical schema to the prepare-stage artifact."""
    series_list = parse_dataset(resolve_data_path(cfg).read_text(encoding="utf-8"))
    split = make_split(series_list, cfg.train_years, cfg.val_year, cfg.test_year)
    out = cfg.out_path()
    out.mkdir(parents=True, exist_ok=True)
    passthrough = () if cfg.normalize_cyclic else cyclic_column_indices()
    imputed = {ys.year: impute_series(ys)[0] for ys in [*split.train, split.validation, split.test]}
    norm = fit_normalizer([feature_matrix(imputed[y]) for y in split.train_years], passthrough=passthrough)
    rows = []
    for ys in imputed.values():
        seqs, _ = build_label_sequences(
            ys,
            gap=cfg.gap,
            h_min=cfg.h_min,
            h_max=cfg.h_max,
            count_year_opening_event=cfg.count_year_opening_event,
        )
        feats = apply_normalizer(feature_matrix(ys), norm)
        _, retained = build_windows(feats, seqs, window_len=cfg.window_len, h_max=cfg.h_max)
        rows.extend(
            [d.isoformat(), int(seqs.m[i]), int(seqs.e[i]), int(seqs.y[i]), int(retained[i])]
            for i, d in enumerate(seqs.dates)
        )
    path = out / "labels.csv"
    _write_csv(path, ["date", "m", "e", "y", "retained"], rows)
    write_manifest(cfg)
    return path
