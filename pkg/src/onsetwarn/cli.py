"""Command-line interface.

Subcommands: synth, prepare, train, evaluate, report, config, plus
`feature export` and `label export`. Common flags: --config <path>,
--model <gbdt|lstm|tcn|all>, --seed <int>, --out <dir>. Logging verbosity
comes from the ONSET_WARN_LOG env var (quiet, info, debug).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from onsetwarn.config import RunConfig, load_config, render_config, write_manifest
from onsetwarn.errors import OnsetWarnError

log = logging.getLogger("onsetwarn")

_LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    level_name = os.environ.get("ONSET_WARN_LOG", "info").lower()
    level = _LOG_LEVELS.get(level_name, logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--model", choices=["gbdt", "lstm", "tcn", "all"], help="model selection")
    parser.add_argument("--seed", type=int, help="random seed override")
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--data", help="input CSV override")
    parser.add_argument("--svg", action="store_true", default=None, help="also write SVG timelines")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onsetwarn",
        description="Event-based early warning of disease risk from daily environmental series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in [
        ("synth", "generate the seeded synthetic dataset"),
        ("prepare", "build normalized window samples and label exports"),
        ("train", "train the selected forecasters on prepared windows"),
        ("evaluate", "select thresholds and write evaluation CSVs"),
        ("report", "render the combined text summary"),
    ]:
        _add_common(sub.add_parser(name, help=text))

    p_config = sub.add_parser("config", help="print the resolved or default configuration")
    _add_common(p_config)
    p_config.add_argument("--defaults", action="store_true", help="print built-in defaults only")

    p_feature = sub.add_parser("feature", help="feature-matrix utilities")
    feature_sub = p_feature.add_subparsers(dest="action", required=True)
    _add_common(feature_sub.add_parser("export", help="export the engineered feature matrix CSV"))

    p_label = sub.add_parser("label", help="label-sequence utilities")
    label_sub = p_label.add_subparsers(dest="action", required=True)
    _add_common(label_sub.add_parser("export", help="export the per-day m/e/y/retained CSV"))
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if getattr(args, "model", None):
        overrides["model"] = args.model
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None):
        overrides["out_dir"] = args.out
    if getattr(args, "data", None):
        overrides["data_csv"] = args.data
    if getattr(args, "svg", None):
        overrides["svg"] = True
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        command = args.command
        if command == "config":
            print(render_config(RunConfig() if args.defaults else cfg), end="")
            return 0
        if command == "synth":
            from onsetwarn.pipeline import run_synth

            path = run_synth(cfg)
            print(f"wrote {path}")
            return 0
        if command == "prepare":
            from onsetwarn.pipeline import run_prepare

            path = run_prepare(cfg)
            print(f"wrote {path}")
            return 0
        if command == "train":
            from onsetwarn.pipeline import run_train

            for path in run_train(cfg):
                print(f"wrote {path}")
            return 0
        if command == "evaluate":
            from onsetwarn.pipeline import run_evaluate

            path = run_evaluate(cfg)
            print(f"wrote {path}")
            return 0
        if command == "report":
            from onsetwarn.report import run_report

            print(run_report(cfg), end="")
            return 0
        if command == "feature":
            from onsetwarn.pipeline import export_features

            print(f"wrote {export_features(cfg)}")
            return 0
        if command == "label":
            from onsetwarn.pipeline import export_labels

            print(f"wrote {export_labels(cfg)}")
            return 0
        raise AssertionError(f"unhandled command {command}")
    except OnsetWarnError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
