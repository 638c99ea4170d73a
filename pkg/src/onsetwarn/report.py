"""Combined text report and the optional SVG score timeline."""
from __future__ import annotations

import csv
import datetime as dt
from pathlib import Path
from typing import Sequence

from onsetwarn.config import RunConfig
from onsetwarn.errors import ConfigError

_STD_COLS = ("f1", "precision", "recall", "auroc")
_EVENT_COLS = ("event_recall", "mean_lead_days", "alert_precision", "episode_precision")
_COUNT_COLS = (
    "alerts",
    "false_alerts",
    "near_miss_alerts",
    "strict_false_alerts",
    "episodes",
    "near_miss_episodes",
    "strict_false_episodes",
)


def _read_metrics(path: Path) -> dict[str, dict[str, str]]:
    if not path.exists():
        raise ConfigError(f"metrics file not found: {path}; run `onsetwarn evaluate` first")
    with path.open(newline="", encoding="utf-8") as fh:
        return {row["model"]: row for row in csv.DictReader(fh)}


def _num(cell: str, places: int = 4) -> str:
    if cell in ("", None):
        return "-"
    return f"{float(cell):.{places}f}"


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip() for row in [header, *rows]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_report(cfg: RunConfig) -> str:
    """Text summary: standard metrics, early-warning metrics, per-event matrix."""
    out = cfg.out_path()
    test = _read_metrics(out / "metrics.csv")
    val = _read_metrics(out / "metrics_val.csv")
    models = list(test.keys())

    sections = []
    header = ["model", "thr"] + [f"val_{c}" for c in _STD_COLS] + [f"test_{c}" for c in _STD_COLS]
    rows = [
        [m, _num(test[m]["threshold"], 2)]
        + [_num(val[m][c]) for c in _STD_COLS]
        + [_num(test[m][c]) for c in _STD_COLS]
        for m in models
    ]
    sections.append(
        f"Standard sample-level metrics (threshold selected on validation year {cfg.val_year})\n"
        + _table(header, rows)
    )

    header = (
        ["model"]
        + [f"val_{c}" for c in _EVENT_COLS]
        + [f"test_{c}" for c in _EVENT_COLS]
    )
    rows = [
        [m] + [_num(val[m][c]) for c in _EVENT_COLS] + [_num(test[m][c]) for c in _EVENT_COLS]
        for m in models
    ]
    sections.append("Event-based early warning\n" + _table(header, rows))

    header = ["model"] + list(_COUNT_COLS)
    rows = [[m] + [test[m][c] for c in _COUNT_COLS] for m in models]
    sections.append(f"Alert behavior, test year {cfg.test_year}\n" + _table(header, rows))

    per_event: dict[str, dict[str, str]] = {}
    event_dates: list[str] = []
    for m in models:
        path = out / f"events_{m}.csv"
        if not path.exists():
            raise ConfigError(f"per-event file not found: {path}; run `onsetwarn evaluate` first")
        with path.open(newline="", encoding="utf-8") as fh:
            cells = {}
            for row in csv.DictReader(fh):
                date = row["event_date"]
                if date not in event_dates:
                    event_dates.append(date)
                if row["detected"] == "1":
                    cells[date] = row["lead_days"]
                else:
                    cells[date] = "miss*" if row["undetectable"] == "1" else "miss"
            per_event[m] = cells
    if event_dates:
        header = ["model", *event_dates, "recall", "lead"]
        rows = [
            [m]
            + [per_event[m].get(d, "-") for d in event_dates]
            + [_num(test[m]["event_recall"]), _num(test[m]["mean_lead_days"], 2)]
            for m in models
        ]
        sections.append(
            f"Per-event outcomes, test year {cfg.test_year} "
            "(lead time in days, or miss; * = valid window precedes first sample)\n"
            + _table(header, rows)
        )
    else:
        sections.append(f"Per-event outcomes: no onset events in test year {cfg.test_year}")

    return "\n\n".join(sections) + "\n"


def run_report(cfg: RunConfig) -> str:
    text = render_report(cfg)
    (cfg.out_path() / "report.txt").write_text(text, encoding="utf-8")
    return text


def render_timeline_svg(
    days: Sequence[dt.date],
    scores: Sequence[float],
    threshold: float,
    events: Sequence[dt.date],
    episodes,
    width: int = 980,
    height: int = 220,
) -> str:
    """Static SVG: daily scores, threshold line, event markers, episode spans."""
    pad = 30
    if not len(days):
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"/>'
    lo = min(days).toordinal()
    hi = max(days).toordinal()
    span = max(hi - lo, 1)

    def x(day: dt.date) -> float:
        return pad + (width - 2 * pad) * (day.toordinal() - lo) / span

    def y(score: float) -> float:
        return height - pad - (height - 2 * pad) * max(0.0, min(1.0, score))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    colors = {"true": "#7fbf7f", "near_miss": "#f2cf66", "strict_false": "#e08080"}
    for ep in episodes:
        x0 = x(ep.start) - 2
        x1 = x(ep.end) + 2
        parts.append(
            f'<rect x="{x0:.1f}" y="{pad}" width="{max(x1 - x0, 2):.1f}" '
            f'height="{height - 2 * pad}" fill="{colors[ep.classification]}" opacity="0.35"/>'
        )
    for ev in events:
        parts.append(
            f'<line x1="{x(ev):.1f}" y1="{pad}" x2="{x(ev):.1f}" y2="{height - pad}" '
            'stroke="#333333" stroke-dasharray="4,3"/>'
        )
    ty = y(threshold)
    parts.append(
        f'<line x1="{pad}" y1="{ty:.1f}" x2="{width - pad}" y2="{ty:.1f}" stroke="#888888"/>'
    )
    # scores as a polyline per contiguous run of retained days
    run: list[str] = []
    prev_ord = None
    for day, score in zip(days, scores):
        if prev_ord is not None and day.toordinal() - prev_ord > 1 and run:
            parts.append(
                f'<polyline points="{" ".join(run)}" fill="none" stroke="#2060b0" stroke-width="1.2"/>'
            )
            run = []
        run.append(f"{x(day):.1f},{y(float(score)):.1f}")
        prev_ord = day.toordinal()
    if run:
        parts.append(
            f'<polyline points="{" ".join(run)}" fill="none" stroke="#2060b0" stroke-width="1.2"/>'
        )
    parts.append(
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="#000000"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
