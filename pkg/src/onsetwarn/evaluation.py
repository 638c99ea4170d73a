"""Sample-level metrics and the event-oriented early-warning protocol.

An alert is a retained sample day whose risk score reaches the threshold.
An event at day tau is detected by any alert in its valid warning window
[tau - h_max, tau - h_min]; alerts outside every valid window are near
misses when within `near_miss_slack` days of one, strict false otherwise.
Temporally adjacent alerts group into episodes classified by their best
member. Day arguments may be datetime.date or plain integers.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from onsetwarn.errors import SingleClassError

ALERT_TRUE = "true"
ALERT_NEAR_MISS = "near_miss"
ALERT_STRICT_FALSE = "strict_false"


def _ordinal(day) -> int:
    if isinstance(day, dt.date):
        return day.toordinal()
    return int(day)


@dataclass
class StandardMetrics:
    """Sample-level discrimination metrics at a fixed threshold."""

    threshold: float
    f1: float
    precision: float
    recall: float
    auroc: float | None


@dataclass
class PerEventRow:
    event_date: object
    detected: bool
    lead_days: int | None
    undetectable: bool = False


@dataclass
class AlertEpisode:
    start: object
    end: object
    alert_dates: list
    classification: str


@dataclass
class EventReport:
    """Per-event outcomes plus aggregate early-warning metrics and counts."""

    events: list[PerEventRow]
    event_recall: float | None
    mean_lead_days: float | None
    alert_precision: float | None
    episode_precision: float | None
    alerts: int
    false_alerts: int
    near_miss_alerts: int
    strict_false_alerts: int
    episodes: int
    near_miss_episodes: int
    strict_false_episodes: int
    alert_classes: list[str] = field(default_factory=list)
    alert_dates: list = field(default_factory=list)
    episode_list: list[AlertEpisode] = field(default_factory=list)


def auroc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Rank-based AUROC (Mann-Whitney), ties counted one half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("AUROC needs both classes")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # average rank, 1-based
        i = j + 1
    rank_sum = ranks[labels == 1].sum()
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def classification_metrics(
    scores: Sequence[float], labels: Sequence[int], threshold: float
) -> tuple[float, float, float]:
    """(f1, precision, recall) with alert iff score >= threshold.

    Undefined ratios evaluate to 0 by convention.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pred = scores >= threshold
    tp = int((pred & (labels == 1)).sum())
    fp = int((pred & (labels == 0)).sum())
    fn = int((~pred & (labels == 1)).sum())
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return f1, precision, recall


def default_threshold_grid(start: float = 0.05, stop: float = 0.95, step: float = 0.05) -> np.ndarray:
    n = int(round((stop - start) / step)) + 1
    return np.round(start + step * np.arange(n), 10)


def select_threshold(
    val_scores: Sequence[float], val_labels: Sequence[int], grid: Sequence[float]
) -> float:
    """Grid threshold with maximum validation F1; ties go to the smallest."""
    grid = sorted(float(t) for t in grid)
    if not grid:
        raise ValueError("threshold grid is empty")
    best_thr = grid[0]
    best_f1 = -1.0
    for thr in grid:
        f1, _, _ = classification_metrics(val_scores, val_labels, thr)
        if f1 > best_f1:
            best_f1 = f1
            best_thr = thr
    return float(best_thr)


def alert_stream(scores: Sequence[float], days: Sequence, threshold: float) -> list:
    """Ascending alert days: retained days whose score reaches the threshold."""
    picked = [
        (day, float(s)) for day, s in zip(days, scores) if s >= threshold
    ]
    picked.sort(key=lambda p: _ordinal(p[0]))
    return [day for day, _ in picked]


def match_events(
    alerts: Sequence,
    events: Sequence,
    h_min: int = 3,
    h_max: int = 7,
) -> list[PerEventRow]:
    """Per-event detection: earliest alert in [tau-h_max, tau-h_min] wins.

    lead_days = tau - t of that earliest valid alert (within [h_min, h_max]).
    """
    alert_ord = sorted(_ordinal(a) for a in alerts)
    rows = []
    for event in events:
        tau = _ordinal(event)
        valid = [t for t in alert_ord if h_min <= tau - t <= h_max]
        if valid:
            rows.append(PerEventRow(event, True, tau - valid[0]))
        else:
            rows.append(PerEventRow(event, False, None))
    return rows


def classify_alerts(
    alerts: Sequence,
    events: Sequence,
    h_min: int = 3,
    h_max: int = 7,
    near_miss_slack: int = 2,
) -> list[str]:
    """Per-alert class: inside a valid window, near one, or strict false."""
    event_ord = [_ordinal(e) for e in events]
    classes = []
    for alert in alerts:
        t = _ordinal(alert)
        dist = None
        for tau in event_ord:
            lo, hi = tau - h_max, tau - h_min
            d = max(lo - t, t - hi, 0)
            dist = d if dist is None else min(dist, d)
        if dist is not None and dist == 0:
            classes.append(ALERT_TRUE)
        elif dist is not None and dist <= near_miss_slack:
            classes.append(ALERT_NEAR_MISS)
        else:
            classes.append(ALERT_STRICT_FALSE)
    return classes


def group_episodes(
    alerts: Sequence,
    classes: Sequence[str],
    episode_gap: int = 1,
) -> list[AlertEpisode]:
    """Greedy left-to-right grouping of alerts into contiguous episodes.

    A new episode starts when the day gap to the previous alert exceeds
    episode_gap. Episode class is its best member: true > near_miss >
    strict_false.
    """
    order = sorted(range(len(alerts)), key=lambda i: _ordinal(alerts[i]))
    episodes: list[AlertEpisode] = []
    members: list[int] = []

    def flush() -> None:
        if not members:
            return
        kinds = {classes[i] for i in members}
        if ALERT_TRUE in kinds:
            cls = ALERT_TRUE
        elif ALERT_NEAR_MISS in kinds:
            cls = ALERT_NEAR_MISS
        else:
            cls = ALERT_STRICT_FALSE
        days = [alerts[i] for i in members]
        episodes.append(AlertEpisode(days[0], days[-1], days, cls))

    prev = None
    for i in order:
        t = _ordinal(alerts[i])
        if prev is not None and t - prev > episode_gap:
            flush()
            members = []
        members.append(i)
        prev = t
    flush()
    return episodes


def event_report(
    alerts: Sequence,
    events: Sequence,
    h_min: int = 3,
    h_max: int = 7,
    near_miss_slack: int = 2,
    episode_gap: int = 1,
    first_retained_day=None,
) -> EventReport:
    """Assemble per-event rows, alert taxonomy, episodes and aggregates."""
    rows = match_events(alerts, events, h_min, h_max)
    if first_retained_day is not None:
        first_ord = _ordinal(first_retained_day)
        for row in rows:
            # whole valid window before any retained day: structurally missable
            if _ordinal(row.event_date) - h_min < first_ord:
                row.undetectable = True
    classes = classify_alerts(alerts, events, h_min, h_max, near_miss_slack)
    episodes = group_episodes(alerts, classes, episode_gap)

    n_alerts = len(alerts)
    n_near = classes.count(ALERT_NEAR_MISS)
    n_strict = classes.count(ALERT_STRICT_FALSE)
    n_false = n_near + n_strict
    n_episodes = len(episodes)
    ep_near = sum(1 for ep in episodes if ep.classification == ALERT_NEAR_MISS)
    ep_strict = sum(1 for ep in episodes if ep.classification == ALERT_STRICT_FALSE)

    detected = [r for r in rows if r.detected]
    return EventReport(
        events=rows,
        event_recall=len(detected) / len(rows) if rows else None,
        mean_lead_days=(
            float(np.mean([r.lead_days for r in detected])) if detected else None
        ),
        alert_precision=(n_alerts - n_false) / n_alerts if n_alerts else None,
        episode_precision=(
            (n_episodes - ep_near - ep_strict) / n_episodes if n_episodes else None
        ),
        alerts=n_alerts,
        false_alerts=n_false,
        near_miss_alerts=n_near,
        strict_false_alerts=n_strict,
        episodes=n_episodes,
        near_miss_episodes=ep_near,
        strict_false_episodes=ep_strict,
        alert_classes=classes,
        alert_dates=list(alerts),
        episode_list=episodes,
    )


def build_report(
    scores: Sequence[float],
    sample_days: Sequence,
    labels: Sequence[int],
    events: Sequence,
    threshold: float,
    h_min: int = 3,
    h_max: int = 7,
    near_miss_slack: int = 2,
    episode_gap: int = 1,
) -> tuple[EventReport, StandardMetrics]:
    """Threshold the scores into alerts and run the full evaluation."""
    f1, precision, recall = classification_metrics(scores, labels, threshold)
    try:
        auc = auroc(scores, labels)
    except SingleClassError:
        auc = None
    metrics = StandardMetrics(
        threshold=float(threshold), f1=f1, precision=precision, recall=recall, auroc=auc
    )
    alerts = alert_stream(scores, sample_days, threshold)
    first_day = min(sample_days, key=_ordinal) if len(sample_days) else None
    report = event_report(
        alerts,
        events,
        h_min=h_min,
        h_max=h_max,
        near_miss_slack=near_miss_slack,
        episode_gap=episode_gap,
        first_retained_day=first_day,
    )
    return report, metrics
