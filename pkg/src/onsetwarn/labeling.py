"""Event-oriented target construction.

Builds the unified daily target, derives onset events under a minimum
disease-free gap, attaches short-horizon labels and assembles fixed-length
window samples. A window sample is emitted for day t only when today is
disease-free, the full history fits inside the year without calendar gaps,
and the whole future horizon is observed within the same year.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from onsetwarn.errors import LengthMismatchError
from onsetwarn.ingest import YearSeries

DEFAULT_GAP = 5
DEFAULT_H_MIN = 3
DEFAULT_H_MAX = 7
DEFAULT_WINDOW_LEN = 30


@dataclass
class EventList:
    """Ascending onset dates of one year."""

    year: int
    dates: list[dt.date]

    def check_separation(self, gap: int) -> bool:
        """Consecutive onsets must be separated by at least gap+1 days."""
        return all(
            (b - a).days >= gap + 1 for a, b in zip(self.dates, self.dates[1:])
        )


@dataclass
class LabelSequences:
    """Per-day unified target m, onset indicator e and horizon label y.

    All arrays align with `dates`. y near the end of a year evaluates over
    the in-year part of the horizon only; sampling excludes truncated days.
    """

    dates: list[dt.date]
    m: np.ndarray
    e: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class WindowSample:
    """A 30-day feature history paired with its horizon label."""

    prediction_date: dt.date
    window: np.ndarray  # (L, d), rows oldest -> newest
    label: int
    year: int


def merge_targets(downy: Sequence[int], powdery: Sequence[int]) -> np.ndarray:
    """Unified daily target: logical OR of the two per-pathogen labels."""
    downy = np.asarray(downy, dtype=np.int8)
    powdery = np.asarray(powdery, dtype=np.int8)
    if downy.shape != powdery.shape:
        raise LengthMismatchError(
            f"label lengths differ: {downy.shape} vs {powdery.shape}"
        )
    return (downy | powdery).astype(np.int8)


def detect_onsets(
    m: Sequence[int],
    gap: int = DEFAULT_GAP,
    count_year_opening_event: bool = True,
) -> tuple[np.ndarray, list[int]]:
    """Onset indicator: positive days that open a run after >= gap zeros.

    A run that opens the series counts as an onset when
    `count_year_opening_event` is set (no presence was observed before it).
    Returns the per-day indicator and the onset positions.
    """
    m = np.asarray(m, dtype=np.int8)
    e = np.zeros_like(m)
    onsets: list[int] = []
    zeros_before = 0
    seen_positive = False
    for t, v in enumerate(m):
        if v == 1:
            starts_run = t == 0 or m[t - 1] == 0
            if starts_run:
                opens_year = not seen_positive and count_year_opening_event
                if opens_year or zeros_before >= gap:
                    e[t] = 1
                    onsets.append(t)
            seen_positive = True
            zeros_before = 0
        else:
            zeros_before += 1
    return e, onsets


def horizon_labels(
    e: Sequence[int],
    h_min: int = DEFAULT_H_MIN,
    h_max: int = DEFAULT_H_MAX,
) -> np.ndarray:
    """y_t = 1 iff an onset occurs at some offset in [h_min, h_max].

    Near the end of the series the horizon is evaluated over the available
    part only; truncated days are excluded later, at window construction.
    """
    if h_min > h_max:
        raise ValueError(f"h_min {h_min} > h_max {h_max}")
    e = np.asarray(e, dtype=np.int8)
    n = len(e)
    y = np.zeros(n, dtype=np.int8)
    for t in range(n):
        lo = min(t + h_min, n)
        hi = min(t + h_max + 1, n)
        if lo < hi and e[lo:hi].any():
            y[t] = 1
    return y


def build_label_sequences(
    series: YearSeries,
    gap: int = DEFAULT_GAP,
    h_min: int = DEFAULT_H_MIN,
    h_max: int = DEFAULT_H_MAX,
    count_year_opening_event: bool = True,
) -> tuple[LabelSequences, EventList]:
    """m/e/y sequences plus the onset EventList for one year."""
    m = merge_targets(series.column("label_downy"), series.column("label_powdery"))
    e, onset_idx = detect_onsets(m, gap=gap, count_year_opening_event=count_year_opening_event)
    y = horizon_labels(e, h_min=h_min, h_max=h_max)
    dates = series.dates
    return (
        LabelSequences(dates=dates, m=m, e=e, y=y),
        EventList(year=series.year, dates=[dates[t] for t in onset_idx]),
    )


def build_windows(
    features: np.ndarray,
    sequences: LabelSequences,
    window_len: int = DEFAULT_WINDOW_LEN,
    h_max: int = DEFAULT_H_MAX,
) -> tuple[list[WindowSample], np.ndarray]:
    """Emit one sample per retained day of a year.

    Day t is retained when m_t = 0, the `window_len`-day history ending at t
    consists of consecutive calendar days of this year, and every day up to
    t + h_max is observed within the year. Also returns the per-day retained
    mask, aligned with sequences.dates.
    """
    dates = sequences.dates
    n = len(dates)
    if features.shape[0] != n:
        raise LengthMismatchError(
            f"feature rows {features.shape[0]} != label days {n}"
        )
    samples: list[WindowSample] = []
    retained = np.zeros(n, dtype=np.int8)
    for t in range(window_len - 1, n - h_max):
        if sequences.m[t] != 0:
            continue
        start = t - window_len + 1
        # strictly ascending dates + exact span <=> consecutive calendar days
        if (dates[t] - dates[start]).days != window_len - 1:
            continue
        if (dates[t + h_max] - dates[t]).days != h_max:
            continue
        retained[t] = 1
        samples.append(
            WindowSample(
                prediction_date=dates[t],
                window=features[start : t + 1].copy(),
                label=int(sequences.y[t]),
                year=dates[t].year,
            )
        )
    return samples, retained


def flatten_window(sample: WindowSample) -> np.ndarray:
    """Row-major flattening, oldest day first; length L*d."""
    return sample.window.reshape(-1).copy()


def stack_windows(samples: Sequence[WindowSample]) -> tuple[np.ndarray, np.ndarray, list[dt.date]]:
    """Stack samples into (X, y, dates) arrays for model training."""
    if not samples:
        return (
            np.zeros((0, 0, 0), dtype=np.float64),
            np.zeros(0, dtype=np.int8),
            [],
        )
    X = np.stack([s.window for s in samples])
    y = np.array([s.label for s in samples], dtype=np.int8)
    return X, y, [s.prediction_date for s in samples]
