"""Per-day feature construction: raw variables, cyclic calendar encodings,
causal rolling descriptors and train-fitted z-score normalization.

Feature order is fixed by FEATURE_NAMES and identical across all days and
years of a run; exported headers are byte-stable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from onsetwarn.errors import DimensionMismatchError, EmptyTrainingSetError
from onsetwarn.ingest import YearSeries

RAW_FEATURES = ("humidity_mean", "temp_mean", "temp_min", "temp_max", "rainfall")
CYCLIC_FEATURES = ("month_sin", "month_cos", "doy_sin", "doy_cos")
ENGINEERED_FEATURES = (
    "rain_sum_3",
    "rain_sum_5",
    "rain_sum_7",
    "hum_mean_3",
    "hum_mean_5",
    "hum_mean_7",
    "temp_mean_3",
    "temp_mean_5",
    "temp_mean_7",
    "temp_range",
    "humid_days_5",
    "humid_days_7",
    "rainy_days_5",
    "rainy_days_7",
)
FEATURE_NAMES: tuple[str, ...] = RAW_FEATURES + CYCLIC_FEATURES + ENGINEERED_FEATURES

HUMID_DAY_THRESHOLD = 85.0  # strict: humidity must exceed this
DOY_PERIOD = 365.0  # fixed denominator, also in leap years


def cyclic_encode(month: int, doy: int) -> tuple[float, float, float, float]:
    """Sine/cosine encoding of month (period 12) and day-of-year (period 365)."""
    ma = 2.0 * math.pi * month / 12.0
    da = 2.0 * math.pi * doy / DOY_PERIOD
    return math.sin(ma), math.cos(ma), math.sin(da), math.cos(da)


def _rolling_sum(x: np.ndarray, window: int) -> np.ndarray:
    """Causal rolling sum over `window` days including today, min_periods=1."""
    cs = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(len(x))
    lo = np.maximum(idx - window + 1, 0)
    return cs[idx + 1] - cs[lo]


def _rolling_mean(x: np.ndarray, window: int) -> np.ndarray:
    idx = np.arange(len(x))
    counts = np.minimum(idx + 1, window).astype(np.float64)
    return _rolling_sum(x, window) / counts


def rolling_features(series: YearSeries) -> np.ndarray:
    """Engineered descriptors for one imputed year, ENGINEERED_FEATURES order.

    All windows include day t and look back only; at the start of the series
    a shorter window uses the days available.
    """
    rain = np.asarray(series.column("rainfall"), dtype=np.float64)
    hum = np.asarray(series.column("humidity_mean"), dtype=np.float64)
    tmean = np.asarray(series.column("temp_mean"), dtype=np.float64)
    tmin = np.asarray(series.column("temp_min"), dtype=np.float64)
    tmax = np.asarray(series.column("temp_max"), dtype=np.float64)

    humid = (hum > HUMID_DAY_THRESHOLD).astype(np.float64)
    rainy = (rain > 0.0).astype(np.float64)

    cols = [
        _rolling_sum(rain, 3),
        _rolling_sum(rain, 5),
        _rolling_sum(rain, 7),
        _rolling_mean(hum, 3),
        _rolling_mean(hum, 5),
        _rolling_mean(hum, 7),
        _rolling_mean(tmean, 3),
        _rolling_mean(tmean, 5),
        _rolling_mean(tmean, 7),
        tmax - tmin,
        _rolling_sum(humid, 5),
        _rolling_sum(humid, 7),
        _rolling_sum(rainy, 5),
        _rolling_sum(rainy, 7),
    ]
    return np.column_stack(cols)


def feature_matrix(series: YearSeries) -> np.ndarray:
    """Full per-day feature matrix (n_days x d) in FEATURE_NAMES order."""
    raw = np.column_stack(
        [np.asarray(series.column(name), dtype=np.float64) for name in RAW_FEATURES]
    )
    cyc = np.array(
        [cyclic_encode(r.month, r.doy) for r in series.records], dtype=np.float64
    )
    return np.column_stack([raw, cyc, rolling_features(series)])


@dataclass(frozen=True)
class Normalizer:
    """Column-wise z-score parameters fitted on training-year days only."""

    mu: np.ndarray
    sigma: np.ndarray

    SIGMA_FLOOR = 1e-8

    @property
    def dim(self) -> int:
        return self.mu.shape[0]


def cyclic_column_indices() -> tuple[int, ...]:
    """Indices of the cyclic encodings within FEATURE_NAMES."""
    return tuple(i for i, n in enumerate(FEATURE_NAMES) if n in CYCLIC_FEATURES)


def fit_normalizer(
    train_days: np.ndarray | Sequence[np.ndarray],
    passthrough: Sequence[int] = (),
) -> Normalizer:
    """Fit per-column mean and population std over training days.

    `train_days` is one (n x d) matrix or a sequence of per-year matrices.
    Constant columns get a sigma floor of 1e-8. Columns listed in
    `passthrough` keep mu=0, sigma=1 (used for the cyclic encodings, which
    are bounded calendar transforms rather than measurements).
    """
    if not isinstance(train_days, np.ndarray):
        if len(train_days) == 0:
            raise EmptyTrainingSetError("no training matrices given")
        train_days = np.vstack(train_days)
    if train_days.ndim != 2 or train_days.shape[0] < 2:
        raise EmptyTrainingSetError(
            f"need at least 2 training days, got shape {train_days.shape}"
        )
    mu = train_days.mean(axis=0)
    sigma = np.maximum(train_days.std(axis=0), Normalizer.SIGMA_FLOOR)
    for i in passthrough:
        mu[i] = 0.0
        sigma[i] = 1.0
    return Normalizer(mu=mu, sigma=sigma)


def apply_normalizer(days: np.ndarray, norm: Normalizer) -> np.ndarray:
    """Return (x - mu) / sigma per column; the input is not modified."""
    days = np.asarray(days, dtype=np.float64)
    if days.shape[-1] != norm.dim:
        raise DimensionMismatchError(
            f"feature dim {days.shape[-1]} does not match normalizer dim {norm.dim}"
        )
    return (days - norm.mu) / norm.sigma
