"""Seeded synthetic multi-year daily weather and disease-label generator.

Weather follows a seasonal wet-spell process (Markov rain, coupled humidity,
sinusoidal temperature). The unified disease label activates when a causal
trigger rule over the previous <= 7 days fires - sustained humid days plus
accumulated rain inside a temperature band - then persists for a drawn
episode length followed by a refractory period. The trigger thresholds
mirror the pipeline's engineered descriptors, so the learning task is
solvable from them by construction.
"""
from __future__ import annotations

import calendar
import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from onsetwarn.errors import ConfigSeriesMismatchError, InvalidConfigError
from onsetwarn.ingest import DailyRecord, YearSeries


@dataclass(frozen=True)
class SynthConfig:
    years: tuple[int, ...] = (2020, 2021, 2022, 2023, 2024)
    seed: int = 7

    # rain process: seasonal wet-spell entry, persistent spells, gamma amounts
    rain_prob_amp: float = 0.33
    rain_phase_doy: float = 170.0
    rain_season_width: float = 70.0
    rain_persist: float = 0.66
    rain_amount_shape: float = 1.3
    rain_amount_scale: float = 7.0

    # temperature: annual sinusoid with AR(1) noise
    temp_annual_mean: float = 13.5
    temp_amplitude: float = 9.5
    temp_phase_doy: float = 105.0
    temp_noise: float = 1.4
    temp_halfrange: float = 3.5

    # humidity coupling
    humid_base: float = 56.0
    humid_rain_boost: float = 26.0
    humid_prev_rain_boost: float = 12.0
    humid_temp_coeff: float = -0.45
    humid_noise: float = 4.5

    # trigger rule thresholds (causal over the previous <= 7 days)
    trigger_humid_days: int = 4
    trigger_rain_sum: float = 16.0
    trigger_temp_lo: float = 11.0
    trigger_temp_hi: float = 28.0

    # label episode persistence and post-episode refractory, in days
    persist_min: int = 8
    persist_max: int = 16
    refractory_min: int = 7
    refractory_max: int = 12

    label_noise: float = 0.0

    def validate(self) -> None:
        positive = (
            self.rain_season_width,
            self.rain_amount_shape,
            self.rain_amount_scale,
            self.temp_noise,
            self.temp_halfrange,
            self.humid_noise,
        )
        if any(v <= 0 for v in positive):
            raise InvalidConfigError("scale parameters must be positive")
        if not (0.0 <= self.rain_prob_amp <= 1.0 and 0.0 <= self.rain_persist <= 1.0):
            raise InvalidConfigError("rain probabilities must lie in [0, 1]")
        if not (3 <= self.persist_min <= self.persist_max <= 30):
            raise InvalidConfigError("persistence range must lie within [3, 30] days")
        if not (1 <= self.refractory_min <= self.refractory_max):
            raise InvalidConfigError("refractory range must be at least 1 day")
        if not (0.0 <= self.label_noise < 1.0):
            raise InvalidConfigError("label_noise must lie in [0, 1)")
        if not self.years:
            raise InvalidConfigError("need at least one year")


def _wet_entry_prob(cfg: SynthConfig, doy: int) -> float:
    z = (doy - cfg.rain_phase_doy) / cfg.rain_season_width
    return cfg.rain_prob_amp * math.exp(-0.5 * z * z)


def _trigger_series(cfg: SynthConfig, rain: np.ndarray, hum: np.ndarray, tmean: np.ndarray) -> np.ndarray:
    """Re-evaluate the causal trigger rule on generated weather."""
    n = len(rain)
    trig = np.zeros(n, dtype=np.int8)
    for t in range(n):
        h7 = hum[max(0, t - 6) : t + 1]
        r5 = rain[max(0, t - 4) : t + 1]
        t3 = tmean[max(0, t - 2) : t + 1]
        if (
            int((h7 > 85.0).sum()) >= cfg.trigger_humid_days
            and float(r5.sum()) >= cfg.trigger_rain_sum
            and cfg.trigger_temp_lo <= float(t3.mean()) <= cfg.trigger_temp_hi
        ):
            trig[t] = 1
    return trig


def _generate_year(cfg: SynthConfig, year: int) -> tuple[YearSeries, np.ndarray]:
    rng = np.random.default_rng([cfg.seed, year])
    n_days = 366 if calendar.isleap(year) else 365
    start = dt.date(year, 1, 1)

    rain = np.zeros(n_days)
    tmean = np.zeros(n_days)
    tmin = np.zeros(n_days)
    tmax = np.zeros(n_days)
    hum = np.zeros(n_days)
    wet_prev = False
    t_noise = 0.0
    h_noise = 0.0
    for t in range(n_days):
        doy = t + 1
        p_wet = cfg.rain_persist if wet_prev else _wet_entry_prob(cfg, doy)
        wet = rng.random() < p_wet
        rain[t] = rng.gamma(cfg.rain_amount_shape, cfg.rain_amount_scale) if wet else 0.0

        t_noise = 0.7 * t_noise + rng.normal(0.0, cfg.temp_noise)
        seasonal = cfg.temp_amplitude * math.sin(2.0 * math.pi * (doy - cfg.temp_phase_doy) / 365.0)
        tmean[t] = cfg.temp_annual_mean + seasonal + t_noise
        half_lo = cfg.temp_halfrange + abs(rng.normal(0.0, 1.2)) + 0.5
        half_hi = cfg.temp_halfrange + abs(rng.normal(0.0, 1.2)) + 0.5
        tmin[t] = tmean[t] - half_lo
        tmax[t] = tmean[t] + half_hi

        h_noise = 0.6 * h_noise + rng.normal(0.0, cfg.humid_noise)
        hum[t] = (
            cfg.humid_base
            + cfg.humid_rain_boost * wet
            + cfg.humid_prev_rain_boost * wet_prev
            + cfg.humid_temp_coeff * (tmean[t] - cfg.temp_annual_mean)
            + h_noise
        )
        wet_prev = wet
    hum = np.clip(hum, 0.0, 100.0)

    trig = _trigger_series(cfg, rain, hum, tmean)

    m = np.zeros(n_days, dtype=np.int8)
    downy = np.zeros(n_days, dtype=np.int8)
    powdery = np.zeros(n_days, dtype=np.int8)
    active_left = 0
    refractory_left = 0
    for t in range(n_days):
        if active_left > 0:
            m[t] = 1
            active_left -= 1
            if active_left == 0:
                refractory_left = int(rng.integers(cfg.refractory_min, cfg.refractory_max + 1))
        elif refractory_left > 0:
            refractory_left -= 1
        elif trig[t]:
            active_left = int(rng.integers(cfg.persist_min, cfg.persist_max + 1))
            m[t] = 1
            active_left -= 1
            if active_left == 0:
                refractory_left = int(rng.integers(cfg.refractory_min, cfg.refractory_max + 1))
            # pathogen split is drawn once per episode
            r = rng.random()
            episode_downy = r < 0.65
            episode_powdery = r >= 0.45  # overlap: both active for r in [0.45, 0.65)
            span = t + 1 + active_left
            downy[t:span] = int(episode_downy)
            powdery[t:span] = int(episode_powdery)

    if cfg.label_noise > 0.0:
        flips = rng.random(n_days) < cfg.label_noise
        for t in np.flatnonzero(flips):
            if m[t] == 1:
                m[t] = downy[t] = powdery[t] = 0
            else:
                m[t] = 1
                if rng.random() < 0.5:
                    downy[t] = 1
                else:
                    powdery[t] = 1

    records = [
        DailyRecord(
            date=start + dt.timedelta(days=t),
            humidity_mean=float(hum[t]),
            temp_mean=float(tmean[t]),
            temp_min=float(tmin[t]),
            temp_max=float(tmax[t]),
            rainfall=float(rain[t]),
            label_downy=int(downy[t] if m[t] else 0),
            label_powdery=int(powdery[t] if m[t] else 0),
        )
        for t in range(n_days)
    ]
    return YearSeries(year=year, records=records), trig


def generate(cfg: SynthConfig) -> list[YearSeries]:
    """Generate all configured years; deterministic per (seed, year)."""
    cfg.validate()
    return [_generate_year(cfg, year)[0] for year in cfg.years]


def generate_with_triggers(cfg: SynthConfig) -> tuple[list[YearSeries], dict[int, np.ndarray]]:
    cfg.validate()
    series = []
    triggers = {}
    for year in cfg.years:
        ys, trig = _generate_year(cfg, year)
        series.append(ys)
        triggers[year] = trig
    return series, triggers


def ground_truth_precursors(cfg: SynthConfig, series: YearSeries) -> np.ndarray:
    """Re-evaluate the trigger rule on a generated series.

    Exposes which days carried genuine precursor signal; raises when the
    series year is not part of the config.
    """
    if series.year not in cfg.years:
        raise ConfigSeriesMismatchError(
            f"year {series.year} was not generated by this config (years={cfg.years})"
        )
    rain = np.asarray(series.column("rainfall"), dtype=np.float64)
    hum = np.asarray(series.column("humidity_mean"), dtype=np.float64)
    tmean = np.asarray(series.column("temp_mean"), dtype=np.float64)
    return _trigger_series(cfg, rain, hum, tmean)
