"""Daily CSV ingestion: validated per-year series with causal imputation.

Input schema (UTF-8, comma-separated, header row required):
    date, humidity_mean, temp_mean, temp_min, temp_max, rainfall,
    label_downy, label_powdery
Empty numeric cells mean "missing" and are resolved by causal forward-fill.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from onsetwarn.errors import (
    DuplicateDateError,
    InvalidLabelError,
    MissingColumnError,
    MissingYearError,
    NonChronologicalSplitError,
    UnparseableDateError,
)

REQUIRED_COLUMNS = (
    "date",
    "humidity_mean",
    "temp_mean",
    "temp_min",
    "temp_max",
    "rainfall",
    "label_downy",
    "label_powdery",
)
NUMERIC_COLUMNS = ("humidity_mean", "temp_mean", "temp_min", "temp_max", "rainfall")
LABEL_COLUMNS = ("label_downy", "label_powdery")


@dataclass(frozen=True)
class DailyRecord:
    """One calendar day of measurements plus raw disease annotations.

    Numeric fields are None while a value is missing; after imputation all
    of them are floats and satisfy temp_min <= temp_mean <= temp_max,
    rainfall >= 0 and humidity_mean in [0, 100].
    """

    date: dt.date
    humidity_mean: float | None
    temp_mean: float | None
    temp_min: float | None
    temp_max: float | None
    rainfall: float | None
    label_downy: int
    label_powdery: int

    @property
    def month(self) -> int:
        return self.date.month

    @property
    def doy(self) -> int:
        return self.date.timetuple().tm_yday


@dataclass
class YearSeries:
    """Chronologically ordered records of a single calendar year."""

    year: int
    records: list[DailyRecord]

    def __post_init__(self) -> None:
        prev = None
        for rec in self.records:
            if rec.date.year != self.year:
                raise ValueError(f"record {rec.date} outside year {self.year}")
            if prev is not None and rec.date <= prev:
                raise DuplicateDateError(f"dates not strictly ascending at {rec.date}")
            prev = rec.date

    def __len__(self) -> int:
        return len(self.records)

    @property
    def dates(self) -> list[dt.date]:
        return [r.date for r in self.records]

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]

    def calendar_gap_count(self) -> int:
        """Number of whole days missing between consecutive records."""
        gaps = 0
        for a, b in zip(self.records, self.records[1:]):
            gaps += (b.date - a.date).days - 1
        return gaps


@dataclass
class RepairCounts:
    """Counters for invariant repairs applied after imputation."""

    temp_swapped: int = 0
    temp_mean_clamped: int = 0
    humidity_clipped: int = 0
    rainfall_clipped: int = 0

    def total(self) -> int:
        return (
            self.temp_swapped
            + self.temp_mean_clamped
            + self.humidity_clipped
            + self.rainfall_clipped
        )


@dataclass
class ChronoSplit:
    """Chronological train/validation/test partition by whole years."""

    train: list[YearSeries]
    validation: YearSeries
    test: YearSeries

    @property
    def train_years(self) -> list[int]:
        return [s.year for s in self.train]


def _parse_label(cell: str, column: str, line_no: int) -> int:
    cell = cell.strip()
    if cell == "":
        return 0
    try:
        value = float(cell)
    except ValueError:
        raise InvalidLabelError(f"line {line_no}: {column} must be 0 or 1, got {cell!r}")
    if value not in (0.0, 1.0):
        raise InvalidLabelError(f"line {line_no}: {column} must be 0 or 1, got {cell!r}")
    return int(value)


def _parse_numeric(cell: str) -> float | None:
    cell = cell.strip()
    if cell == "":
        return None
    try:
        return float(cell)
    except ValueError:
        return None  # non-numeric cells count as missing


def parse_dataset(csv_text: str | io.TextIOBase | Iterable[str]) -> list[YearSeries]:
    """Parse the daily CSV into per-year series sorted chronologically.

    Accepts a string or any iterable of lines. Raises MissingColumnError,
    DuplicateDateError or UnparseableDateError on malformed input.
    """
    if isinstance(csv_text, str):
        csv_text = io.StringIO(csv_text)
    reader = csv.reader(csv_text)
    try:
        header = next(reader)
    except StopIteration:
        raise MissingColumnError("empty input: no header row")
    header = [h.strip() for h in header]
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise MissingColumnError(f"missing required columns: {', '.join(missing)}")
    idx = {c: header.index(c) for c in REQUIRED_COLUMNS}

    records: list[DailyRecord] = []
    seen: set[dt.date] = set()
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        raw_date = row[idx["date"]].strip()
        try:
            date = dt.date.fromisoformat(raw_date)
        except ValueError:
            raise UnparseableDateError(f"line {line_no}: bad date {raw_date!r}")
        if date in seen:
            raise DuplicateDateError(f"line {line_no}: duplicate date {date.isoformat()}")
        seen.add(date)
        records.append(
            DailyRecord(
                date=date,
                humidity_mean=_parse_numeric(row[idx["humidity_mean"]]),
                temp_mean=_parse_numeric(row[idx["temp_mean"]]),
                temp_min=_parse_numeric(row[idx["temp_min"]]),
                temp_max=_parse_numeric(row[idx["temp_max"]]),
                rainfall=_parse_numeric(row[idx["rainfall"]]),
                label_downy=_parse_label(row[idx["label_downy"]], "label_downy", line_no),
                label_powdery=_parse_label(row[idx["label_powdery"]], "label_powdery", line_no),
            )
        )

    records.sort(key=lambda r: r.date)
    by_year: dict[int, list[DailyRecord]] = {}
    for rec in records:
        by_year.setdefault(rec.date.year, []).append(rec)
    return [YearSeries(year=y, records=recs) for y, recs in sorted(by_year.items())]


def serialize_dataset(series_list: Sequence[YearSeries]) -> str:
    """Render series back to the input CSV schema (exact round-trip)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REQUIRED_COLUMNS)
    for series in series_list:
        for r in series.records:
            writer.writerow(
                [r.date.isoformat()]
                + ["" if getattr(r, c) is None else repr(float(getattr(r, c))) for c in NUMERIC_COLUMNS]
                + [r.label_downy, r.label_powdery]
            )
    return out.getvalue()


def impute_causal(values: Sequence[float | None]) -> np.ndarray:
    """Forward-fill missing values without looking into the future.

    Leading missing values take the first observed value; an entirely
    missing series becomes all zeros. Total function, idempotent.
    """
    n = len(values)
    out = np.zeros(n, dtype=np.float64)
    last: float | None = None
    first_observed: float | None = None
    first_missing_run = 0
    for i, v in enumerate(values):
        if v is None or (isinstance(v, float) and np.isnan(v)):
            if last is None:
                first_missing_run += 1
                continue
            out[i] = last
        else:
            val = float(v)
            if first_observed is None:
                first_observed = val
                out[:first_missing_run] = val
            out[i] = val
            last = val
    return out


def impute_series(series: YearSeries) -> tuple[YearSeries, RepairCounts]:
    """Impute all numeric columns of one year and repair range invariants.

    temp_min/temp_max inversions are swapped, temp_mean is clamped into the
    [min, max] band, humidity is clipped to [0, 100] and rainfall to >= 0.
    Each repair increments a counter so callers can surface data quality.
    """
    cols = {name: impute_causal(series.column(name)) for name in NUMERIC_COLUMNS}
    counts = RepairCounts()

    hum = cols["humidity_mean"]
    clipped = (hum < 0) | (hum > 100)
    counts.humidity_clipped = int(clipped.sum())
    cols["humidity_mean"] = np.clip(hum, 0.0, 100.0)

    rain = cols["rainfall"]
    counts.rainfall_clipped = int((rain < 0).sum())
    cols["rainfall"] = np.maximum(rain, 0.0)

    tmin, tmax = cols["temp_min"], cols["temp_max"]
    swap = tmin > tmax
    counts.temp_swapped = int(swap.sum())
    cols["temp_min"] = np.where(swap, tmax, tmin)
    cols["temp_max"] = np.where(swap, tmin, tmax)

    tmean = cols["temp_mean"]
    clamped = np.clip(tmean, cols["temp_min"], cols["temp_max"])
    counts.temp_mean_clamped = int((clamped != tmean).sum())
    cols["temp_mean"] = clamped

    new_records = [
        replace(rec, **{name: float(cols[name][i]) for name in NUMERIC_COLUMNS})
        for i, rec in enumerate(series.records)
    ]
    return YearSeries(year=series.year, records=new_records), counts


def make_split(
    series_list: Sequence[YearSeries],
    train_years: Iterable[int],
    val_year: int,
    test_year: int,
) -> ChronoSplit:
    """Partition parsed years into a strictly chronological split."""
    by_year = {s.year: s for s in series_list}
    train_years = sorted(train_years)
    for y in [*train_years, val_year, test_year]:
        if y not in by_year:
            raise MissingYearError(f"year {y} not present in the dataset")
    if not train_years:
        raise MissingYearError("no training years given")
    if not (max(train_years) < val_year < test_year):
        raise NonChronologicalSplitError(
            f"need max(train) < val < test, got train={train_years}, "
            f"val={val_year}, test={test_year}"
        )
    return ChronoSplit(
        train=[by_year[y] for y in train_years],
        validation=by_year[val_year],
        test=by_year[test_year],
    )
