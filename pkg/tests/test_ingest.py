import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onsetwarn.errors import (
    DuplicateDateError,
    MissingColumnError,
    MissingYearError,
    NonChronologicalSplitError,
    UnparseableDateError,
)
from onsetwarn.ingest import (
    REQUIRED_COLUMNS,
    impute_causal,
    impute_series,
    make_split,
    parse_dataset,
    serialize_dataset,
)

HEADER = ",".join(REQUIRED_COLUMNS)


def row(date, hum=70.0, tm=15.0, tmin=10.0, tmax=20.0, rain=0.0, d=0, p=0):
    return f"{date},{hum},{tm},{tmin},{tmax},{rain},{d},{p}"


def make_csv(rows):
    return HEADER + "\n" + "\n".join(rows) + "\n"


class TestParse:
    def test_three_rows_one_year(self):
        text = make_csv([row("2020-03-01"), row("2020-03-02"), row("2020-03-03")])
        series = parse_dataset(text)
        assert len(series) == 1
        assert series[0].year == 2020
        assert len(series[0]) == 3

    def test_interleaved_years_sorted(self):
        text = make_csv(
            [row("2021-01-02"), row("2020-06-01"), row("2021-01-01"), row("2020-05-31")]
        )
        series = parse_dataset(text)
        assert [s.year for s in series] == [2020, 2021]
        for s in series:
            assert s.dates == sorted(s.dates)

    def test_empty_cell_is_missing_then_imputed(self):
        text = make_csv(
            [
                "2020-03-01,70.0,15.0,10.0,20.0,0.0,0,0",
                "2020-03-02,,15.0,10.0,20.0,0.0,0,0",
            ]
        )
        series = parse_dataset(text)
        assert series[0].records[1].humidity_mean is None
        fixed, _ = impute_series(series[0])
        assert fixed.records[1].humidity_mean == 70.0

    def test_non_numeric_cell_is_missing(self):
        text = make_csv(["2020-03-01,abc,15.0,10.0,20.0,0.0,0,0"])
        assert parse_dataset(text)[0].records[0].humidity_mean is None

    def test_missing_column(self):
        with pytest.raises(MissingColumnError):
            parse_dataset("date,humidity_mean\n2020-01-01,50\n")

    def test_duplicate_date(self):
        with pytest.raises(DuplicateDateError):
            parse_dataset(make_csv([row("2020-03-01"), row("2020-03-01")]))

    def test_unparseable_date(self):
        with pytest.raises(UnparseableDateError):
            parse_dataset(make_csv([row("03/01/2020")]))

    def test_extra_columns_ignored(self):
        text = "extra," + HEADER + "\n" + "x," + row("2020-03-01") + "\n"
        assert len(parse_dataset(text)[0]) == 1

    def test_round_trip_exact(self):
        text = make_csv(
            [
                row("2020-03-01", hum=71.25, rain=3.125),
                row("2020-03-02", tm=15.7, d=1),
                row("2021-07-09", tmax=33.33, p=1),
            ]
        )
        series = parse_dataset(text)
        again = parse_dataset(serialize_dataset(series))
        assert serialize_dataset(again) == serialize_dataset(series)
        for a, b in zip(series, again):
            assert a.records == b.records


class TestImpute:
    def test_forward_fill(self):
        out = impute_causal([5.0, None, None, 7.0])
        assert out.tolist() == [5.0, 5.0, 5.0, 7.0]

    def test_leading_missing_takes_first_observed(self):
        assert impute_causal([None, None, 4.0]).tolist() == [4.0, 4.0, 4.0]

    def test_all_missing_becomes_zero(self):
        assert impute_causal([None, None, None]).tolist() == [0.0, 0.0, 0.0]

    def test_idempotent(self):
        values = [None, 2.0, None, None, 9.5, None]
        once = impute_causal(values)
        assert impute_causal(once.tolist()).tolist() == once.tolist()

    @given(
        st.lists(st.one_of(st.none(), st.floats(-50, 50)), min_size=2, max_size=30),
        st.data(),
    )
    @settings(max_examples=100, deadline=None)
    def test_causality_prefix_unchanged(self, values, data):
        # mutate one future cell past the first observed value; the prefix
        # before it must be unchanged (leading backfill is the documented
        # exception: it copies the first observed value backwards)
        observed = [i for i, v in enumerate(values) if v is not None]
        if not observed or observed[0] >= len(values) - 1:
            return
        base = impute_causal(values)
        j = data.draw(st.integers(observed[0] + 1, len(values) - 1))
        mutated = list(values)
        mutated[j] = 99.0
        out = impute_causal(mutated)
        assert out[:j].tolist() == base[:j].tolist()

    def test_temp_inversion_swapped(self):
        text = make_csv(["2020-03-01,70.0,15.0,21.0,9.0,0.0,0,0"])
        fixed, counts = impute_series(parse_dataset(text)[0])
        rec = fixed.records[0]
        assert counts.temp_swapped == 1
        assert rec.temp_min <= rec.temp_mean <= rec.temp_max

    def test_range_clips_counted(self):
        text = make_csv(["2020-03-01,120.0,15.0,10.0,20.0,-3.5,0,0"])
        fixed, counts = impute_series(parse_dataset(text)[0])
        assert counts.humidity_clipped == 1
        assert counts.rainfall_clipped == 1
        assert fixed.records[0].humidity_mean == 100.0
        assert fixed.records[0].rainfall == 0.0


class TestSplit:
    def _series(self, years):
        rows = [row(f"{y}-06-0{i}") for y in years for i in (1, 2)]
        return parse_dataset(make_csv(rows))

    def test_valid_split(self):
        split = make_split(self._series([2020, 2021, 2022, 2023]), [2020, 2021], 2022, 2023)
        assert split.train_years == [2020, 2021]
        assert split.validation.year == 2022
        assert split.test.year == 2023

    def test_non_chronological(self):
        with pytest.raises(NonChronologicalSplitError):
            make_split(self._series([2020, 2021, 2022]), [2021], 2020, 2022)

    def test_missing_year(self):
        with pytest.raises(MissingYearError):
            make_split(self._series([2020, 2021, 2022]), [2020], 2021, 2024)
