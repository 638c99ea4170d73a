import datetime as dt
import math

import numpy as np
import pytest

from onsetwarn.errors import DimensionMismatchError, EmptyTrainingSetError
from onsetwarn.features import (
    CYCLIC_FEATURES,
    ENGINEERED_FEATURES,
    FEATURE_NAMES,
    apply_normalizer,
    cyclic_column_indices,
    cyclic_encode,
    feature_matrix,
    fit_normalizer,
    rolling_features,
)
from onsetwarn.ingest import DailyRecord, YearSeries


def make_series(year, hum, tm=None, tmin=None, tmax=None, rain=None):
    n = len(hum)
    tm = tm or [15.0] * n
    tmin = tmin or [v - 5 for v in tm]
    tmax = tmax or [v + 5 for v in tm]
    rain = rain if rain is not None else [0.0] * n
    start = dt.date(year, 3, 1)
    records = [
        DailyRecord(
            date=start + dt.timedelta(days=i),
            humidity_mean=float(hum[i]),
            temp_mean=float(tm[i]),
            temp_min=float(tmin[i]),
            temp_max=float(tmax[i]),
            rainfall=float(rain[i]),
            label_downy=0,
            label_powdery=0,
        )
        for i in range(n)
    ]
    return YearSeries(year=year, records=records)


def col(names, mat, name):
    return mat[:, names.index(name)]


class TestCyclic:
    def test_month_full_period(self):
        s, c, _, _ = cyclic_encode(12, 335)
        assert abs(s) < 1e-12 and abs(c - 1.0) < 1e-12

    def test_month_half_period(self):
        s, c, _, _ = cyclic_encode(6, 160)
        assert abs(s) < 1e-12 and abs(c + 1.0) < 1e-12

    def test_doy_full_period(self):
        _, _, s, c = cyclic_encode(12, 365)
        assert abs(s) < 1e-12 and abs(c - 1.0) < 1e-12

    def test_unit_circle(self):
        for month in range(1, 13):
            ms, mc, ds, dc = cyclic_encode(month, month * 28)
            assert ms**2 + mc**2 == pytest.approx(1.0, abs=1e-12)
            assert ds**2 + dc**2 == pytest.approx(1.0, abs=1e-12)

    def test_doy_denominator_is_365_even_in_leap_years(self):
        _, _, s366, _ = cyclic_encode(12, 366)
        assert s366 == pytest.approx(math.sin(2 * math.pi * 366 / 365.0), abs=1e-15)


class TestRolling:
    def test_rain_sum_prefix_windows(self):
        series = make_series(2020, hum=[50] * 4, rain=[1, 2, 3, 4])
        mat = rolling_features(series)
        assert col(list(ENGINEERED_FEATURES), mat, "rain_sum_3").tolist() == [1, 3, 6, 9]

    def test_humid_days_strict_threshold(self):
        series = make_series(2020, hum=[90, 80, 86, 85, 90])
        mat = rolling_features(series)
        assert col(list(ENGINEERED_FEATURES), mat, "humid_days_5")[-1] == 3

    def test_temp_range(self):
        series = make_series(2020, hum=[50], tm=[20.0], tmin=[13.0], tmax=[28.0])
        mat = rolling_features(series)
        assert col(list(ENGINEERED_FEATURES), mat, "temp_range")[0] == 15.0

    def test_rain_sum_monotone_in_window(self):
        rng = np.random.default_rng(3)
        rain = rng.gamma(1.0, 4.0, size=40) * (rng.random(40) < 0.5)
        series = make_series(2020, hum=[60] * 40, rain=rain.tolist())
        mat = rolling_features(series)
        names = list(ENGINEERED_FEATURES)
        r3 = col(names, mat, "rain_sum_3")
        r5 = col(names, mat, "rain_sum_5")
        r7 = col(names, mat, "rain_sum_7")
        assert (r7[6:] >= r5[6:] - 1e-12).all()
        assert (r5[6:] >= r3[6:] - 1e-12).all()
        assert (r3 >= 0).all()

    def test_counts_bounded(self):
        rng = np.random.default_rng(4)
        series = make_series(
            2020,
            hum=(70 + 25 * rng.random(50)).tolist(),
            rain=(rng.random(50) < 0.4).astype(float).tolist(),
        )
        mat = rolling_features(series)
        names = list(ENGINEERED_FEATURES)
        assert ((col(names, mat, "humid_days_5") >= 0) & (col(names, mat, "humid_days_5") <= 5)).all()
        assert ((col(names, mat, "rainy_days_7") >= 0) & (col(names, mat, "rainy_days_7") <= 7)).all()

    def test_causality_future_perturbation(self):
        rng = np.random.default_rng(5)
        hum = (60 + 30 * rng.random(30)).tolist()
        rain = (5 * rng.random(30)).tolist()
        base = rolling_features(make_series(2020, hum=hum, rain=rain))
        hum2 = list(hum)
        rain2 = list(rain)
        hum2[20] = 99.0
        rain2[20] = 50.0
        pert = rolling_features(make_series(2020, hum=hum2, rain=rain2))
        assert np.array_equal(base[:20], pert[:20])

    def test_feature_matrix_layout(self):
        series = make_series(2020, hum=[60, 70], rain=[1.0, 0.0])
        mat = feature_matrix(series)
        assert mat.shape == (2, len(FEATURE_NAMES))
        names = list(FEATURE_NAMES)
        assert mat[0, names.index("humidity_mean")] == 60
        assert mat[1, names.index("rainy_days_5")] == 1  # one rainy day so far


class TestNormalizer:
    def test_two_point_column(self):
        norm = fit_normalizer(np.array([[1.0], [3.0]]))
        assert norm.mu[0] == 2.0 and norm.sigma[0] == 1.0

    def test_constant_column_clamped(self):
        norm = fit_normalizer(np.array([[5.0], [5.0], [5.0]]))
        assert norm.sigma[0] == 1e-8
        out = apply_normalizer(np.array([[5.0]]), norm)
        assert out[0, 0] == 0.0

    def test_train_self_standardization(self):
        rng = np.random.default_rng(6)
        X = rng.normal(3.0, 2.5, size=(200, 7))
        norm = fit_normalizer(X)
        Z = apply_normalizer(X, norm)
        assert np.abs(Z.mean(axis=0)).max() < 1e-9
        assert np.abs(Z.std(axis=0) - 1.0).max() < 1e-6

    def test_centering_and_identity(self):
        norm = fit_normalizer(np.array([[1.0, 2.0], [3.0, 6.0]]))
        assert apply_normalizer(norm.mu[None, :], norm).tolist() == [[0.0, 0.0]]
        ident = fit_normalizer(np.array([[0.0], [0.0]]))  # sigma clamps, mu 0
        assert ident.mu[0] == 0.0

    def test_train_fitted_differs_from_self_fitted(self):
        rng = np.random.default_rng(7)
        train = rng.normal(0.0, 1.0, size=(50, 3))
        val = rng.normal(2.0, 3.0, size=(50, 3))
        train_norm = fit_normalizer(train)
        self_norm = fit_normalizer(val)
        assert not np.allclose(
            apply_normalizer(val, train_norm), apply_normalizer(val, self_norm)
        )

    def test_fit_ignores_validation_data(self):
        rng = np.random.default_rng(8)
        train = rng.normal(size=(40, 4))
        val = rng.normal(size=(40, 4))
        norm_a = fit_normalizer(train)
        val[3, 2] = 1e6  # mutate a validation cell
        norm_b = fit_normalizer(train)
        assert np.array_equal(norm_a.mu, norm_b.mu)
        assert np.array_equal(norm_a.sigma, norm_b.sigma)

    def test_cyclic_passthrough(self):
        rng = np.random.default_rng(9)
        X = rng.normal(5.0, 2.0, size=(60, len(FEATURE_NAMES)))
        norm = fit_normalizer(X, passthrough=cyclic_column_indices())
        for i in cyclic_column_indices():
            assert norm.mu[i] == 0.0 and norm.sigma[i] == 1.0
        others = [i for i in range(len(FEATURE_NAMES)) if i not in cyclic_column_indices()]
        assert all(norm.mu[i] != 0.0 for i in others)

    def test_dimension_mismatch(self):
        norm = fit_normalizer(np.zeros((3, 4)))
        with pytest.raises(DimensionMismatchError):
            apply_normalizer(np.zeros((2, 5)), norm)

    def test_empty_training_set(self):
        with pytest.raises(EmptyTrainingSetError):
            fit_normalizer(np.zeros((1, 4)))

    def test_input_not_modified(self):
        X = np.ones((3, 2))
        snapshot = X.copy()
        apply_normalizer(X, fit_normalizer(np.array([[0.0, 1.0], [2.0, 3.0]])))
        assert np.array_equal(X, snapshot)
