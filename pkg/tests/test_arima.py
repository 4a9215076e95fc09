import warnings

import numpy as np
import pytest
import statsmodels.api as sm
from hypothesis import HealthCheck, given, settings, strategies as st

from rollcast import arima, core, synthetic
from rollcast.arima import ArimaFit, ArimaSpec, StabilityWarning
from rollcast.core import TimeSeries
from rollcast.errors import DataError, DomainError, ForecastError
from rollcast.runs import rmse


def ols_ar(x, p, constant=True):
    """Oracle: statsmodels OLS of x_t on its p lags."""
    y = x[p:]
    X = np.column_stack([x[p - i : len(x) - i] for i in range(1, p + 1)])
    if constant:
        X = sm.add_constant(X, has_constant="add")
    return sm.OLS(y, X).fit().params


def naive_rmse(series, fraction=0.70):
    parts = core.split(series, fraction)
    n = len(parts.train)
    return rmse(parts.test.values, series.values[n - 1 : -1])


class TestSpec:
    def test_bounds(self):
        with pytest.raises(DomainError):
            ArimaSpec(21, 0, 0)
        with pytest.raises(DomainError):
            ArimaSpec(-1, 0, 0)

    def test_default_is_510(self):
        assert (ArimaSpec().p, ArimaSpec().d, ArimaSpec().q) == (5, 1, 0)


class TestFit:
    def test_ar1_matches_ols(self):
        x = synthetic.ar1(2000, phi=0.6, seed=42).values
        fit = arima.fit_arima(TimeSeries(x), ArimaSpec(1, 0, 0))
        c, phi = ols_ar(x, 1)
        assert fit.phi[0] == pytest.approx(0.6, abs=0.05)
        assert abs(fit.phi[0] - phi) < 1e-6
        assert abs(fit.c - c) < 1e-6

    def test_white_noise(self):
        x = np.random.default_rng(9).normal(size=2000)
        fit = arima.fit_arima(TimeSeries(x), ArimaSpec(1, 0, 0))
        c, phi = ols_ar(x, 1)
        assert abs(fit.phi[0]) < 0.05 and abs(fit.c) < 0.05
        assert abs(fit.phi[0] - phi) < 1e-6

    def test_linear_ramp(self):
        fit = arima.fit_arima(TimeSeries(np.arange(50.0)), ArimaSpec(0, 1, 0))
        assert fit.c == pytest.approx(1.0, abs=1e-12)
        assert fit.sigma2 == pytest.approx(0.0, abs=1e-20)

    def test_sigma2_is_css_over_effective_n(self):
        x = synthetic.ar1(500, seed=1).values
        fit = arima.fit_arima(TimeSeries(x), ArimaSpec(2, 0, 0))
        assert fit.residuals.size == 498
        assert fit.sigma2 == pytest.approx(np.dot(fit.residuals, fit.residuals) / 498, rel=1e-12)
        assert np.isfinite(fit.resid_mean)

    def test_too_short(self):
        with pytest.raises(DataError):
            arima.fit_arima(TimeSeries(np.arange(16.0)), ArimaSpec(5, 1, 0))

    def test_deterministic(self):
        x = synthetic.random_walk(300, seed=4)
        a = arima.fit_arima(x, ArimaSpec(2, 1, 1))
        b = arima.fit_arima(x, ArimaSpec(2, 1, 1))
        assert a.c == b.c
        assert np.array_equal(a.phi, b.phi) and np.array_equal(a.theta, b.theta)

    def test_no_constant(self):
        x = synthetic.ar1(400, c=5.0, seed=3).values
        fit = arima.fit_arima(TimeSeries(x), ArimaSpec(1, 0, 0, include_constant=False))
        assert fit.c == 0.0
        assert abs(fit.phi[0] - ols_ar(x, 1, constant=False)[0]) < 1e-6

    def test_unstable_fit_warns(self):
        x = 1.05 ** np.arange(60.0)
        with pytest.warns(StabilityWarning):
            arima.fit_arima(TimeSeries(x), ArimaSpec(1, 0, 0, include_constant=False))

    @settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(p=st.integers(1, 4), seed=st.integers(0, 10_000), data=st.data())
    def test_q0_is_ols(self, p, seed, data):
        # random stable AR(p): sample roots inside the unit circle
        roots = data.draw(st.lists(st.floats(-0.9, 0.9), min_size=p, max_size=p))
        phi = -np.poly(roots)[1:]
        rng = np.random.default_rng(seed)
        n = 400
        x = np.zeros(n + 100)
        eps = rng.normal(size=n + 100)
        for t in range(p, n + 100):
            x[t] = 0.3 + phi @ x[t - p : t][::-1] + eps[t]
        x = x[100:]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StabilityWarning)
            fit = arima.fit_arima(TimeSeries(x), ArimaSpec(p, 0, 0))
        oracle = ols_ar(x, p)
        assert abs(fit.c - oracle[0]) < 1e-6
        assert np.max(np.abs(fit.phi - oracle[1:])) < 1e-6


class TestMovingAverage:
    def series(self):
        e = np.random.default_rng(21).normal(size=1500)
        y = e.copy()
        y[1:] += 0.5 * e[:-1]
        return y

    def test_ma1_matches_grid_minimum(self):
        y = self.series()
        spec = ArimaSpec(0, 0, 1, include_constant=False)
        fit = arima.fit_arima(TimeSeries(y), spec)
        # oracle: brute-force CSS over a fine theta grid
        grid = np.linspace(-0.95, 0.95, 3801)
        css = [np.sum(arima.css_residuals(y, 0.0, [], [th], 1) ** 2) for th in grid]
        best = grid[int(np.argmin(css))]
        assert abs(fit.theta[0] - best) < 1e-3
        assert fit.css <= min(css) + 1e-9
        assert fit.theta[0] == pytest.approx(0.5, abs=0.05)

    def test_css_gradient_matches_finite_differences(self):
        y = self.series()[:300]
        spec = ArimaSpec(2, 0, 2)
        x = np.array([0.1, 0.3, -0.2, 0.4, 0.1])
        _, grad = arima._css_gradient(y, x, spec)
        h = 1e-6
        for k in range(x.size):
            up, dn = x.copy(), x.copy()
            up[k] += h
            dn[k] -= h
            num = (arima._css_gradient(y, up, spec)[0] - arima._css_gradient(y, dn, spec)[0]) / (2 * h)
            assert grad[k] == pytest.approx(num, rel=1e-5, abs=1e-6)

    def test_arma_beats_zero_baseline(self):
        y = self.series()
        fit = arima.fit_arima(TimeSeries(y), ArimaSpec(1, 0, 1))
        assert fit.css < np.dot(y[1:], y[1:])


class TestForecastOne:
    def test_ar1_substitution(self):
        fit = ArimaFit(ArimaSpec(1, 0, 0), c=0.0, phi=[0.5], theta=[], sigma2=1.0, residuals=[])
        assert arima.forecast_one(fit, TimeSeries([3.0, 10.0])) == 5.0

    def test_ma_with_zero_residuals(self):
        fit = ArimaFit(ArimaSpec(0, 0, 1), c=2.0, phi=[], theta=[0.7], sigma2=1.0,
                       residuals=np.zeros(5))
        assert arima.forecast_one(fit, TimeSeries([1.0, 4.0, 2.0])) == 2.0

    def test_random_walk(self):
        fit = ArimaFit(ArimaSpec(1, 1, 0), c=0.0, phi=[0.0], theta=[], sigma2=1.0, residuals=[])
        assert arima.forecast_one(fit, TimeSeries([3.0, 5.0, 7.0])) == 7.0

    def test_random_walk_identity_from_fit(self):
        s = synthetic.random_walk(200, seed=8)
        fit = arima.fit_arima(s, ArimaSpec(0, 1, 0, include_constant=False))
        assert arima.forecast_one(fit, s) == s.values[-1]

    def test_second_differences(self):
        # constant second difference of 2: the next value of t^2 is exact
        x = np.arange(30.0) ** 2
        fit = arima.fit_arima(TimeSeries(x), ArimaSpec(0, 2, 0))
        assert arima.forecast_one(fit, TimeSeries(x)) == pytest.approx(900.0, abs=1e-9)

    def test_history_too_short(self):
        fit = ArimaFit(ArimaSpec(2, 1, 0), c=0.0, phi=[0.1, 0.1], theta=[], sigma2=1.0, residuals=[])
        with pytest.raises(DataError):
            arima.forecast_one(fit, TimeSeries([1.0, 2.0]))

    def test_extended_history_continues_residuals(self):
        y = TestMovingAverage().series()
        spec = ArimaSpec(1, 0, 1)
        fit = arima.fit_arima(TimeSeries(y[:1000]), spec)
        e = arima.css_residuals(y[:1001], fit.c, fit.phi, fit.theta, 1)
        expected = fit.c + fit.phi[0] * y[1000] + fit.theta[0] * e[-1]
        assert arima.forecast_one(fit, TimeSeries(y[:1001])) == pytest.approx(expected, rel=1e-12)


class TestRolling:
    def test_constant_series(self):
        run = arima.rolling_arima(TimeSeries(np.full(100, 42.0)))
        assert np.allclose(run.predictions, 42.0, atol=1e-9)
        assert run.rmse == pytest.approx(0.0, abs=1e-9)

    def test_lengths_match_table1(self):
        s = synthetic.random_walk(403, seed=2)
        run = arima.rolling_arima(s)
        assert run.predictions.size == run.actuals.size == 120

    def test_refit_on_growing_history(self, monkeypatch):
        seen = []
        real = arima.fit_arima

        def spy(series, spec):
            seen.append(len(series))
            return real(series, spec)

        monkeypatch.setattr(arima, "fit_arima", spy)
        s = synthetic.random_walk(100, seed=3)
        arima.rolling_arima(s)
        assert seen == [70 + t for t in range(30)]

    def test_failure_carries_step(self):
        with pytest.raises(ForecastError) as info:
            arima.rolling_arima(TimeSeries(np.arange(20.0)), ArimaSpec(5, 1, 0), 0.5)
        assert info.value.step == 0

    @pytest.mark.parametrize("series", [
        synthetic.random_walk(400, seed=5),
        synthetic.trend_plus_noise(300, seed=6),
        synthetic.ar1(400, phi=0.8, seed=7),
    ], ids=["walk", "trend", "ar1"])
    def test_never_far_worse_than_naive(self, series):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StabilityWarning)
            run = arima.rolling_arima(series)
        assert run.rmse <= 3.0 * naive_rmse(series)

    @pytest.mark.slow
    def test_random_walk_rmse_near_sigma(self):
        s = synthetic.random_walk(2000, sigma=1.0, seed=2018)
        run = arima.rolling_arima(s, ArimaSpec(5, 1, 0), 0.70)
        assert run.rmse == pytest.approx(1.0, rel=0.10)
        assert run.rmse == pytest.approx(naive_rmse(s), rel=0.10)
