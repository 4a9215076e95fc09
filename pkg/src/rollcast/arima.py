"""ARIMA(p, d, q) by conditional sum of squares, plus walk-forward drivers.

The model on the d-times differenced series ``w`` is

    w_t = c + sum_i phi_i w_{t-i} + e_t + sum_j theta_j e_{t-j}

Residuals before ``start = max(p, q)`` are conditioned to zero. With q = 0
the CSS minimiser is the least-squares AR regression and is solved in closed
form; with q > 0 a Hannan-Rissanen start is refined by L-BFGS.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import ClassVar, Optional

import numpy as np
from scipy import optimize, signal

from .core import TimeSeries, difference, inverse_difference, split
from .errors import (
    ConvergenceError,
    DataError,
    DomainError,
    ForecastError,
    RollcastError,
)
from .runs import ForecastRun, Method


class StabilityWarning(UserWarning):
    """Fitted coefficients fall outside the stationary/invertible region."""


@dataclass(frozen=True)
class ArimaSpec:
    p: int = 5
    d: int = 1
    q: int = 0
    include_constant: bool = True

    max_order: ClassVar[int] = 20

    def __post_init__(self):
        for name in ("p", "d", "q"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise DomainError(f"ARIMA order {name} must be a non-negative int, got {v!r}")
            if v > self.max_order:
                raise DomainError(f"ARIMA order {name}={v} exceeds bound {self.max_order}")

    @property
    def start(self) -> int:
        return max(self.p, self.q)

    def __str__(self):
        return f"ARIMA({self.p},{self.d},{self.q})"


@dataclass(frozen=True, eq=False)
class ArimaFit:
    """Estimated coefficients for one ArimaSpec.

    ``residuals`` are the in-sample CSS residuals for the usable points of
    the differenced fit series; ``nobs`` is that series' length (None for
    hand-built fits whose residuals are taken to end where history ends).
    """

    spec: ArimaSpec
    c: float
    phi: np.ndarray
    theta: np.ndarray
    sigma2: float
    residuals: np.ndarray
    nobs: Optional[int] = None
    css: float = field(default=float("nan"))

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64).reshape(-1)
        theta = np.asarray(self.theta, dtype=np.float64).reshape(-1)
        if phi.size != self.spec.p or theta.size != self.spec.q:
            raise DomainError(
                f"{self.spec} needs {self.spec.p} AR and {self.spec.q} MA "
                f"coefficients, got {phi.size} and {theta.size}"
            )
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(
            self, "residuals", np.asarray(self.residuals, dtype=np.float64).reshape(-1)
        )

    @property
    def resid_mean(self) -> float:
        return float(self.residuals.mean()) if self.residuals.size else 0.0


def css_residuals(w: np.ndarray, c: float, phi, theta, start: int) -> np.ndarray:
    """Residuals e_start..e_{n-1} of the ARMA recursion with pre-sample e = 0."""
    w = np.asarray(w, dtype=np.float64)
    n = w.size
    u = w[start:] - c
    for i, ph in enumerate(phi, start=1):
        u = u - ph * w[start - i : n - i]
    if len(theta) == 0:
        return u
    # e_t + sum theta_j e_{t-j} = u_t, zero initial conditions
    return signal.lfilter([1.0], np.r_[1.0, theta], u)


def _lag_matrix(w: np.ndarray, lags: int, start: int, constant: bool) -> np.ndarray:
    n = w.size
    cols = [np.ones(n - start)] if constant else []
    cols += [w[start - i : n - i] for i in range(1, lags + 1)]
    if not cols:
        return np.empty((n - start, 0))
    return np.column_stack(cols)


def _hannan_rissanen(w: np.ndarray, spec: ArimaSpec) -> np.ndarray:
    """Two-stage starting values (c, phi, theta) for q > 0."""
    p, q = spec.p, spec.q
    n = w.size
    m = min(max(p + q, int(round(math.log(n) ** 2 / 2))), n // 4)
    m = max(m, 1)
    zero = np.zeros(int(spec.include_constant) + p + q)
    if n - m - q - max(p, q) < p + q + 5:
        return zero
    X = _lag_matrix(w, m, m, spec.include_constant)
    beta, *_ = np.linalg.lstsq(X, w[m:], rcond=None)
    ehat = np.zeros(n)
    ehat[m:] = w[m:] - X @ beta

    start = m + q
    cols = [np.ones(n - start)] if spec.include_constant else []
    cols += [w[start - i : n - i] for i in range(1, p + 1)]
    cols += [ehat[start - j : n - j] for j in range(1, q + 1)]
    beta2, *_ = np.linalg.lstsq(np.column_stack(cols), w[start:], rcond=None)
    if not np.all(np.isfinite(beta2)):
        return zero
    return beta2


def _css_gradient(w: np.ndarray, x: np.ndarray, spec: ArimaSpec):
    """CSS and its exact gradient with respect to (c, phi, theta).

    Each residual sensitivity obeys the same MA recursion as the residuals
    themselves, driven by minus the corresponding regressor.
    """
    c, phi, theta = _unpack(x, spec)
    start, n = spec.start, w.size
    with np.errstate(all="ignore"):
        e = css_residuals(w, c, phi, theta, start)
        a = np.r_[1.0, theta]
        forcing = []
        if spec.include_constant:
            forcing.append(-np.ones(n - start))
        forcing += [-w[start - i : n - i] for i in range(1, spec.p + 1)]
        for j in range(1, spec.q + 1):
            lagged = np.zeros(n - start)
            lagged[j:] = e[:-j] if j < e.size else 0.0
            forcing.append(-lagged)
        grad = np.array([2.0 * np.dot(e, signal.lfilter([1.0], a, u)) for u in forcing])
        return float(np.dot(e, e)), grad


def _unpack(x: np.ndarray, spec: ArimaSpec):
    k = int(spec.include_constant)
    c = float(x[0]) if k else 0.0
    return c, x[k : k + spec.p], x[k + spec.p : k + spec.p + spec.q]


def _check_stability(fit_phi, fit_theta, spec: ArimaSpec):
    if fit_phi.size:
        roots = np.roots(np.r_[1.0, -fit_phi])
        if np.any(np.abs(roots) >= 1.0):
            warnings.warn(f"{spec}: AR part is not stationary", StabilityWarning, stacklevel=3)
    if fit_theta.size:
        roots = np.roots(np.r_[1.0, fit_theta])
        if np.any(np.abs(roots) >= 1.0):
            warnings.warn(f"{spec}: MA part is not invertible", StabilityWarning, stacklevel=3)


def fit_arima(series: TimeSeries, spec: ArimaSpec = ArimaSpec()) -> ArimaFit:
    """Estimate (c, phi, theta) by conditional sum of squares."""
    p, d, q = spec.p, spec.d, spec.q
    if len(series) <= d + max(p, q) + 10:
        raise DataError(
            f"{series.name}: {len(series)} observations too few for {spec} "
            f"(need more than {d + max(p, q) + 10})"
        )
    w = difference(series, d).values
    start = spec.start
    n_eff = w.size - start

    baseline = float(np.dot(w[start:], w[start:]))

    def css(x):
        c, phi, theta = _unpack(x, spec)
        e = css_residuals(w, c, phi, theta, start)
        return float(np.dot(e, e))

    def css_and_grad(x):
        value, grad = _css_gradient(w, x, spec)
        if not (np.isfinite(value) and np.all(np.isfinite(grad))):
            # explosive MA filter: report a wall the line search backs off from
            return 1e300, np.zeros_like(x)
        return value, grad

    if q == 0:
        X = _lag_matrix(w, p, start, spec.include_constant)
        if X.shape[1]:
            x, *_ = np.linalg.lstsq(X, w[start:], rcond=None)
        else:
            x = np.zeros(0)
    else:
        x0 = _hannan_rissanen(w, spec)
        best = None
        for init in (x0, np.zeros_like(x0)):
            res = optimize.minimize(
                css_and_grad, init, jac=True, method="L-BFGS-B",
                options={"ftol": 1e-10, "gtol": 1e-9, "maxiter": 500},
            )
            cand = res.x if css(res.x) <= css(init) else init
            if best is None or css(cand) < css(best):
                best = cand
            if css(best) <= baseline:
                break
        x = best

    value = css(x)
    if not value <= baseline:
        raise ConvergenceError(
            f"{series.name}: {spec} CSS {value:.6g} above zero-coefficient "
            f"baseline {baseline:.6g}",
            css=value, baseline_css=baseline,
        )
    c, phi, theta = _unpack(x, spec)
    _check_stability(np.asarray(phi), np.asarray(theta), spec)
    resid = css_residuals(w, c, phi, theta, start)
    return ArimaFit(
        spec=spec, c=c, phi=np.array(phi), theta=np.array(theta),
        sigma2=max(value / n_eff, 0.0), residuals=resid, nobs=w.size, css=value,
    )


def _residual_tail(fit: ArimaFit, w: np.ndarray) -> np.ndarray:
    """Residuals aligned with the end of ``w`` (at least the last q)."""
    spec = fit.spec
    if fit.nobs is None or w.size == fit.nobs:
        return fit.residuals
    if w.size < fit.nobs:
        start = min(spec.start, w.size)
        return css_residuals(w, fit.c, fit.phi, fit.theta, start)
    # history runs past the fit sample: continue the recursion forward
    e = list(fit.residuals)
    offset = fit.nobs - len(e)
    for t in range(fit.nobs, w.size):
        val = w[t] - fit.c
        for i, ph in enumerate(fit.phi, start=1):
            val -= ph * w[t - i]
        for j, th in enumerate(fit.theta, start=1):
            k = t - j - offset
            if k >= 0:
                val -= th * e[k]
        e.append(val)
    return np.asarray(e)


def forecast_one(fit: ArimaFit, history: TimeSeries) -> float:
    """One-step-ahead forecast in the original units of ``history``."""
    spec = fit.spec
    if len(history) < spec.p + spec.d or len(history) <= spec.d:
        raise DataError(
            f"{history.name}: history of {len(history)} too short for {spec}"
        )
    w = np.diff(history.values, n=spec.d) if spec.d else np.asarray(history.values)
    e = _residual_tail(fit, w)

    w_hat = fit.c
    for i, ph in enumerate(fit.phi, start=1):
        w_hat += ph * w[-i]
    for j, th in enumerate(fit.theta, start=1):
        if j <= e.size:
            w_hat += th * e[-j]

    # undo differencing level by level: x^(k) = last of x^(k) + predicted x^(k+1)
    y = float(w_hat)
    for k in range(spec.d - 1, -1, -1):
        level = np.diff(history.values, n=k) if k else history.values
        y = inverse_difference(float(level[-1]), y)
    return y


def _summary(spec: ArimaSpec, fraction: float, mode: str) -> str:
    return f"{spec} const={spec.include_constant} fraction={fraction} mode={mode}"


def rolling_arima(
    series: TimeSeries, spec: ArimaSpec = ArimaSpec(), fraction: float = 0.70
) -> ForecastRun:
    """Walk forward through the test split, refitting before every forecast."""
    parts = split(series, fraction)
    history = list(parts.train.values)
    predictions = []
    for t, observed in enumerate(parts.test.values):
        hist = TimeSeries(np.array(history), name=series.name)
        try:
            fit = fit_arima(hist, spec)
            predictions.append(forecast_one(fit, hist))
        except RollcastError as exc:
            raise ForecastError(
                f"{series.name}: rolling ARIMA failed at test step {t}: {exc}", step=t
            ) from exc
        history.append(float(observed))
    return ForecastRun.build(
        series.name, Method.ARIMA, parts.test.values, predictions,
        _summary(spec, fraction, "multi-step-with-reestimation"),
    )


def one_step_arima(
    series: TimeSeries, spec: ArimaSpec = ArimaSpec(), fraction: float = 0.70
) -> ForecastRun:
    """Fit once on the training split, then one-step forecasts fed by actuals."""
    parts = split(series, fraction)
    fit = fit_arima(parts.train, spec)
    values = series.values
    n_train = len(parts.train)
    predictions = []
    for t in range(len(parts.test)):
        hist = TimeSeries(values[: n_train + t], name=series.name)
        try:
            predictions.append(forecast_one(fit, hist))
        except RollcastError as exc:
            raise ForecastError(
                f"{series.name}: one-step ARIMA failed at test step {t}: {exc}", step=t
            ) from exc
    return ForecastRun.build(
        series.name, Method.ARIMA, parts.test.values, predictions,
        _summary(spec, fraction, "one-step-no-reestimation"),
    )


def multi_step_arima(
    series: TimeSeries, spec: ArimaSpec = ArimaSpec(), fraction: float = 0.70
) -> ForecastRun:
    """Fit once, then forecast the whole test horizon feeding back predictions."""
    parts = split(series, fraction)
    fit = fit_arima(parts.train, spec)
    history = list(parts.train.values)
    predictions = []
    for t in range(len(parts.test)):
        hist = TimeSeries(np.array(history), name=series.name)
        try:
            yhat = forecast_one(fit, hist)
        except RollcastError as exc:
            raise ForecastError(
                f"{series.name}: multi-step ARIMA failed at test step {t}: {exc}", step=t
            ) from exc
        predictions.append(yhat)
        history.append(yhat)
    return ForecastRun.build(
        series.name, Method.ARIMA, parts.test.values, predictions,
        _summary(spec, fraction, "multi-step-no-reestimation"),
    )
