"""ARIMA-vs-LSTM comparison reports, epoch sweeps and walk-forward mode selection."""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import arima, lstm
from .arima import ArimaSpec
from .core import TimeSeries
from .errors import ContractError, DomainError, RollcastError
from .lstm import TrainConfig
from .runs import ForecastRun, Method, rmse

logger = logging.getLogger(__name__)

__all__ = [
    "ComparisonReport", "ComparisonRow", "EpochSweepResult", "ForecastRun",
    "Method", "RollingMode", "epoch_sweep", "percent_reduction", "rmse",
    "rolling_mode", "run_comparison",
]

EPOCH_LIMIT = 100
REPORT_HEADER = ("dataset", "rmse_arima", "rmse_lstm", "pct_reduction")
SWEEP_HEADER = ("dataset", "epoch", "rmse")


def percent_reduction(base_rmse: float, new_rmse: float) -> float:
    """Signed percent change from ``base_rmse``; negative means improvement."""
    if not base_rmse > 0:
        raise DomainError(f"base RMSE must be positive, got {base_rmse}")
    return 100.0 * (new_rmse - base_rmse) / base_rmse


@dataclass(frozen=True)
class ComparisonRow:
    dataset: str
    rmse_arima: float = math.nan
    rmse_lstm: float = math.nan
    pct_reduction: float = math.nan
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class ComparisonReport:
    """Per-dataset RMSEs plus an average row.

    The average row takes arithmetic means of the two RMSE columns and then
    applies ``percent_reduction`` to those means; it is not the mean of the
    per-row percentages.
    """

    rows: tuple
    average_arima: float
    average_lstm: float
    average_pct: float
    runs: tuple = ()

    @classmethod
    def from_rows(cls, rows: Sequence[ComparisonRow], runs=()) -> "ComparisonReport":
        good = [r for r in rows if r.ok]
        if good:
            a = float(np.mean([r.rmse_arima for r in good]))
            b = float(np.mean([r.rmse_lstm for r in good]))
            pct = percent_reduction(a, b) if a > 0 else math.nan
        else:
            a = b = pct = math.nan
        return cls(tuple(rows), a, b, pct, tuple(runs))

    @property
    def failed(self) -> list:
        return [r for r in self.rows if not r.ok]

    def is_consistent(self) -> bool:
        """Every percent cell equals the formula applied to its own RMSE cells."""
        for r in self.rows:
            if r.ok and r.rmse_arima > 0 and r.pct_reduction != percent_reduction(r.rmse_arima, r.rmse_lstm):
                return False
        rebuilt = ComparisonReport.from_rows(self.rows)
        same = lambda x, y: (math.isnan(x) and math.isnan(y)) or x == y
        return (same(rebuilt.average_arima, self.average_arima)
                and same(rebuilt.average_lstm, self.average_lstm)
                and same(rebuilt.average_pct, self.average_pct))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        fmt = lambda v: "" if math.isnan(v) else f"{v:.3f}"
        for r in self.rows:
            w.writerow([r.dataset, fmt(r.rmse_arima), fmt(r.rmse_lstm), fmt(r.pct_reduction)])
        w.writerow(["Average", fmt(self.average_arima), fmt(self.average_lstm), fmt(self.average_pct)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        num = lambda v: None if math.isnan(v) else v
        return {
            "rows": [
                {"dataset": r.dataset, "rmse_arima": num(r.rmse_arima),
                 "rmse_lstm": num(r.rmse_lstm), "pct_reduction": num(r.pct_reduction),
                 "error": r.error}
                for r in self.rows
            ],
            "average": {"rmse_arima": num(self.average_arima),
                        "rmse_lstm": num(self.average_lstm),
                        "pct_reduction": num(self.average_pct)},
            "runs": [run.to_dict() for run in self.runs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


@dataclass(frozen=True)
class EpochSweepResult:
    dataset: str
    points: tuple  # (epoch, rmse), ascending epoch
    failures: tuple = ()  # (epoch, reason)

    def __post_init__(self):
        epochs = [e for e, _ in self.points]
        if any(b <= a for a, b in zip(epochs, epochs[1:])):
            raise ContractError("sweep epochs must be strictly increasing")
        if not all(math.isfinite(r) for _, r in self.points):
            raise ContractError("sweep RMSEs must be finite")

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(SWEEP_HEADER)
        for epoch, value in self.points:
            w.writerow([self.dataset, epoch, repr(value)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "points": [{"epoch": e, "rmse": r} for e, r in self.points],
            "failures": [{"epoch": e, "reason": why} for e, why in self.failures],
        }


def _map(fn, items, workers: int):
    """Order-preserving map, optionally across processes."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _compare_one(series, arima_spec, lstm_config, fraction):
    try:
        a = arima.rolling_arima(series, arima_spec, fraction)
        b = lstm.rolling_lstm(series, lstm_config, fraction)
    except RollcastError as exc:
        logger.warning("%s: comparison failed: %s", series.name, exc)
        return ComparisonRow(series.name, error=f"{type(exc).__name__}: {exc}"), ()
    pct = percent_reduction(a.rmse, b.rmse) if a.rmse > 0 else math.nan
    return ComparisonRow(series.name, a.rmse, b.rmse, pct), (a, b)


def run_comparison(
    datasets: Sequence[TimeSeries],
    arima_spec: ArimaSpec = ArimaSpec(),
    lstm_config: TrainConfig = TrainConfig(),
    fraction: float = 0.70,
    workers: int = 1,
) -> ComparisonReport:
    """Rolling ARIMA and rolling LSTM on every dataset, order preserved.

    A dataset that fails becomes an error row; the others still run.
    """
    if not datasets:
        raise ContractError("run_comparison needs at least one dataset")
    job = partial(_compare_one, arima_spec=arima_spec, lstm_config=lstm_config, fraction=fraction)
    results = _map(job, datasets, workers)
    rows = [row for row, _ in results]
    runs = [run for _, pair in results for run in pair]
    return ComparisonReport.from_rows(rows, runs)


def _sweep_one(epoch, series, lstm_config, fraction):
    config = TrainConfig(epochs=epoch, neurons=lstm_config.neurons, seed=lstm_config.seed,
                         batch_size=lstm_config.batch_size)
    try:
        return epoch, lstm.rolling_lstm(series, config, fraction).rmse, None
    except RollcastError as exc:
        return epoch, None, f"{type(exc).__name__}: {exc}"


def epoch_sweep(
    series: TimeSeries,
    epochs: Iterable[int] = range(1, EPOCH_LIMIT + 1),
    lstm_config: TrainConfig = TrainConfig(),
    fraction: float = 0.70,
    workers: int = 1,
) -> EpochSweepResult:
    """Full rolling-LSTM RMSE for each epoch count, all with the same seed."""
    epochs = sorted(set(int(e) for e in epochs))
    if not epochs:
        raise ContractError("epoch sweep needs at least one epoch value")
    if epochs[0] < 1:
        raise DomainError(f"epoch counts must be >= 1, got {epochs[0]}")
    if epochs[-1] > EPOCH_LIMIT:
        warnings.warn(
            f"epoch sweep up to {epochs[-1]} exceeds {EPOCH_LIMIT}; expect long runtimes",
            RuntimeWarning, stacklevel=2,
        )
    job = partial(_sweep_one, series=series, lstm_config=lstm_config, fraction=fraction)
    results = _map(job, epochs, workers)
    points = tuple((e, r) for e, r, _ in results if r is not None)
    failures = tuple((e, why) for e, _, why in results if why is not None)
    return EpochSweepResult(series.name, points, failures)


class RollingMode(str, enum.Enum):
    ONE_STEP = "one-step-no-reestimation"
    MULTI_STEP = "multi-step-no-reestimation"
    REESTIMATE = "multi-step-with-reestimation"


def rolling_mode(mode, method: Method = Method.ARIMA) -> Callable[..., ForecastRun]:
    """Walk-forward strategy for ``mode``.

    The returned callable takes ``(series, spec_or_config, fraction)``.
    ARIMA supports all three modes; the LSTM supports one-step forecasts and,
    through refitting, re-estimation.
    """
    try:
        mode = RollingMode(mode)
    except ValueError:
        raise ContractError(f"unknown rolling mode {mode!r}") from None
    method = Method(method)
    if method is Method.ARIMA:
        return {
            RollingMode.ONE_STEP: arima.one_step_arima,
            RollingMode.MULTI_STEP: arima.multi_step_arima,
            RollingMode.REESTIMATE: arima.rolling_arima,
        }[mode]
    if mode is RollingMode.ONE_STEP:
        return lstm.rolling_lstm
    if mode is RollingMode.REESTIMATE:
        return partial(lstm.rolling_lstm, refit=True)
    raise ContractError("the LSTM does not support multi-step forecasts without re-estimation")


def runs_to_csv(runs: Sequence[ForecastRun]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("dataset", "method", "step", "actual", "predicted"))
    for run in runs:
        for k, (a, p) in enumerate(zip(run.actuals, run.predictions)):
            w.writerow([run.dataset, run.method.value, k, repr(float(a)), repr(float(p))])
    return buf.getvalue()
