"""Rolling ARIMA and rolling LSTM forecasters with a walk-forward benchmark harness."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ScaleParams,
    SplitSeries,
    TimeSeries,
    apply_scaler,
    difference,
    fit_scaler,
    inverse_difference,
    invert_scaler,
    load_csv,
    split,
    to_supervised,
)
from .runs import ForecastRun, Method, rmse  # noqa: E402

__all__ = [
    "ForecastRun", "Method", "ScaleParams", "SplitSeries", "TimeSeries",
    "apply_scaler", "difference", "fit_scaler", "inverse_difference",
    "invert_scaler", "load_csv", "rmse", "split", "to_supervised",
]
