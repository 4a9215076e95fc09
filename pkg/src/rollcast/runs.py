"""Forecast run records and the RMSE metric."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError


class Method(str, enum.Enum):
    ARIMA = "ARIMA"
    LSTM = "LSTM"


def rmse(actuals, predictions) -> float:
    """Root of the mean squared difference between actuals and predictions."""
    a = np.asarray(actuals, dtype=np.float64).reshape(-1)
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    if a.shape != p.shape:
        raise ContractError(f"length mismatch: {a.size} actuals vs {p.size} predictions")
    if a.size == 0:
        raise ContractError("rmse of an empty sequence is undefined")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(p))):
        raise ContractError("rmse inputs must be finite")
    resid = a - p
    return math.sqrt(float(np.dot(resid, resid)) / a.size)


@dataclass(frozen=True, eq=False)
class ForecastRun:
    """Paired actual/predicted values from one walk-forward pass."""

    dataset: str
    method: Method
    actuals: np.ndarray
    predictions: np.ndarray
    rmse: float
    config_summary: str = ""

    def __post_init__(self):
        a = np.asarray(self.actuals, dtype=np.float64).reshape(-1)
        p = np.asarray(self.predictions, dtype=np.float64).reshape(-1)
        if a.size != p.size or a.size < 1:
            raise ContractError(
                f"{self.dataset}: need equal non-empty actuals/predictions, "
                f"got {a.size} and {p.size}"
            )
        object.__setattr__(self, "actuals", a)
        object.__setattr__(self, "predictions", p)
        object.__setattr__(self, "method", Method(self.method))

    @classmethod
    def build(cls, dataset, method, actuals, predictions, config_summary=""):
        return cls(dataset, method, actuals, predictions,
                   rmse(actuals, predictions), config_summary)

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "method": self.method.value,
            "config": self.config_summary,
            "rmse": self.rmse,
            "actuals": self.actuals.tolist(),
            "predictions": self.predictions.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict, rel_tol: float = 1e-12) -> "ForecastRun":
        run = cls(data["dataset"], data["method"], data["actuals"],
                  data["predictions"], float(data["rmse"]), data.get("config", ""))
        recomputed = rmse(run.actuals, run.predictions)
        if not math.isclose(recomputed, run.rmse, rel_tol=rel_tol):
            raise ContractError(
                f"{run.dataset}: stored rmse {run.rmse!r} disagrees with "
                f"recomputed {recomputed!r}"
            )
        return run
