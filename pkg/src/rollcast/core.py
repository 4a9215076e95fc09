"""Series container, CSV ingestion and the transforms both forecasters share."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    EmptyDataError,
    ParseError,
    SchemaError,
    ScalerError,
    SplitError,
)

logger = logging.getLogger(__name__)

# Yahoo writes "null", FRED writes "." for missing observations.
MISSING_TOKENS = frozenset({"", "null", "."})


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered finite observations, optionally labelled by ISO date strings.

    ``dropped`` counts rows skipped during ingestion because the target
    cell was missing.
    """

    values: np.ndarray
    labels: Optional[tuple[str, ...]] = None
    name: str = "series"
    dropped: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(values)):
            raise DomainError(f"{self.name}: series contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != len(values):
                raise DomainError(
                    f"{self.name}: {len(labels)} labels for {len(values)} values"
                )
            for k in range(1, len(labels)):
                if not labels[k - 1] < labels[k]:
                    raise DomainError(
                        f"{self.name}: labels not strictly increasing at "
                        f"position {k} ({labels[k - 1]!r} >= {labels[k]!r})"
                    )
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.values)

    def slice(self, start: int = 0, stop: Optional[int] = None) -> "TimeSeries":
        labels = None if self.labels is None else self.labels[start:stop]
        return TimeSeries(self.values[start:stop], labels, self.name)

    def extend(self, value: float, label: Optional[str] = None) -> "TimeSeries":
        """Return a copy with one more observation appended."""
        labels = None
        if self.labels is not None and label is not None:
            labels = self.labels + (label,)
        return TimeSeries(np.append(self.values, value), labels, self.name)


@dataclass(frozen=True)
class SplitSeries:
    train: TimeSeries
    test: TimeSeries
    fraction: float


@dataclass(frozen=True)
class ScaleParams:
    """Min-max map of ``[min, max]`` onto ``[-1, 1]``."""

    min: float
    max: float

    def __post_init__(self):
        if not self.max > self.min:
            raise ScalerError(
                f"scaler needs max > min, got min={self.min!r} max={self.max!r}"
            )


def load_csv(path, column: str) -> TimeSeries:
    """Read one numeric column of a dated CSV file, oldest row first.

    The first column supplies the labels. Rows whose target cell is empty,
    ``null`` or ``.`` are skipped and counted in ``TimeSeries.dropped``.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDataError(f"{path}: file is empty") from None
        if column not in header:
            raise SchemaError(f"{path}: no column {column!r} in header {header}")
        col = header.index(column)

        labels, values, dropped = [], [], 0
        # row numbers are 1-based file lines, header is line 1
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            cell = row[col].strip() if col < len(row) else ""
            if cell.lower() in MISSING_TOKENS:
                dropped += 1
                continue
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: row {lineno}: cannot parse {cell!r} in column {column!r}",
                    row=lineno,
                ) from None
            if not math.isfinite(value):
                raise ParseError(
                    f"{path}: row {lineno}: non-finite value {cell!r}", row=lineno
                )
            labels.append(row[0].strip())
            values.append(value)

    if not values:
        raise EmptyDataError(f"{path}: no usable rows in column {column!r}")
    if dropped:
        logger.info("%s: dropped %d rows with missing %r", path, dropped, column)
    return TimeSeries(np.array(values), tuple(labels), path.stem, dropped)


def train_size(n: int, fraction: float) -> int:
    """ceil(fraction * n), computed exactly on the decimal value of ``fraction``."""
    return math.ceil(Fraction(str(fraction)) * n)


def split(series: TimeSeries, fraction: float = 0.70) -> SplitSeries:
    if not 0.0 < fraction < 1.0:
        raise DomainError(f"fraction must lie in (0, 1), got {fraction}")
    n = len(series)
    if n < 2:
        raise SplitError(f"{series.name}: need at least 2 observations, got {n}")
    size = train_size(n, fraction)
    if size >= n:
        raise SplitError(
            f"{series.name}: fraction {fraction} of {n} observations leaves no test data"
        )
    return SplitSeries(series.slice(0, size), series.slice(size), fraction)


def difference(series: TimeSeries, d: int = 1) -> TimeSeries:
    if d < 0:
        raise DomainError(f"differencing order must be >= 0, got {d}")
    if d >= len(series):
        raise DomainError(f"cannot difference {len(series)} values {d} times")
    values = np.diff(series.values, n=d) if d else series.values
    labels = None if series.labels is None else series.labels[d:]
    return TimeSeries(values, labels, series.name)


def inverse_difference(last_observed: float, delta: float) -> float:
    if not (math.isfinite(last_observed) and math.isfinite(delta)):
        raise DomainError(
            f"inverse_difference needs finite inputs, got {last_observed!r}, {delta!r}"
        )
    return last_observed + delta


def fit_scaler(train: TimeSeries) -> ScaleParams:
    if len(train) == 0:
        raise EmptyDataError("cannot fit a scaler on an empty series")
    return ScaleParams(float(train.values.min()), float(train.values.max()))


def apply_scaler(params: ScaleParams, value):
    # no clamping: out-of-range test values map outside [-1, 1]
    return 2.0 * (value - params.min) / (params.max - params.min) - 1.0


def invert_scaler(params: ScaleParams, value):
    return (value + 1.0) * (params.max - params.min) / 2.0 + params.min


def to_supervised(
    series: TimeSeries | Sequence[float], lag: int = 1
) -> list[tuple[np.ndarray, float]]:
    """Sliding ``(values[i:i+lag], values[i+lag])`` pairs."""
    values = series.values if isinstance(series, TimeSeries) else np.asarray(series, float)
    if lag < 1:
        raise DomainError(f"lag must be positive, got {lag}")
    if lag >= len(values):
        raise DomainError(f"lag {lag} needs more than {len(values)} values")
    return [
        (values[i : i + lag].copy(), float(values[i + lag]))
        for i in range(len(values) - lag)
    ]
