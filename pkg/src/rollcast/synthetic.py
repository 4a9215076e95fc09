"""Seeded synthetic series used by the tests, scripts and bundled data files."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .core import TimeSeries


def month_labels(n: int, start_year: int = 1985) -> tuple:
    return tuple(f"{start_year + k // 12:04d}-{k % 12 + 1:02d}-01" for k in range(n))


def sine_wave(n: int = 400, period: float = 40.0, amplitude: float = 1.0,
              name: str = "sine") -> TimeSeries:
    t = np.arange(n)
    return TimeSeries(amplitude * np.sin(2 * np.pi * t / period), month_labels(n), name)


def random_walk(n: int = 2000, sigma: float = 1.0, seed: int = 0, start: float = 0.0,
                name: str = "random_walk") -> TimeSeries:
    steps = np.random.default_rng(seed).normal(0.0, sigma, n)
    steps[0] = 0.0
    return TimeSeries(start + np.cumsum(steps), month_labels(n), name)


def ar1(n: int = 2000, phi: float = 0.6, sigma: float = 1.0, c: float = 0.0,
        seed: int = 0, name: str = "ar1") -> TimeSeries:
    eps = np.random.default_rng(seed).normal(0.0, sigma, n)
    x = np.empty(n)
    x[0] = c / (1 - phi) + eps[0]
    for t in range(1, n):
        x[t] = c + phi * x[t - 1] + eps[t]
    return TimeSeries(x, month_labels(n), name)


def trend_plus_noise(n: int = 300, slope: float = 0.5, level: float = 100.0,
                     sigma: float = 2.0, seed: int = 0, name: str = "trend") -> TimeSeries:
    noise = np.random.default_rng(seed).normal(0.0, sigma, n)
    return TimeSeries(level + slope * np.arange(n) + noise, month_labels(n), name)


def write_yahoo_csv(series: TimeSeries, path) -> None:
    """Yahoo layout; every price column carries the series value."""
    labels = series.labels or month_labels(len(series))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"])
        for label, v in zip(labels, series.values):
            cell = f"{v:.6f}"
            w.writerow([label, cell, cell, cell, cell, cell, 0])


def write_fred_csv(series: TimeSeries, path) -> None:
    labels = series.labels or month_labels(len(series))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["DATE", "VALUE"])
        for label, v in zip(labels, series.values):
            w.writerow([label, f"{v:.6f}"])
