"""Rolling ARIMA(5,1,0) vs rolling LSTM on the bundled synthetic series.

    python scripts/run_comparison.py [--epochs N] [--workers K]
"""

import argparse
from pathlib import Path

from rollcast import load_csv
from rollcast.harness import run_comparison
from rollcast.lstm import TrainConfig

DATA = Path(__file__).resolve().parent.parent / "data"


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--epochs", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    series = [load_csv(DATA / f"{name}.csv", "Adj Close") for name in ("walk", "trend", "sine")]
    series.append(load_csv(DATA / "ar1_fred.csv", "VALUE"))
    report = run_comparison(series, lstm_config=TrainConfig(epochs=args.epochs), workers=args.workers)
    print(report.to_csv(), end="")


if __name__ == "__main__":
    main()
