"""Rolling-LSTM test RMSE as a function of training epochs.

    python scripts/run_epoch_sweep.py [csv] [--column C] [--max-epochs N] [--workers K]
"""

import argparse
from pathlib import Path

from rollcast import load_csv
from rollcast.harness import epoch_sweep

DATA = Path(__file__).resolve().parent.parent / "data"


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("csv", nargs="?", default=str(DATA / "sine.csv"))
    ap.add_argument("--column", default="Adj Close")
    ap.add_argument("--max-epochs", type=int, default=20)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    series = load_csv(args.csv, args.column)
    result = epoch_sweep(series, range(1, args.max_epochs + 1), workers=args.workers)
    print(result.to_csv(), end="")
    best = min(result.points, key=lambda p: p[1])
    print(f"# best epoch {best[0]} rmse {best[1]:.6f}")


if __name__ == "__main__":
    main()
