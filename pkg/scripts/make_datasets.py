"""Regenerate the synthetic CSV files under data/.

    python scripts/make_datasets.py [outdir]
"""

import sys
from pathlib import Path

from rollcast import synthetic


def main(outdir="data"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    synthetic.write_yahoo_csv(synthetic.sine_wave(400, name="sine"), out / "sine.csv")
    synthetic.write_yahoo_csv(
        synthetic.random_walk(403, sigma=25.0, seed=11, start=11500.0, name="walk"),
        out / "walk.csv",
    )
    synthetic.write_yahoo_csv(
        synthetic.trend_plus_noise(391, slope=0.8, level=300.0, sigma=4.0, seed=3, name="trend"),
        out / "trend.csv",
    )
    synthetic.write_fred_csv(
        synthetic.ar1(606, phi=0.7, sigma=0.5, c=30.0, seed=5, name="ar1"), out / "ar1_fred.csv"
    )
    for path in sorted(out.glob("*.csv")):
        print(path)


if __name__ == "__main__":
    main(*sys.argv[1:])
