"""Command-line entry point.

Every run writes its output file plus ``<output>.manifest.json``, the fully
resolved configuration; ``rollcast replay <manifest>`` reruns it. Exit
status is 0 on success, 1 when some datasets failed, 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, harness
from .arima import ArimaSpec
from .core import load_csv
from .errors import RollcastError
from .harness import ComparisonReport, ComparisonRow, RollingMode
from .lstm import TrainConfig

logger = logging.getLogger("rollcast")

OUTPUT_DIR_ENV = "ROLLCAST_OUTPUT_DIR"

# manifest keys; worker count and verbosity change nothing in the output
CONFIG_KEYS = (
    "command", "inputs", "column", "fraction", "order", "include_constant",
    "mode", "epochs", "neurons", "seed", "batch_size", "refit", "epoch_range",
    "output", "format",
)


class UsageError(Exception):
    pass


def _order(text):
    try:
        p, d, q = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"order must look like 5,1,0, got {text!r}") from None
    return [p, d, q]


def _epoch_range(text):
    try:
        lo, hi = (int(v) for v in text.split("-"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"epoch range must look like 1-100, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad epoch range {text!r}")
    return [lo, hi]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rollcast", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rollcast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", "-i", nargs="+", dest="inputs", required=True,
                       help="CSV files, oldest row first")
        p.add_argument("--column", default="Adj Close", help="value column (default: %(default)s)")
        p.add_argument("--fraction", type=float, default=0.70, help="training fraction")
        p.add_argument("--output", "-o", help=f"output file (default: ${OUTPUT_DIR_ENV} or cwd)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--workers", type=int, default=1, help="parallel processes")
        p.add_argument("--verbose", "-v", action="store_true")

    def arima_opts(p):
        p.add_argument("--order", type=_order, default=[5, 1, 0], help="p,d,q (default 5,1,0)")
        p.add_argument("--no-constant", dest="include_constant", action="store_false")

    def lstm_opts(p):
        p.add_argument("--epochs", type=int, default=1)
        p.add_argument("--neurons", type=int, default=4)
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--batch-size", type=int, default=1)

    p = sub.add_parser("forecast-arima", help="rolling ARIMA forecasts")
    common(p)
    arima_opts(p)
    p.add_argument("--mode", choices=[m.value for m in RollingMode],
                   default=RollingMode.REESTIMATE.value)

    p = sub.add_parser("forecast-lstm", help="rolling LSTM forecasts")
    common(p)
    lstm_opts(p)
    p.add_argument("--refit", action="store_true", help="retrain before every test forecast")

    p = sub.add_parser("compare", help="ARIMA vs LSTM RMSE report")
    common(p)
    arima_opts(p)
    lstm_opts(p)

    p = sub.add_parser("epoch-sweep", help="rolling-LSTM RMSE for a range of epoch counts")
    common(p)
    lstm_opts(p)
    p.add_argument("--epoch-range", type=_epoch_range, default=[1, harness.EPOCH_LIMIT])

    p = sub.add_parser("validate-data", help="check CSV inputs without running models")
    common(p)

    p = sub.add_parser("replay", help="rerun a manifest")
    p.add_argument("manifest")
    p.add_argument("--output", "-o", help="override the manifest's output path")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--verbose", "-v", action="store_true")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    defaults = {
        "order": None, "include_constant": None, "mode": None, "epochs": None,
        "neurons": None, "seed": None, "batch_size": None, "refit": None,
        "epoch_range": None, "output": None, "format": "csv",
    }
    cfg = {k: getattr(args, k, defaults.get(k)) for k in CONFIG_KEYS}
    if cfg["output"] is None:
        out_dir = Path(os.environ.get(OUTPUT_DIR_ENV, "."))
        cfg["output"] = str(out_dir / f"{cfg['command']}.{cfg['format']}")
    return cfg


def _emit(msg: str):
    print(msg, flush=True)


def _arima_spec(cfg) -> ArimaSpec:
    p, d, q = cfg["order"]
    return ArimaSpec(p, d, q, include_constant=cfg["include_constant"])


def _train_config(cfg, epochs=None) -> TrainConfig:
    return TrainConfig(epochs=epochs or cfg["epochs"], neurons=cfg["neurons"],
                       seed=cfg["seed"], batch_size=cfg["batch_size"])


def _load_all(cfg):
    """(path, series-or-None, error-or-None) for each input, in order."""
    out = []
    for path in cfg["inputs"]:
        try:
            out.append((path, load_csv(path, cfg["column"]), None))
        except (RollcastError, UnicodeDecodeError) as exc:
            out.append((path, None, f"{type(exc).__name__}: {exc}"))
    return out


def _run_forecasts(cfg, loaded, workers):
    runs, failures = [], 0
    if cfg["command"] == "forecast-arima":
        strategy = harness.rolling_mode(cfg["mode"], harness.Method.ARIMA)
        model = _arima_spec(cfg)
    else:
        mode = RollingMode.REESTIMATE if cfg["refit"] else RollingMode.ONE_STEP
        strategy = harness.rolling_mode(mode, harness.Method.LSTM)
        model = _train_config(cfg)
    for path, series, err in loaded:
        if err is None:
            try:
                run = strategy(series, model, cfg["fraction"])
            except RollcastError as exc:
                err = f"{type(exc).__name__}: {exc}"
        if err is not None:
            failures += 1
            _emit(f"FAIL {path}: {err}")
            continue
        runs.append(run)
        _emit(f"{run.method.value} {run.dataset}: RMSE {run.rmse:.6f} over {run.actuals.size} steps")
    if cfg["format"] == "csv":
        text = harness.runs_to_csv(runs)
    else:
        text = json.dumps({"runs": [r.to_dict() for r in runs]}, indent=2) + "\n"
    return text, failures


def _run_compare(cfg, loaded, workers):
    good = [s for _, s, err in loaded if err is None]
    report = (harness.run_comparison(good, _arima_spec(cfg), _train_config(cfg),
                                     cfg["fraction"], workers=workers) if good else None)
    rows, it = [], iter(report.rows if report else ())
    for path, series, err in loaded:
        rows.append(next(it) if err is None else ComparisonRow(Path(path).stem, error=err))
    report = ComparisonReport.from_rows(rows, report.runs if report else ())
    for r in report.rows:
        if r.ok:
            _emit(f"{r.dataset}: ARIMA {r.rmse_arima:.3f} LSTM {r.rmse_lstm:.3f} ({r.pct_reduction:+.3f}%)")
        else:
            _emit(f"FAIL {r.dataset}: {r.error}")
    text = report.to_csv() if cfg["format"] == "csv" else report.to_json()
    return text, len(report.failed)


def _run_sweep(cfg, loaded, workers):
    lo, hi = cfg["epoch_range"]
    sweeps, failures = [], 0
    for path, series, err in loaded:
        if err is not None:
            failures += 1
            _emit(f"FAIL {path}: {err}")
            continue
        result = harness.epoch_sweep(series, range(lo, hi + 1), _train_config(cfg, 1),
                                     cfg["fraction"], workers=workers)
        for epoch, why in result.failures:
            _emit(f"FAIL {series.name} epoch {epoch}: {why}")
        failures += bool(result.failures)
        sweeps.append(result)
        _emit(f"{series.name}: {len(result.points)} sweep points")
    if cfg["format"] == "csv":
        text = "".join(s.to_csv(header=(k == 0)) for k, s in enumerate(sweeps))
        if not sweeps:
            text = ",".join(harness.SWEEP_HEADER) + "\n"
    else:
        text = json.dumps({"sweeps": [s.to_dict() for s in sweeps]}, indent=2) + "\n"
    return text, failures


def _run_validate(cfg, loaded, workers):
    fields = ("file", "status", "rows", "dropped", "first", "last", "message")
    records, failures = [], 0
    for path, series, err in loaded:
        if err is None:
            first, last = (series.labels[0], series.labels[-1]) if series.labels else ("", "")
            _emit(f"OK {path}: {len(series)} rows, {series.dropped} dropped, {first}..{last}")
            records.append({"file": path, "status": "ok", "rows": len(series),
                            "dropped": series.dropped, "first": first, "last": last,
                            "message": ""})
        else:
            failures += 1
            _emit(f"FAIL {path}: {err}")
            records.append({"file": path, "status": "error", "rows": 0, "dropped": 0,
                            "first": "", "last": "", "message": err})
    if cfg["format"] == "json":
        return json.dumps({"files": records}, indent=2) + "\n", failures
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(records)
    return buf.getvalue(), failures


HANDLERS = {
    "forecast-arima": _run_forecasts,
    "forecast-lstm": _run_forecasts,
    "compare": _run_compare,
    "epoch-sweep": _run_sweep,
    "validate-data": _run_validate,
}


def execute(cfg: dict, workers: int = 1) -> int:
    """Run a resolved configuration; returns the exit status."""
    if cfg["command"] not in HANDLERS:
        raise UsageError(f"unknown command {cfg['command']!r}")
    missing = [p for p in cfg["inputs"] if not Path(p).is_file()]
    if missing:
        raise UsageError(f"input file(s) not found: {', '.join(missing)}")
    if not 0.0 < cfg["fraction"] < 1.0:
        raise UsageError(f"--fraction must lie in (0, 1), got {cfg['fraction']}")
    try:
        if cfg["order"] is not None:
            _arima_spec(cfg)
        if cfg["epochs"] is not None:
            _train_config(cfg)
    except RollcastError as exc:
        raise UsageError(str(exc)) from None

    _emit("config " + json.dumps(cfg, sort_keys=True))
    loaded = _load_all(cfg)
    text, failures = HANDLERS[cfg["command"]](cfg, loaded, workers)

    out = Path(cfg["output"])
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    manifest = Path(str(out) + ".manifest.json")
    manifest.write_text(json.dumps({"rollcast": __version__, **cfg}, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
    _emit(f"wrote {out} and {manifest}")
    return 1 if failures else 0


def load_manifest(path, output=None) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    missing = [k for k in CONFIG_KEYS if k not in data]
    if missing:
        raise UsageError(f"{path}: manifest lacks {missing}")
    cfg = {k: data[k] for k in CONFIG_KEYS}
    if output is not None:
        cfg["output"] = output
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        if args.command == "replay":
            cfg = load_manifest(args.manifest, args.output)
        else:
            cfg = resolve_config(args)
        if args.workers < 1:
            raise UsageError("--workers must be positive")
        return execute(cfg, workers=args.workers)
    except (UsageError, OSError, json.JSONDecodeError) as exc:
        print(f"rollcast: error: {exc}", file=sys.stderr, flush=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
