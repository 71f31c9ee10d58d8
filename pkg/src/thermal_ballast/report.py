"""Report writers: summary JSON, ledger CSV, figure-data CSVs, comfort check.

Floats are written with 17 significant digits in JSON and 6 decimals in
CSV; nothing time-of-run dependent goes into any payload, so identical
inputs give byte-identical files.
"""

from __future__ import annotations

import csv
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from . import _json
from .comfort import ComfortInput, classify, pmv
from .timeseries import format_timestamp

__all__ = [
    "LEDGER_COLUMNS",
    "EXTRA_COLUMNS",
    "SEASON_CONDITIONS",
    "comfort_assessment",
    "summary_dict",
    "write_summary",
    "write_ledger_csv",
    "figure_windows",
    "write_figure_data",
    "write_cells_csv",
    "report",
]

LEDGER_COLUMNS = ("timestamp", "mode", "alpha", "delta_T", "e_pred", "e_solar",
                  "grid_import", "emissions", "delta_co2")
EXTRA_COLUMNS = ("t_ref_user", "t_ref_applied", "surplus", "ci", "baseline_emissions")

# occupant conditions for the seasonal comfort check
SEASON_CONDITIONS = {
    "heating": dict(air_speed=0.1, relative_humidity=50.0, metabolic_rate=1.2, clothing=1.1),
    "cooling": dict(air_speed=0.15, relative_humidity=50.0, metabolic_rate=1.2, clothing=0.6),
}
DEFAULT_SETPOINTS = {"heating": 20.0, "cooling": 26.0}


def _fmt(x, decimals=6):
    return f"{x:.{decimals}f}"


def _season_max_deltaT(result, mode):
    ledger = result.ledger
    sign = 1 if mode == "heating" else -1
    mask = ledger.modes == sign
    if not np.any(mask):
        return None
    days = ledger.local_days[mask]
    abs_dt = np.abs(ledger["delta_T"][mask])
    uniq, inverse = np.unique(days, return_inverse=True)
    daily_max = np.zeros(uniq.size)
    np.maximum.at(daily_max, inverse, abs_dt)
    return float(daily_max.max())


def comfort_assessment(result, setpoints=None, conditions=None):
    """PMV at the user setpoint and at the setpoint pushed by the season's
    largest daily shift (up in heating, down in cooling), with class checks."""
    setpoints = {**DEFAULT_SETPOINTS, **(setpoints or {})}
    conditions = SEASON_CONDITIONS if conditions is None else conditions
    out = {}
    for mode in ("heating", "cooling"):
        shift = _season_max_deltaT(result, mode)
        if shift is None:
            continue
        base_t = float(setpoints[mode])
        ctrl_t = base_t + shift if mode == "heating" else base_t - shift
        entry = {"max_daily_deltaT": shift}
        for label, ta in (("baseline", base_t), ("controlled", ctrl_t)):
            res = pmv(ComfortInput(ta, **conditions[mode]))
            entry[label] = {
                "air_temp": ta,
                "pmv": res.pmv,
                "ppd": res.ppd,
                "within_existing": classify(res, "existing"),
                "within_new": classify(res, "new"),
            }
        out[mode] = entry
    return out


def summary_dict(result, comfort=None):
    out = result.summary()
    if comfort is not None:
        out["comfort"] = comfort
    return out


def write_summary(result, path, comfort=None):
    _json.dump(summary_dict(result, comfort), path)
    return Path(path)


def _rows(ledger, idx, columns):
    cols = [ledger[c] for c in columns]
    stamps = ledger.timestamps
    modes = ledger.modes
    for i in idx:
        row = [format_timestamp(stamps[i]), "heating" if modes[i] == 1 else "cooling"]
        row.extend(_fmt(c[i]) for c in cols)
        yield row


def write_ledger_csv(result, path, extras=True):
    """Per-step ledger; the extra columns follow the fixed ones."""
    ledger = result.ledger
    numeric = list(LEDGER_COLUMNS[2:]) + (list(EXTRA_COLUMNS) if extras else [])
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(LEDGER_COLUMNS[:2]) + numeric)
        w.writerows(_rows(ledger, range(len(ledger)), numeric))
    return Path(path)


def figure_windows(result):
    """Winter (Nov 15-30) and summer (Jul 15-30) windows that fall inside
    the run, or the whole run when neither does."""
    stamps = result.ledger.timestamps
    first, last = stamps[0], stamps[-1]
    out = {}
    for label, (month, d0, d1) in (("winter", (11, 15, 30)), ("summer", (7, 15, 30))):
        for year in range(first.year, last.year + 1):
            lo = datetime(year, month, d0, tzinfo=timezone.utc)
            hi = datetime(year, month, d1, tzinfo=timezone.utc) + timedelta(days=1)
            if lo <= last and hi > first:
                out[label] = (max(lo, first), min(hi, last + timedelta(seconds=1)))
                break
    if not out:
        out["full"] = (first, last + timedelta(seconds=1))
    return out


FIGURE_PANELS = ("alpha", "delta_co2", "delta_T")


def write_figure_data(result, out_dir, windows=None):
    """One ``timestamp,value`` CSV per (panel, window)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    windows = figure_windows(result) if windows is None else windows
    stamps = result.ledger.timestamps
    paths = []
    for label, (lo, hi) in windows.items():
        idx = [i for i, t in enumerate(stamps) if lo <= t < hi]
        for panel in FIGURE_PANELS:
            path = out_dir / f"figure_{panel}_{label}.csv"
            col = result.ledger[panel]
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["timestamp", panel])
                w.writerows([format_timestamp(stamps[i]), _fmt(col[i])] for i in idx)
            paths.append(path)
    return paths


CELL_COLUMNS = ("m", "ts", "omega", "emissions_reduction_percent", "avg_daily_saving",
                "avg_daily_deltaT", "max_daily_deltaT")


def write_cells_csv(cells, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CELL_COLUMNS)
        for c in cells:
            w.writerow([f"{c.m:g}", f"{c.ts:g}", format(c.omega, ".6e")]
                       + [_fmt(getattr(c, k)) for k in CELL_COLUMNS[3:]])
    return Path(path)


def write_heatmap_csv(data, path, key):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ts\\m"] + [f"{m:g}" for m in data["horizons"]])
        for ts, row in zip(data["steps"], data[key]):
            w.writerow([f"{ts:g}"] + ["" if np.isnan(v) else _fmt(v) for v in row])
    return Path(path)


def report(result, out_dir, comfort=None, figure_data=True, prefix=""):
    """Write summary JSON, ledger CSV and (optionally) figure-data CSVs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [
        write_summary(result, out_dir / f"{prefix}summary.json", comfort),
        write_ledger_csv(result, out_dir / f"{prefix}ledger.csv"),
    ]
    if figure_data:
        paths.extend(write_figure_data(result, out_dir))
    return paths
