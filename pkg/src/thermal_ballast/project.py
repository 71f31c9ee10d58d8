"""Project configuration: datasets, models, envelope, scenario, controller.

A project is a JSON file with a ``schema_version`` field.  Relative paths
are resolved against the file's directory.  A minimal project::

    {
      "schema_version": 1,
      "datasets": {
        "ci":    {"path": "ci.csv",    "unit": "gCO2/kWh"},
        "pv":    {"path": "pv.csv",    "unit": "kWh"},
        "t_ext": {"path": "t_ext.csv", "unit": "degC"}
      },
      "models": {"heating": "heating.json", "cooling": "cooling.json"},
      "scenario": {"start": "2024-01-01T00:00:00Z", "end": "2025-01-01T00:00:00Z"}
    }

Instead of ``models`` a ``training`` block may point at CSV records
(``timestamp,t_ref,n_occ,t_ext,power``) to identify per season.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .controller import ControllerConfig
from .envelope import Construction, Layer, total_capacity
from .exceptions import (
    MissingKey,
    ParseError,
    PathNotFound,
    SignalGap,
    ThermalBallastError,
    UnitMismatch,
)
from .simulator import ScenarioConfig
from .thermal_model import StateSpaceModel, identify
from .timeseries import (
    Schedule,
    Unit,
    office_occupancy,
    parse_timestamp,
    read_series_csv,
    setpoint_schedule,
)

__all__ = [
    "SCHEMA_VERSION",
    "EXPECTED_UNITS",
    "DEFAULT_C_TH",
    "ProjectConfig",
    "load_project",
    "load_envelope",
    "read_training_csv",
]

SCHEMA_VERSION = 1
EXPECTED_UNITS = {"ci": Unit.G_PER_KWH, "pv": Unit.KWH, "t_ext": Unit.CELSIUS}
DEFAULT_C_TH = 6531.77  # kJ/K, medium-weight room
MODES = ("heating", "cooling")


def _read_json(path, what="file"):
    path = Path(path)
    if not path.is_file():
        raise PathNotFound(f"{what}: {path} does not exist")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _get(d, key, where, default=...):
    if not isinstance(d, dict):
        raise ParseError(f"{where}: expected an object")
    if key not in d:
        if default is ...:
            raise MissingKey(f"{where}.{key}" if where else key)
        return default
    return d[key]


def _resolve(root, raw, key, must_exist=True):
    if not isinstance(raw, str) or not raw:
        raise ParseError(f"{key}: expected a path string")
    path = Path(raw)
    if not path.is_absolute():
        path = root / path
    if must_exist and not path.exists():
        raise PathNotFound(f"{key}: {path} does not exist")
    return path


def _number(value, key):
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ParseError(f"{key}: expected a number, got {value!r}") from None
    return out


@dataclass(frozen=True)
class ProjectConfig:
    root: Path
    datasets: dict  # name -> (Path, Unit)
    models: dict  # mode -> Path
    training: dict  # mode -> (Path, order)
    envelope: Path
    c_th: float
    start: object
    end: object
    utc_offset_hours: float
    setpoints: dict  # mode -> Schedule
    occupancy: Schedule
    season: tuple
    controller: ControllerConfig
    output_dir: Path
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def load_series(self):
        return {name: read_series_csv(path, unit) for name, (path, unit) in self.datasets.items()}

    def load_models(self):
        """Models per mode: saved files first, identification otherwise."""
        out = {}
        for mode in MODES:
            if mode in self.models:
                out[mode] = StateSpaceModel.load(self.models[mode])
            elif mode in self.training:
                path, order = self.training[mode]
                X, y, step = read_training_csv(path)
                out[mode], _ = identify(X, y, order=order, ts=step, mode=mode)
        return out

    def scenario(self, series=None, models=None, **controller_changes):
        series = self.load_series() if series is None else series
        models = self.load_models() if models is None else models
        return ScenarioConfig(
            start=self.start,
            end=self.end,
            ci=series["ci"],
            pv=series["pv"],
            t_ext=series["t_ext"],
            models=models,
            controller=self.controller.with_(**controller_changes),
            setpoints=dict(self.setpoints),
            occupancy=self.occupancy,
            utc_offset_hours=self.utc_offset_hours,
            season=self.season,
        )

    def work_setpoints(self):
        """Occupied-hours weekday setpoint per mode, for the comfort report."""
        pick = {"heating": max, "cooling": min}
        return {mode: pick[mode](seg[2] for seg in sch.weekday) for mode, sch in self.setpoints.items()}


def _schedule(spec, key, offset, unit):
    if not isinstance(spec, dict):
        raise ParseError(f"{key}: expected an object")
    if "weekday" in spec:
        weekend = spec.get("weekend", spec["weekday"])
        try:
            return Schedule(tuple(map(tuple, spec["weekday"])), tuple(map(tuple, weekend)), offset, unit)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{key}: {exc}") from exc
    return None


def _setpoints(scn, offset):
    raw = _get(scn, "setpoints", "scenario", {})
    hours = raw.get("work_hours", [8, 19])
    defaults = {"heating": (20.0, 18.0), "cooling": (26.0, 28.0)}
    out = {}
    for mode in MODES:
        key = f"scenario.setpoints.{mode}"
        spec = raw.get(mode, {})
        sch = _schedule(spec, key, offset, Unit.CELSIUS)
        if sch is None:
            work = _number(spec.get("work", defaults[mode][0]), f"{key}.work")
            off = _number(spec.get("off", defaults[mode][1]), f"{key}.off")
            sch = setpoint_schedule(work, off, float(hours[0]), float(hours[1]), offset)
        out[mode] = sch
    return out


def _occupancy(scn, offset):
    spec = _get(scn, "occupancy", "scenario", {})
    sch = _schedule(spec, "scenario.occupancy", offset, Unit.PERSONS)
    if sch is not None:
        return sch
    persons = _number(spec.get("persons", 2), "scenario.occupancy.persons")
    hours = spec.get("work_hours", [8, 19])
    return office_occupancy(persons, float(hours[0]), float(hours[1]), offset)


def _season(scn):
    spec = _get(scn, "season", "scenario", {})
    out = []
    for key, default in (("heating_start", "10-15"), ("heating_end", "04-15")):
        text = spec.get(key, default)
        try:
            month, day = (int(p) for p in str(text).split("-"))
        except ValueError:
            raise ParseError(f"scenario.season.{key}: expected MM-DD, got {text!r}") from None
        out.append((month, day))
    return tuple(out)


def _controller(raw):
    spec = _get(raw, "controller", "", {})
    step = _number(spec.get("step_minutes", 60), "controller.step_minutes")
    hours = _number(spec.get("horizon_hours", 24), "controller.horizon_hours")
    steps = hours * 60.0 / step
    if abs(steps - round(steps)) > 1e-9:
        raise ParseError(f"controller.horizon_hours: {hours:g} h is not a multiple of {step:g} min")
    try:
        return ControllerConfig(
            omega=_number(spec.get("omega", 1e6), "controller.omega"),
            horizon=int(round(steps)),
            step=step,
            gamma=_number(spec.get("gamma", 1.0), "controller.gamma"),
        )
    except ValueError as exc:
        raise ParseError(f"controller: {exc}") from exc


def load_project(path):
    """Parse and validate a project file; every error names its key."""
    path = Path(path)
    raw = _read_json(path, "project")
    root = path.resolve().parent
    version = _get(raw, "schema_version", "")
    if version != SCHEMA_VERSION:
        raise ParseError(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")

    ds_raw = _get(raw, "datasets", "")
    datasets = {}
    for name, expected in EXPECTED_UNITS.items():
        entry = _get(ds_raw, name, "datasets")
        key = f"datasets.{name}"
        unit_text = _get(entry, "unit", key)
        try:
            unit = Unit.parse(unit_text)
        except UnitMismatch:
            raise UnitMismatch(f"{key}.unit: unknown unit {unit_text!r}, expected {expected.value}") from None
        if unit is not expected:
            raise UnitMismatch(f"{key}.unit: expected {expected.value}, got {unit_text!r}")
        datasets[name] = (_resolve(root, _get(entry, "path", key), f"{key}.path"), unit)

    models = {}
    for mode, p in _get(raw, "models", "", {}).items():
        if mode not in MODES:
            raise ParseError(f"models.{mode}: mode must be one of {MODES}")
        models[mode] = _resolve(root, p, f"models.{mode}")
    training = {}
    for mode, entry in _get(raw, "training", "", {}).items():
        if mode not in MODES:
            raise ParseError(f"training.{mode}: mode must be one of {MODES}")
        key = f"training.{mode}"
        entry = {"path": entry} if isinstance(entry, str) else entry
        training[mode] = (_resolve(root, _get(entry, "path", key), f"{key}.path"),
                          int(entry.get("order", 2)))
    if not models and not training:
        raise MissingKey("models (or training)")

    envelope = None
    if "envelope" in raw:
        envelope = _resolve(root, raw["envelope"], "envelope")
        c_th = load_envelope(envelope).total
    else:
        c_th = _number(raw.get("c_th", DEFAULT_C_TH), "c_th")

    scn = _get(raw, "scenario", "")
    try:
        start = parse_timestamp(_get(scn, "start", "scenario"))
        end = parse_timestamp(_get(scn, "end", "scenario"))
    except ValueError as exc:
        if isinstance(exc, ThermalBallastError):
            raise
        raise ParseError(f"scenario: {exc}") from exc
    if end <= start:
        raise ParseError("scenario.end: must be after scenario.start")
    offset = _number(scn.get("utc_offset_hours", 0.0), "scenario.utc_offset_hours")
    controller = _controller(raw).with_(c_th=c_th)
    out_dir = Path(raw.get("output_dir", "output"))
    out_dir = out_dir if out_dir.is_absolute() else root / out_dir

    return ProjectConfig(
        root=root,
        datasets=datasets,
        models=models,
        training=training,
        envelope=envelope,
        c_th=c_th,
        start=start,
        end=end,
        utc_offset_hours=offset,
        setpoints=_setpoints(scn, offset),
        occupancy=_occupancy(scn, offset),
        season=_season(scn),
        controller=controller,
        output_dir=out_dir,
        raw=raw,
    )


def load_envelope(path):
    """Envelope definition -> :class:`EnvelopeSummary`.

    Each component has ``name``, ``area`` and either ``layers`` (thickness,
    conductivity, density, specific_heat) or a precomputed ``kappa``.
    """
    raw = _read_json(path, "envelope")
    period = _number(raw.get("period_hours", 24), "period_hours") * 3600.0
    include_films = bool(raw.get("include_films", True))
    comps = _get(raw, "components", "")
    if not isinstance(comps, list) or not comps:
        raise ParseError("components: expected a non-empty list")
    pairs = []
    for i, c in enumerate(comps):
        key = f"components[{i}]"
        area = _number(_get(c, "area", key), f"{key}.area")
        name = c.get("name", f"component-{i + 1}")
        if "layers" in c:
            try:
                layers = [Layer(_number(_get(l, "thickness", f"{key}.layers[{j}]"), "thickness"),
                                _number(_get(l, "conductivity", f"{key}.layers[{j}]"), "conductivity"),
                                _number(_get(l, "density", f"{key}.layers[{j}]"), "density"),
                                _number(_get(l, "specific_heat", f"{key}.layers[{j}]"), "specific_heat"))
                          for j, l in enumerate(c["layers"])]
            except TypeError as exc:
                raise ParseError(f"{key}.layers: {exc}") from exc
            cons = Construction(layers, area, c.get("r_si", 0.13), c.get("r_se", 0.04), name)
            pairs.append((cons, cons.kappa(period, include_films)))
        else:
            pairs.append(((name, area), _number(_get(c, "kappa", key), f"{key}.kappa")))
    return total_capacity(pairs, period)


TRAINING_COLUMNS = ("timestamp", "t_ref", "n_occ", "t_ext", "power")


def read_training_csv(path):
    """``(X, y, step_minutes)`` from a ``timestamp,t_ref,n_occ,t_ext,power`` file."""
    path = Path(path)
    if not path.is_file():
        raise PathNotFound(f"training data: {path} does not exist")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader, [])]
        if tuple(header[:5]) != TRAINING_COLUMNS:
            raise ParseError(f"{path}: expected header {','.join(TRAINING_COLUMNS)}")
        stamps, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row[1:5]])
            except ValueError:
                raise SignalGap(f"{path}:{lineno}: unparseable row") from None
            if len(rows[-1]) != 4:
                raise SignalGap(f"{path}:{lineno}: expected 4 values")
            stamps.append(parse_timestamp(row[0]))
    if len(stamps) < 2:
        raise SignalGap(f"{path}: need at least two samples")
    data = np.asarray(rows)
    step = (stamps[1] - stamps[0]).total_seconds() / 60.0
    return data[:, :3], data[:, 3], step
