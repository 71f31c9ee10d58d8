"""Scenario engine: baseline and controlled runs over the same signals.

Emission accounting follows the controller's surrogate model.  Demand
``e_pred`` is the surrogate's prediction under the user schedules and is
identical in both runs; the controller stores ``gamma * alpha * surplus``
at each step and that energy offsets grid imports uniformly over the
decision's horizon.  Offsets from overlapping horizons add up, and a
decision never releases more than it stored.

Because ``alpha(k)`` depends only on forecasts (not on earlier decisions),
all decisions are computed in one vectorised pass.  :func:`receding_step`
gives the same numbers one step at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from datetime import date, datetime, timedelta

import numpy as np

from .controller import (
    KJ_PER_KWH,
    ZERO_SURPLUS,
    ControllerConfig,
    Signals,
    alpha_unsaturated,
    solar_surplus,
)
from .exceptions import EmptyLedger, ModelMissing, SignalGap, StepMismatch
from .thermal_model import simulate_array
from .timeseries import (
    Schedule,
    TimeSeries,
    office_occupancy,
    resample,
    sample_schedule,
    setpoint_schedule,
)

__all__ = [
    "HEATING_SEASON",
    "ScenarioConfig",
    "Prepared",
    "StepRecord",
    "Ledger",
    "SimulationResult",
    "mode_for",
    "prepare",
    "run",
    "run_prepared",
    "delta_co2_step",
    "aggregate",
]

# inclusive (month, day) bounds of the heating season, wrapping the new year
HEATING_SEASON = ((10, 15), (4, 15))


def mode_for(day, season=HEATING_SEASON):
    (m0, d0), (m1, d1) = season
    md = (day.month, day.day)
    if (m0, d0) <= (m1, d1):
        heating = (m0, d0) <= md <= (m1, d1)
    else:
        heating = md >= (m0, d0) or md <= (m1, d1)
    return "heating" if heating else "cooling"


def _default_setpoints(offset):
    return {
        "heating": setpoint_schedule(20.0, 18.0, utc_offset_hours=offset),
        "cooling": setpoint_schedule(26.0, 28.0, utc_offset_hours=offset),
    }


@dataclass
class ScenarioConfig:
    """Everything a run needs.

    ``ci``, ``pv`` and ``t_ext`` may come at any step that divides or is a
    multiple of ``controller.step``; they are resampled on preparation.
    ``models`` maps ``"heating"``/``"cooling"`` to surrogate models.
    """

    start: datetime
    end: datetime
    ci: TimeSeries
    pv: TimeSeries
    t_ext: TimeSeries
    models: dict
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    setpoints: dict = None
    occupancy: Schedule = None
    utc_offset_hours: float = 0.0
    season: tuple = HEATING_SEASON

    def __post_init__(self):
        if self.setpoints is None:
            self.setpoints = _default_setpoints(self.utc_offset_hours)
        if self.occupancy is None:
            self.occupancy = office_occupancy(utc_offset_hours=self.utc_offset_hours)
        if self.end <= self.start:
            raise ValueError("scenario end must be after start")

    @property
    def step(self):
        return self.controller.step

    def with_controller(self, **changes):
        from dataclasses import replace

        return replace(self, controller=self.controller.with_(**changes))


@dataclass(frozen=True)
class Prepared:
    """Signals at the controller step plus the baseline surrogate demand."""

    timestamps: tuple
    local_days: np.ndarray  # ordinal of local calendar day
    modes: np.ndarray  # +1 heating, -1 cooling
    signals: Signals
    e_pred: np.ndarray  # kWh per step under the user schedules
    step: float
    utc_offset_hours: float
    models: dict

    def __len__(self):
        return self.e_pred.size


def _align(series, name, start, end, step):
    try:
        s = resample(series, step)
    except Exception as exc:
        raise SignalGap(f"{name}: {exc}") from exc
    return s.between(start, end).values


def prepare(scenario):
    """Resample signals, evaluate schedules and run the baseline surrogate."""
    step = scenario.step
    n_float = (scenario.end - scenario.start).total_seconds() / 60.0 / step
    n = int(round(n_float))
    if abs(n - n_float) > 1e-9 or n < 1:
        raise StepMismatch("scenario length is not a whole number of controller steps")
    ci = _align(scenario.ci, "ci", scenario.start, scenario.end, step)
    pv = _align(scenario.pv, "pv", scenario.start, scenario.end, step)
    t_ext = _align(scenario.t_ext, "t_ext", scenario.start, scenario.end, step)

    delta = timedelta(minutes=step)
    stamps = tuple(scenario.start + i * delta for i in range(n))
    local = [t + timedelta(hours=scenario.utc_offset_hours) for t in stamps]
    modes_txt = [mode_for(t.date(), scenario.season) for t in local]
    for mode in set(modes_txt):
        if mode not in scenario.models or scenario.models[mode] is None:
            raise ModelMissing(f"no surrogate model for {mode} mode")
        if mode not in scenario.setpoints:
            raise ModelMissing(f"no setpoint schedule for {mode} mode")
    t_ref = np.array([sample_schedule(scenario.setpoints[m], t) for m, t in zip(modes_txt, stamps)])
    n_occ = np.array([sample_schedule(scenario.occupancy, t) for t in stamps])
    models = {m: scenario.models[m].resample(step) for m in set(modes_txt)}
    modes = np.array([1 if m == "heating" else -1 for m in modes_txt], dtype=int)
    signals = Signals(t_ref, n_occ, t_ext, pv, ci, step)
    e_pred = _surrogate_energy(models, modes, signals.inputs(), step)
    return Prepared(
        timestamps=stamps,
        local_days=np.array([t.toordinal() for t in local]),
        modes=modes,
        signals=signals,
        e_pred=e_pred,
        step=step,
        utc_offset_hours=scenario.utc_offset_hours,
        models=models,
    )


def _segments(modes):
    edges = np.flatnonzero(np.diff(modes)) + 1
    bounds = np.concatenate(([0], edges, [modes.size]))
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def _surrogate_energy(models, modes, U, step):
    """kWh per step; each season segment starts from its steady state."""
    out = np.empty(U.shape[0])
    for a, b in _segments(modes):
        model = models["heating" if modes[a] == 1 else "cooling"]
        x0 = model.steady_state(U[a])
        out[a:b] = simulate_array(model, U[a:b], x0) * step / 60.0
    return out


def segment_state(prepared, k):
    """Baseline surrogate state at the start of step ``k``."""
    modes = prepared.modes
    a = k
    while a > 0 and modes[a - 1] == modes[k]:
        a -= 1
    model = prepared.models["heating" if modes[k] == 1 else "cooling"]
    U = prepared.signals.inputs()
    x0 = model.steady_state(U[a])
    if k == a:
        return model, x0
    _, x = simulate_array(model, U[a:k], x0, return_state=True)
    return model, x


@dataclass(frozen=True)
class StepRecord:
    timestamp: datetime
    mode: str
    t_ref_user: float
    t_ref_applied: float
    alpha: float
    e_pred: float
    e_solar: float
    surplus: float
    grid_import: float
    emissions: float
    delta_co2: float
    delta_T: float
    ci: float = 0.0
    baseline_import: float = 0.0
    baseline_emissions: float = 0.0
    e_pred_applied: float = 0.0


@dataclass(frozen=True)
class Ledger:
    """Column-oriented per-step ledger (one array per :class:`StepRecord` field)."""

    timestamps: tuple
    local_days: np.ndarray
    modes: np.ndarray
    columns: dict

    def __len__(self):
        return len(self.timestamps)

    def __getitem__(self, name):
        return self.columns[name]

    def records(self):
        names = [f.name for f in fields(StepRecord) if f.name not in ("timestamp", "mode")]
        cols = [self.columns[n] for n in names]
        out = []
        for i, ts in enumerate(self.timestamps):
            kw = {n: float(c[i]) for n, c in zip(names, cols)}
            out.append(StepRecord(ts, "heating" if self.modes[i] == 1 else "cooling", **kw))
        return out


@dataclass(frozen=True)
class SimulationResult:
    """Ledger plus aggregates; controlled-side totals are ``None`` for a baseline run."""

    ledger: Ledger
    controlled: bool
    baseline_emissions_kg: float
    baseline_energy_kwh: float
    controlled_emissions_kg: float = None
    controlled_energy_kwh: float = None
    emissions_reduction_percent: float = None
    energy_reduction_percent: float = None
    avg_daily_saving: float = None  # g/day
    avg_daily_deltaT: float = 0.0  # K
    max_daily_deltaT: float = 0.0  # K
    n_days: int = 0
    config: dict = None

    @property
    def records(self):
        return self.ledger.records()

    def summary(self):
        keys = (
            "controlled", "baseline_emissions_kg", "baseline_energy_kwh",
            "controlled_emissions_kg", "controlled_energy_kwh",
            "emissions_reduction_percent", "energy_reduction_percent",
            "avg_daily_saving", "avg_daily_deltaT", "max_daily_deltaT", "n_days",
        )
        out = {k: getattr(self, k) for k in keys}
        out["avg_daily_saving_g_per_day"] = out.pop("avg_daily_saving")
        if self.config is not None:
            out["config"] = dict(self.config)
        return out


def delta_co2_step(fw, alpha, k=0):
    """Emissions avoided at step ``k`` of a window when only this decision's
    uniform offset applies (g)."""
    base = max(float(fw.e_pred[k] - fw.e_solar[k]), 0.0)
    offset = alpha / fw.m * float(solar_surplus(fw).sum())
    return (base - max(base - offset, 0.0)) * float(fw.ci[k])


def _window_sums(values, m):
    """``sum(values[k:k+m_k])`` with ``m_k = min(m, N-k)``, plus ``m_k``."""
    n = values.size
    csum = np.concatenate(([0.0], np.cumsum(values)))
    k = np.arange(n)
    stop = np.minimum(k + m, n)
    return csum[stop] - csum[k], stop - k


def decide_all(cfg, prepared):
    """Vectorised receding-horizon decisions for every step.

    Returns ``(alpha, alpha_raw, window_len, window_surplus)``.
    """
    surplus = np.maximum(prepared.signals.e_solar - prepared.e_pred, 0.0)
    s_sum, m_k = _window_sums(surplus, cfg.horizon)
    ci_sum, _ = _window_sums(prepared.signals.ci, cfg.horizon)
    raw = np.zeros(surplus.size)
    ok = (s_sum > ZERO_SURPLUS) & (m_k >= 2)
    if np.any(ok):
        for m in np.unique(m_k[ok]):
            sel = ok & (m_k == m)
            raw[sel] = alpha_unsaturated(cfg, ci_sum[sel], s_sum[sel], m)
    return np.clip(raw, 0.0, 1.0), raw, m_k, s_sum


def run_prepared(prepared, cfg, controlled=True):
    if prepared.step != cfg.step:
        raise StepMismatch(f"prepared at {prepared.step} min, controller at {cfg.step} min")
    sig = prepared.signals
    n = len(prepared)
    e_pred = prepared.e_pred
    surplus = np.maximum(sig.e_solar - e_pred, 0.0)
    base_import = np.maximum(e_pred - sig.e_solar, 0.0)
    base_em = base_import * sig.ci
    if controlled:
        alpha, _, m_k, s_sum = decide_all(cfg, prepared)
        stored = cfg.gamma * alpha * surplus
        per_step = np.minimum(alpha * s_sum, stored) / m_k
        diff = np.zeros(n + 1)
        np.add.at(diff, np.arange(n), per_step)
        np.add.at(diff, np.arange(n) + m_k, -per_step)
        offset = np.cumsum(diff[:-1])
        grid_import = np.maximum(base_import - offset, 0.0)
        delta_T = prepared.modes * cfg.gamma * alpha * surplus * KJ_PER_KWH / cfg.c_th
        applied = sig.inputs().copy()
        applied[:, 0] += delta_T
        e_applied = _surrogate_energy(prepared.models, prepared.modes, applied, cfg.step)
    else:
        alpha = np.zeros(n)
        grid_import = base_import
        delta_T = np.zeros(n)
        e_applied = e_pred
    emissions = grid_import * sig.ci
    columns = {
        "t_ref_user": sig.t_ref,
        "t_ref_applied": sig.t_ref + delta_T,
        "alpha": alpha,
        "e_pred": e_pred,
        "e_solar": sig.e_solar,
        "surplus": surplus,
        "grid_import": grid_import,
        "emissions": emissions,
        "delta_co2": base_em - emissions,
        "delta_T": delta_T,
        "ci": sig.ci,
        "baseline_import": base_import,
        "baseline_emissions": base_em,
        "e_pred_applied": e_applied,
    }
    ledger = Ledger(prepared.timestamps, prepared.local_days, prepared.modes, columns)
    result = aggregate(ledger, controlled=controlled)
    cfg_dict = {"omega": cfg.omega, "horizon": cfg.horizon, "step": cfg.step,
                "gamma": cfg.gamma, "c_th": cfg.c_th}
    return _with_config(result, cfg_dict)


def _with_config(result, cfg_dict):
    from dataclasses import replace

    return replace(result, config=cfg_dict)


def run(scenario, controlled=True):
    """Simulate the scenario; ``controlled=False`` pins alpha to zero."""
    return run_prepared(prepare(scenario), scenario.controller, controlled)


def _ledger_from_records(records, utc_offset_hours):
    names = [f.name for f in fields(StepRecord) if f.name not in ("timestamp", "mode")]
    columns = {n: np.array([getattr(r, n) for r in records], dtype=float) for n in names}
    stamps = tuple(r.timestamp for r in records)
    days = np.array([(t + timedelta(hours=utc_offset_hours)).toordinal() for t in stamps])
    modes = np.array([1 if r.mode == "heating" else -1 for r in records])
    return Ledger(stamps, days, modes, columns)


def aggregate(records, controlled=True, utc_offset_hours=0.0):
    """Totals, percentage reductions and per-day setpoint statistics.

    ``records`` is a :class:`Ledger` or a sequence of :class:`StepRecord`.
    Daily statistics use |delta_T| grouped by local calendar day: the average
    of the daily means and the largest daily maximum.
    """
    if not isinstance(records, Ledger):
        records = list(records)
        if not records:
            raise EmptyLedger("cannot aggregate an empty ledger")
        ledger = _ledger_from_records(records, utc_offset_hours)
    else:
        ledger = records
    if len(ledger) == 0:
        raise EmptyLedger("cannot aggregate an empty ledger")
    col = ledger.columns
    base_g = float(np.sum(col["baseline_emissions"]))
    base_kwh = float(np.sum(col["baseline_import"]))
    days, inverse = np.unique(ledger.local_days, return_inverse=True)
    n_days = int(days.size)
    out = dict(
        ledger=ledger,
        controlled=controlled,
        baseline_emissions_kg=base_g / 1000.0,
        baseline_energy_kwh=base_kwh,
        n_days=n_days,
    )
    if not controlled:
        return SimulationResult(**out)
    ctrl_g = float(np.sum(col["emissions"]))
    ctrl_kwh = float(np.sum(col["grid_import"]))
    abs_dt = np.abs(col["delta_T"])
    counts = np.bincount(inverse, minlength=n_days)
    daily_mean = np.bincount(inverse, weights=abs_dt, minlength=n_days) / counts
    daily_max = np.zeros(n_days)
    np.maximum.at(daily_max, inverse, abs_dt)
    out.update(
        controlled_emissions_kg=ctrl_g / 1000.0,
        controlled_energy_kwh=ctrl_kwh,
        emissions_reduction_percent=100.0 * (base_g - ctrl_g) / base_g if base_g > 0 else 0.0,
        energy_reduction_percent=100.0 * (base_kwh - ctrl_kwh) / base_kwh if base_kwh > 0 else 0.0,
        avg_daily_saving=(base_g - ctrl_g) / n_days,
        avg_daily_deltaT=float(daily_mean.mean()),
        max_daily_deltaT=float(daily_max.max()),
    )
    return SimulationResult(**out)


def daily_deltaT(ledger):
    """``(day_ordinals, daily_mean_abs, daily_max_abs)`` of the setpoint shift."""
    days, inverse = np.unique(ledger.local_days, return_inverse=True)
    abs_dt = np.abs(ledger["delta_T"])
    counts = np.bincount(inverse, minlength=days.size)
    mean = np.bincount(inverse, weights=abs_dt, minlength=days.size) / counts
    mx = np.zeros(days.size)
    np.maximum.at(mx, inverse, abs_dt)
    return [date.fromordinal(int(d)) for d in days], mean, mx
