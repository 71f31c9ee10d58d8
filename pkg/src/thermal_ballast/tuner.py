"""Grid sweep over (horizon, step, omega), Pareto front and optimum selection."""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, replace

import numpy as np
from joblib import Parallel, delayed

from .exceptions import NoFeasibleCell, ThermalBallastError
from .simulator import prepare, run_prepared

__all__ = [
    "SweepSpec",
    "SweepCell",
    "SweepResult",
    "sweep",
    "pareto_front",
    "select_optimum",
    "heatmap_data",
    "default_n_jobs",
]

THREADS_ENV = "THERMAL_BALLAST_THREADS"


@dataclass(frozen=True)
class SweepSpec:
    """Horizons in hours, steps in minutes, ``omega_count`` log-spaced
    weights in ``[omega_lo, omega_hi]``, and the comfort bound in K."""

    horizons: tuple = (12, 18, 24, 48)
    steps: tuple = (30, 60, 120, 180, 240)
    omega_count: int = 16
    omega_lo: float = 1.0
    omega_hi: float = 1e15
    comfort_bound: float = 1.5

    def __post_init__(self):
        object.__setattr__(self, "horizons", tuple(float(h) for h in self.horizons))
        object.__setattr__(self, "steps", tuple(float(s) for s in self.steps))
        if not self.horizons or not self.steps:
            raise ValueError("horizons and steps must be non-empty")
        if any(h <= 0 for h in self.horizons) or any(s <= 0 for s in self.steps):
            raise ValueError("horizons and steps must be positive")
        if int(self.omega_count) < 1:
            raise ValueError("omega_count must be >= 1")
        object.__setattr__(self, "omega_count", int(self.omega_count))
        if not 0 < self.omega_lo:
            raise ValueError("omega_lo must be > 0")
        if self.omega_count > 1 and not self.omega_lo < self.omega_hi:
            raise ValueError("omega_lo must be < omega_hi")
        if not self.comfort_bound > 0:
            raise ValueError("comfort_bound must be > 0")

    @property
    def omegas(self):
        if self.omega_count == 1:
            return np.array([float(self.omega_lo)])
        return np.logspace(math.log10(self.omega_lo), math.log10(self.omega_hi), self.omega_count)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        keys = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in keys})


@dataclass(frozen=True)
class SweepCell:
    m: float  # hours
    ts: float  # minutes
    omega: float
    emissions_reduction_percent: float
    avg_daily_saving: float  # g/day
    avg_daily_deltaT: float  # K
    max_daily_deltaT: float  # K

    @property
    def horizon_steps(self):
        return int(round(self.m * 60.0 / self.ts))

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class SweepResult:
    cells: tuple
    skipped: tuple  # (m, ts, reason)
    failed: tuple  # (m, ts, omega, message)

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)


def default_n_jobs():
    """Worker count from ``THERMAL_BALLAST_THREADS``; 1 when unset."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, min(n, os.cpu_count() or 1))


def _horizon_steps(m_hours, ts):
    ratio = m_hours * 60.0 / ts
    n = round(ratio)
    if abs(ratio - n) > 1e-9 or n < 1:
        return None
    return int(n)


def _run_group(scenario, ts, jobs):
    """All cells sharing one step: prepare once, then vary (m, omega)."""
    cfg0 = scenario.controller.with_(step=ts)
    try:
        prepared = prepare(replace(scenario, controller=cfg0))
    except ThermalBallastError as exc:
        return [(m, ts, om, None, f"{type(exc).__name__}: {exc}") for m, _, om in jobs]
    out = []
    for m, steps, om in jobs:
        try:
            res = run_prepared(prepared, cfg0.with_(horizon=steps, omega=om))
        except ThermalBallastError as exc:
            out.append((m, ts, om, None, f"{type(exc).__name__}: {exc}"))
            continue
        cell = SweepCell(m, ts, float(om), res.emissions_reduction_percent,
                         res.avg_daily_saving, res.avg_daily_deltaT, res.max_daily_deltaT)
        out.append((m, ts, om, cell, None))
    return out


def sweep(scenario, spec=None, n_jobs=None):
    """Full simulation per (m, ts, omega) cell.

    Cells whose horizon is not a whole number of steps are skipped; a cell
    that raises is reported in ``failed`` and the sweep carries on.  Output
    order follows the SweepSpec lists (horizon, step, omega) regardless of
    scheduling.
    """
    spec = SweepSpec() if spec is None else spec
    n_jobs = default_n_jobs() if n_jobs is None else n_jobs
    skipped = []
    groups = {}
    order = []
    for m in spec.horizons:
        for ts in spec.steps:
            steps = _horizon_steps(m, ts)
            if steps is None:
                skipped.append((m, ts, f"{m:g} h is not a multiple of {ts:g} min"))
                continue
            for om in spec.omegas:
                groups.setdefault(ts, []).append((m, steps, float(om)))
                order.append((m, ts, float(om)))
    tasks = [(ts, groups[ts]) for ts in spec.steps if ts in groups]
    if n_jobs == 1 or len(tasks) <= 1:
        results = [_run_group(scenario, ts, jobs) for ts, jobs in tasks]
    else:
        results = Parallel(n_jobs=n_jobs)(delayed(_run_group)(scenario, ts, jobs) for ts, jobs in tasks)
    by_key = {(m, ts, om): (cell, err) for group in results for m, ts, om, cell, err in group}
    cells, failed = [], []
    for key in order:
        cell, err = by_key[key]
        if cell is None:
            failed.append((*key, err))
        else:
            cells.append(cell)
    return SweepResult(tuple(cells), tuple(skipped), tuple(failed))


def pareto_front(cells):
    """Cells not dominated in (max reduction, min max-daily |dT|).

    Cells with identical objectives are all kept.  Sorted by max daily |dT|
    ascending, then reduction descending.
    """
    cells = list(cells)
    if not cells:
        return []
    ranked = sorted(cells, key=lambda c: (c.max_daily_deltaT, -c.emissions_reduction_percent))
    front = []
    best_prev = -math.inf  # best reduction among strictly smaller dT
    i = 0
    while i < len(ranked):
        dt = ranked[i].max_daily_deltaT
        j = i
        while j < len(ranked) and ranked[j].max_daily_deltaT == dt:
            j += 1
        top = ranked[i].emissions_reduction_percent
        if top > best_prev:
            front.extend(c for c in ranked[i:j] if c.emissions_reduction_percent == top)
            best_prev = top
        i = j
    return front


def _selection_key(c):
    return (-c.emissions_reduction_percent, c.max_daily_deltaT, c.m, -c.ts, c.omega)


def select_optimum(front, comfort_bound=1.5):
    """Largest reduction with max daily |dT| within the bound.

    Ties go to smaller dT, then smaller horizon, then larger step (then
    smaller omega), so the result does not depend on input order.
    """
    feasible = [c for c in front if c.max_daily_deltaT <= comfort_bound]
    if not feasible:
        raise NoFeasibleCell(f"no cell keeps the max daily |dT| within {comfort_bound} K")
    return min(feasible, key=_selection_key)


def heatmap_data(cells, horizons=None, steps=None, comfort_bound=1.5):
    """(step x horizon) matrices of the best feasible cell per pair.

    Returns a dict with the axis values and ``reduction``, ``max_deltaT``
    and ``omega`` matrices; pairs with no feasible cell hold NaN.
    """
    cells = list(cells)
    horizons = sorted({c.m for c in cells}) if horizons is None else list(horizons)
    steps = sorted({c.ts for c in cells}) if steps is None else list(steps)
    shape = (len(steps), len(horizons))
    red, dt, om = np.full(shape, np.nan), np.full(shape, np.nan), np.full(shape, np.nan)
    for i, ts in enumerate(steps):
        for j, m in enumerate(horizons):
            col = [c for c in cells if c.ts == ts and c.m == m]
            try:
                best = select_optimum(col, comfort_bound)
            except NoFeasibleCell:
                continue
            red[i, j] = best.emissions_reduction_percent
            dt[i, j] = best.max_daily_deltaT
            om[i, j] = best.omega
    return {"horizons": horizons, "steps": steps, "reduction": red, "max_deltaT": dt, "omega": om}
