"""Closed-form surplus-storage controller.

At every step the controller looks at an m-step forecast of building demand,
PV energy and grid carbon intensity, and picks the fraction ``alpha`` of the
PV surplus to push into the building's thermal mass by shifting the setpoint.
The objective trades the avoided grid emissions against the squared
setpoint shift; it is quadratic in ``alpha``, so the optimum is explicit and
then saturated to ``[0, 1]``.

Units: energies in kWh per step, carbon intensity in gCO2/kWh, ``c_th`` in
kJ/K.  Temperature shifts convert kWh to kJ (x3600).  The weight ``omega``
is a bare tuning scalar; the closed form and :func:`total_cost` use the
energies and ``c_th`` exactly as given, so ``omega`` absorbs the units.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_1d, check_positive
from .exceptions import HorizonOverrun, LengthMismatch, StepMismatch
from .thermal_model import simulate_array

__all__ = [
    "KJ_PER_KWH",
    "ZERO_SURPLUS",
    "ControllerConfig",
    "ForecastWindow",
    "ControlDecision",
    "CarbonAwareController",
    "Signals",
    "solar_surplus",
    "baseline_grid_energy",
    "baseline_emissions",
    "controlled_emissions",
    "temperature_shift",
    "comfort_cost",
    "total_cost",
    "cost_gradient",
    "linearized_emissions",
    "linearization_gap",
    "alpha_unsaturated",
    "alpha_star",
    "forecast_window",
    "receding_step",
]

KJ_PER_KWH = 3600.0
ZERO_SURPLUS = 1e-12  # kWh


@dataclass(frozen=True)
class ControllerConfig:
    """omega: cost weight; horizon: m in steps; step: ts in minutes;
    gamma: storage efficiency; eta: +1 heating / -1 cooling; c_th: kJ/K."""

    omega: float = 1e6
    horizon: int = 24
    step: float = 60.0
    gamma: float = 1.0
    eta: int = 1
    c_th: float = 6531.77

    def __post_init__(self):
        check_positive(self.omega, "omega")
        check_positive(self.step, "step")
        check_positive(self.c_th, "c_th")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError(f"horizon must be a positive integer, got {self.horizon!r}")
        object.__setattr__(self, "horizon", int(self.horizon))
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma!r}")
        if self.eta not in (1, -1):
            raise ValueError(f"eta must be +1 or -1, got {self.eta!r}")
        object.__setattr__(self, "eta", int(self.eta))

    def with_(self, **changes):
        return ControllerConfig(**{**asdict(self), **changes})


@dataclass(frozen=True)
class ForecastWindow:
    """Per-step forecasts over the horizon: demand and PV in kWh, CI in gCO2/kWh."""

    e_pred: np.ndarray
    e_solar: np.ndarray
    ci: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("e_pred", "e_solar", "ci"):
            arr = check_1d(getattr(self, name), name, non_negative=True)
            arr.setflags(write=False)
            arrays[name] = arr
        sizes = {k: v.size for k, v in arrays.items()}
        if len(set(sizes.values())) != 1:
            raise LengthMismatch(f"forecast lengths differ: {sizes}")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    @property
    def m(self):
        return self.e_pred.size

    @classmethod
    def from_dict(cls, d):
        return cls(d["e_pred"], d["e_solar"], d["ci"])


@dataclass(frozen=True)
class ControlDecision:
    alpha: float
    alpha_unsaturated: float
    delta_T: float  # K, current step
    delta_Q: float  # kWh stored at the current step
    j_co2_baseline: float  # g
    j_co2_controlled: float  # g, with per-step re-clipping
    j_comfort: float  # K^2
    co2_model_gap: float = 0.0  # g, linearised minus re-clipped emissions

    def to_dict(self):
        return asdict(self)


# -- cost terms ----------------------------------------------------------------

def solar_surplus(fw):
    """PV energy above predicted demand, per step."""
    return np.maximum(fw.e_solar - fw.e_pred, 0.0)


def _grid_import(fw):
    return np.maximum(fw.e_pred - fw.e_solar, 0.0)


def baseline_grid_energy(fw):
    return float(_grid_import(fw).sum())


def baseline_emissions(fw):
    return float(_grid_import(fw) @ fw.ci)


def controlled_emissions(fw, alpha):
    """Emissions when stored surplus offsets each step's import uniformly,
    with every step's import clipped at zero."""
    offset = alpha / fw.m * solar_surplus(fw).sum()
    return float(np.maximum(_grid_import(fw) - offset, 0.0) @ fw.ci)


def temperature_shift(cfg, surplus_step, alpha=1.0):
    """Setpoint shift in K from storing ``alpha`` of ``surplus_step`` kWh."""
    return cfg.eta * cfg.gamma * alpha * surplus_step * KJ_PER_KWH / cfg.c_th


def comfort_cost(cfg, fw, alpha):
    """Square of the total horizon shift, in K^2."""
    total_shift = cfg.gamma * solar_surplus(fw).sum() * KJ_PER_KWH / cfg.c_th
    return float(alpha ** 2 * total_shift ** 2)


def linearized_emissions(fw, alpha):
    """Emission term of :func:`total_cost`: horizon import times summed CI."""
    s = solar_surplus(fw).sum()
    return float((baseline_grid_energy(fw) - alpha / fw.m * s) * fw.ci.sum())


def total_cost(cfg, fw, alpha):
    """Linearised objective: no per-step re-clipping, raw-unit comfort term."""
    s = solar_surplus(fw).sum()
    return linearized_emissions(fw, alpha) + float(cfg.omega * alpha ** 2 * (cfg.gamma * s / cfg.c_th) ** 2)


def cost_gradient(cfg, fw, alpha):
    s = solar_surplus(fw).sum()
    return float(-(s / fw.m) * fw.ci.sum() + 2 * cfg.omega * alpha * (cfg.gamma * s / cfg.c_th) ** 2)


def linearization_gap(fw, alpha):
    """Linearised emission term minus the re-clipped per-step emissions (g).

    The closed form optimises the former; the ledger books the latter.
    """
    return linearized_emissions(fw, alpha) - controlled_emissions(fw, alpha)


def alpha_unsaturated(cfg, sum_ci, sum_surplus, m=None):
    """Stationary point of :func:`total_cost`; vectorises over arrays."""
    m = cfg.horizon if m is None else m
    sum_ci = np.asarray(sum_ci, dtype=float)
    sum_surplus = np.asarray(sum_surplus, dtype=float)
    safe = np.where(sum_surplus > ZERO_SURPLUS, sum_surplus, 1.0)
    value = cfg.c_th ** 2 / (2 * cfg.omega * m * cfg.gamma ** 2) * sum_ci / safe
    out = np.where(sum_surplus > ZERO_SURPLUS, value, 0.0)
    return float(out) if out.ndim == 0 else out


def _zero_decision(fw):
    base = baseline_emissions(fw)
    return ControlDecision(0.0, 0.0, 0.0, 0.0, base, base, 0.0, linearization_gap(fw, 0.0))


def alpha_star(cfg, fw):
    """Saturated closed-form decision for one forecast window.

    The window length is taken from ``fw`` (it can be shorter than
    ``cfg.horizon`` near the end of a run).
    """
    surplus = solar_surplus(fw)
    s = float(surplus.sum())
    if s <= ZERO_SURPLUS:
        return _zero_decision(fw)
    a_raw = alpha_unsaturated(cfg, float(fw.ci.sum()), s, fw.m)
    alpha = min(1.0, max(0.0, a_raw))
    return ControlDecision(
        alpha=alpha,
        alpha_unsaturated=a_raw,
        delta_T=temperature_shift(cfg, float(surplus[0]), alpha),
        delta_Q=cfg.gamma * alpha * float(surplus[0]),
        j_co2_baseline=baseline_emissions(fw),
        j_co2_controlled=controlled_emissions(fw, alpha),
        j_comfort=comfort_cost(cfg, fw, alpha),
        co2_model_gap=linearization_gap(fw, alpha),
    )


# -- receding horizon ----------------------------------------------------------

@dataclass(frozen=True)
class Signals:
    """Aligned per-step arrays at the controller step.

    ``t_ref`` and ``n_occ`` are the user schedules, ``t_ext`` the outdoor
    forecast; ``e_solar`` in kWh per step and ``ci`` in gCO2/kWh.
    """

    t_ref: np.ndarray
    n_occ: np.ndarray
    t_ext: np.ndarray
    e_solar: np.ndarray
    ci: np.ndarray
    step: float = 60.0

    def __post_init__(self):
        n = None
        for name in ("t_ref", "n_occ", "t_ext", "e_solar", "ci"):
            arr = check_1d(getattr(self, name), name)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            if n is not None and arr.size != n:
                raise LengthMismatch(f"{name} has {arr.size} samples, expected {n}")
            n = arr.size

    def __len__(self):
        return self.t_ref.size

    def inputs(self, k=0, m=None):
        stop = len(self) if m is None else k + m
        return np.column_stack([self.t_ref[k:stop], self.n_occ[k:stop], self.t_ext[k:stop]])


def _window_length(cfg, n, k, shrink):
    if k < 0 or k >= n:
        raise HorizonOverrun(f"step {k} outside signals of length {n}")
    if k + cfg.horizon <= n:
        return cfg.horizon
    if not shrink:
        raise HorizonOverrun(f"horizon [{k}, {k + cfg.horizon}) overruns {n} steps")
    return n - k


def forecast_window(cfg, model, signals, k, state=None, shrink=True):
    """Free-run the surrogate from ``state`` over the next steps.

    Demand is ``P * ts / 60`` kWh per step under the user schedules.
    """
    m = _window_length(cfg, len(signals), k, shrink)
    power = simulate_array(model, signals.inputs(k, m), state)
    e_pred = power * cfg.step / 60.0
    return ForecastWindow(e_pred, signals.e_solar[k:k + m], signals.ci[k:k + m])


def receding_step(cfg, model, signals, k, state=None, shrink=True):
    """Decision for step ``k``; only this step's alpha is ever applied.

    Near the end of the signals the window shrinks; fewer than two remaining
    steps force alpha to zero.
    """
    if model.ts != cfg.step or signals.step != cfg.step:
        raise StepMismatch(f"model ts {model.ts}, signals {signals.step}, controller {cfg.step}")
    fw = forecast_window(cfg, model, signals, k, state, shrink)
    if fw.m < 2:
        return _zero_decision(fw)
    return alpha_star(cfg, fw)


class CarbonAwareController(BaseEstimator):
    """Estimator-style front end: hyper-parameters as ``get_params`` keys.

    Nothing is learned, so ``fit`` only validates the configuration.
    ``predict`` maps a sequence of forecast windows to saturated alphas.
    """

    def __init__(self, omega=1e6, horizon=24, step=60.0, gamma=1.0, eta=1, c_th=6531.77):
        self.omega = omega
        self.horizon = horizon
        self.step = step
        self.gamma = gamma
        self.eta = eta
        self.c_th = c_th

    @property
    def config(self):
        return ControllerConfig(**self.get_params())

    def fit(self, X=None, y=None):
        self.config_ = self.config
        return self

    def decide(self, window):
        return alpha_star(self.config, window)

    def predict(self, windows):
        cfg = self.config
        return np.array([alpha_star(cfg, w).alpha for w in windows])
