"""Deterministic synthetic plants and signals for desk-scale experiments.

Nothing here is calibrated to a real building: the point is an in-class,
reproducible stand-in for high-fidelity simulation output.
"""

from __future__ import annotations

from datetime import datetime, timezone

import numpy as np

from .thermal_model import arx_to_state_space
from .timeseries import TimeSeries, Unit

__all__ = [
    "TRUTH_POLES",
    "truth_arx",
    "truth_model",
    "training_inputs",
    "training_data",
    "carbon_intensity",
    "pv_energy",
    "external_temperature",
    "desk_signals",
]

TRUTH_POLES = (0.9, 0.6)  # at a 60-minute step


def truth_arx(mode="heating", poles=TRUTH_POLES):
    """ARX coefficients ``(a, b)`` of a second-order room.

    Steady-state gains (kW per input unit): heating +0.03 per K of setpoint,
    -0.03 per K outdoor, -0.08 per occupant; cooling uses -0.05 per K of
    setpoint, +0.05 per K outdoor and +0.1 per occupant.
    """
    a = np.poly(poles)[1:]
    dc = 1.0 + a.sum()
    if mode == "heating":
        gains = np.array([0.03, -0.08, -0.03])
    elif mode == "cooling":
        gains = np.array([-0.05, 0.10, 0.05])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    shape = np.array([0.25, 0.5, 0.25])[: len(poles) + 1]
    shape = shape / shape.sum()
    b = np.outer(shape, gains * dc)
    return a, b


def truth_model(mode="heating", ts=60.0):
    """Second-order truth realised at 60 min, rediscretised to ``ts``."""
    a, b = truth_arx(mode)
    return arx_to_state_space(a, b, 60.0, mode).resample(ts)


def training_inputs(n, mode="heating", seed=0, ts=60.0):
    """Exciting input record: stepped setpoint, daily occupancy, noisy T_ext."""
    rng = np.random.default_rng(seed)
    per_hour = 60.0 / ts
    hours = np.arange(n) / per_hour
    lo, hi = (20.0, 22.0) if mode == "heating" else (24.0, 26.0)
    hold = max(1, int(round(3 * per_hour)))
    levels = rng.choice(np.linspace(lo, hi, 5), size=n // hold + 1)
    t_ref = np.repeat(levels, hold)[:n]
    hod = hours % 24
    occ = np.where((hod >= 12) & (hod < 16), 4.0, np.where((hod >= 8) & (hod < 20), 2.0, 0.0))
    base = 6.0 if mode == "heating" else 27.0
    walk = np.cumsum(rng.normal(0.0, 0.3, n))
    walk -= np.linspace(0, walk[-1], n)
    t_ext = base + 4.0 * np.sin(2 * np.pi * (hod - 9) / 24) + walk + rng.normal(0, 0.5, n)
    return np.column_stack([t_ref, occ, t_ext])


def training_data(n=2000, mode="heating", noise=0.0, seed=0, ts=60.0):
    """``(X, y)`` from the truth model, optional Gaussian output noise.

    ``noise`` is relative to the standard deviation of the clean output.
    """
    from .thermal_model import simulate_array

    X = training_inputs(n, mode, seed, ts)
    y = simulate_array(truth_model(mode, ts), X, clip=False)
    if noise:
        rng = np.random.default_rng(seed + 1)
        y = y + rng.normal(0.0, noise * y.std(), y.size)
    return X, y


def _hours(start, step, n):
    start = start.astimezone(timezone.utc)
    t0 = start.timestamp() / 3600.0
    return t0 + np.arange(n) * step / 60.0


def _day_of_year(start, step, n):
    jan1 = datetime(start.year, 1, 1, tzinfo=timezone.utc).timestamp() / 3600.0
    return (_hours(start, step, n) - jan1) / 24.0


def carbon_intensity(start, n, step=60.0, seed=1):
    """gCO2/kWh: ~330 mean, midday solar dip, evening peak, AR(1) noise."""
    rng = np.random.default_rng(seed)
    hod = _hours(start, step, n) % 24
    doy = _day_of_year(start, step, n)
    seasonal = 30.0 * np.cos(2 * np.pi * doy / 366.0)
    daily = -60.0 * np.exp(-0.5 * ((hod - 13) / 2.5) ** 2) + 45.0 * np.exp(-0.5 * ((hod - 20) / 2.0) ** 2)
    eps = np.empty(n)
    acc = 0.0
    for i, e in enumerate(rng.normal(0, 12.0, n)):
        acc = 0.9 * acc + e
        eps[i] = acc
    return TimeSeries(start, step, np.clip(330 + seasonal + daily + eps, 50, None), Unit.G_PER_KWH)


def pv_energy(start, n, step=60.0, peak_kw=1.78, latitude=45.5, seed=2):
    """kWh per step from a clear-sky bell shaped by season plus daily cloud cover."""
    rng = np.random.default_rng(seed)
    hod = _hours(start, step, n) % 24
    doy = _day_of_year(start, step, n)
    decl = np.radians(23.44) * np.sin(2 * np.pi * (doy - 80) / 365.0)
    lat = np.radians(latitude)
    hour_angle = np.radians(15.0 * (hod + step / 120.0 - 12.0))
    sin_elev = np.sin(lat) * np.sin(decl) + np.cos(lat) * np.cos(decl) * np.cos(hour_angle)
    clear = np.clip(sin_elev, 0, None) ** 1.2
    days = np.floor(doy).astype(int)
    cloud = rng.uniform(0.25, 1.0, days.max() - days.min() + 1)[days - days.min()]
    return TimeSeries(start, step, 0.85 * peak_kw * clear * cloud * step / 60.0, Unit.KWH)


def external_temperature(start, n, step=60.0, seed=3):
    """Milan-like °C: annual swing 3..26 °C plus a daily cycle."""
    rng = np.random.default_rng(seed)
    hod = _hours(start, step, n) % 24
    doy = _day_of_year(start, step, n)
    annual = 14.5 - 11.5 * np.cos(2 * np.pi * (doy - 15) / 366.0)
    daily = 4.0 * np.sin(2 * np.pi * (hod - 9) / 24.0)
    return TimeSeries(start, step, annual + daily + rng.normal(0, 0.4, n), Unit.CELSIUS)


def desk_signals(start=datetime(2024, 11, 15, tzinfo=timezone.utc), days=14, step=60.0):
    """Hourly CI, PV and T_ext covering ``days`` from ``start``."""
    n = int(round(days * 24 * 60 / step))
    return {
        "ci": carbon_intensity(start, n, step),
        "pv": pv_energy(start, n, step),
        "t_ext": external_temperature(start, n, step),
    }
