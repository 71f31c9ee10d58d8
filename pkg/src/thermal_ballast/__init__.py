"""Carbon-aware setpoint control that stores PV surplus in building thermal mass.

Pipeline: identify a state-space surrogate, size the thermal mass from the
envelope, pick the storage fraction in closed form at every step, and
account grid emissions against a baseline run.
"""

from .comfort import ComfortInput, ComfortResult, classify, pmv, ppd
from .controller import (
    CarbonAwareController,
    ControlDecision,
    ControllerConfig,
    ForecastWindow,
    alpha_star,
    receding_step,
)
from .envelope import Construction, Layer, areal_heat_capacity, summarize, total_capacity
from .exceptions import ThermalBallastError
from .simulator import ScenarioConfig, SimulationResult, StepRecord, aggregate, run
from .thermal_model import StateSpaceModel, StateSpaceRegressor, identify, simulate
from .timeseries import Schedule, TimeSeries, Unit, resample, window
from .tuner import SweepCell, SweepSpec, pareto_front, select_optimum, sweep

__version__ = "0.1.0"

__all__ = [
    "CarbonAwareController",
    "ComfortInput",
    "ComfortResult",
    "Construction",
    "ControlDecision",
    "ControllerConfig",
    "ForecastWindow",
    "Layer",
    "Schedule",
    "ScenarioConfig",
    "SimulationResult",
    "StateSpaceModel",
    "StateSpaceRegressor",
    "StepRecord",
    "SweepCell",
    "SweepSpec",
    "ThermalBallastError",
    "TimeSeries",
    "Unit",
    "aggregate",
    "alpha_star",
    "areal_heat_capacity",
    "classify",
    "identify",
    "pareto_front",
    "pmv",
    "ppd",
    "receding_step",
    "resample",
    "run",
    "select_optimum",
    "simulate",
    "summarize",
    "sweep",
    "total_capacity",
    "window",
]
