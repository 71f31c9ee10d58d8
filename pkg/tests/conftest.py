import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
import pytest

from thermal_ballast.controller import ControllerConfig
from thermal_ballast.simulator import ScenarioConfig
from thermal_ballast.synthetic import desk_signals, truth_model

DESK_START = datetime(2024, 11, 15, tzinfo=timezone.utc)


def desk_scenario(days=14, start=DESK_START, step=60.0, **controller):
    signals = desk_signals(start, days=days)
    models = {"heating": truth_model("heating"), "cooling": truth_model("cooling")}
    return ScenarioConfig(
        start=start,
        end=start + timedelta(days=days),
        ci=signals["ci"],
        pv=signals["pv"],
        t_ext=signals["t_ext"],
        models=models,
        controller=ControllerConfig(step=step, **controller),
    )


@pytest.fixture(scope="session")
def scenario():
    return desk_scenario()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_project(directory, start=DESK_START, days=14, controller=None, **overrides):
    """Write synthetic signals, truth models and a project file; return its path."""
    from thermal_ballast.timeseries import format_timestamp, write_series_csv

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    signals = desk_signals(start, days=days)
    datasets = {}
    for name, unit in (("ci", "gCO2/kWh"), ("pv", "kWh"), ("t_ext", "degC")):
        write_series_csv(signals[name], directory / f"{name}.csv")
        datasets[name] = {"path": f"{name}.csv", "unit": unit}
    for mode in ("heating", "cooling"):
        truth_model(mode).save(directory / f"{mode}.json")
    project = {
        "schema_version": 1,
        "datasets": datasets,
        "models": {"heating": "heating.json", "cooling": "cooling.json"},
        "scenario": {"start": format_timestamp(start), "end": format_timestamp(start + timedelta(days=days))},
        "controller": {"horizon_hours": 24, "step_minutes": 60, "omega": 1e12} if controller is None else controller,
        "output_dir": "out",
    }
    project.update(overrides)
    path = directory / "project.json"
    path.write_text(json.dumps(project, indent=2))
    return path


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def verdict(number, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
