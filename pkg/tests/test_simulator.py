import json
from dataclasses import replace
from datetime import date, datetime, timedelta, timezone

import numpy as np
import pytest

from conftest import desk_scenario
from thermal_ballast.controller import ControllerConfig, ForecastWindow, receding_step
from thermal_ballast.exceptions import EmptyLedger, ModelMissing, SignalGap
from thermal_ballast.report import write_ledger_csv, write_summary
from thermal_ballast.simulator import (
    Ledger,
    SimulationResult,
    StepRecord,
    aggregate,
    decide_all,
    delta_co2_step,
    mode_for,
    prepare,
    run,
    segment_state,
)
from thermal_ballast.timeseries import TimeSeries, Unit

T0 = datetime(2024, 11, 15, tzinfo=timezone.utc)


@pytest.fixture(scope="module")
def results(scenario):
    return run(scenario, controlled=False), run(scenario, controlled=True)


def record(hour, baseline, controlled, delta_T=0.0, day=T0):
    # one kWh of import at unit CI so emissions equal the given grams
    return StepRecord(day + timedelta(hours=hour), "heating", 20.0, 20.0 + delta_T, 0.0,
                      baseline, 0.0, 0.0, controlled, controlled, baseline - controlled, delta_T,
                      ci=1.0, baseline_import=baseline, baseline_emissions=baseline)


def test_baseline_run_has_no_control(results):
    base, _ = results
    for name in ("alpha", "delta_T", "delta_co2"):
        assert np.all(base.ledger[name] == 0.0)
    assert base.controlled_emissions_kg is None and base.emissions_reduction_percent is None
    np.testing.assert_array_equal(base.ledger["t_ref_applied"], base.ledger["t_ref_user"])


def test_controlled_run_reduces_emissions(results):
    base, ctrl = results
    assert ctrl.controlled_emissions_kg <= base.baseline_emissions_kg
    assert ctrl.baseline_emissions_kg == base.baseline_emissions_kg
    assert np.all(ctrl.ledger["emissions"] <= ctrl.ledger["baseline_emissions"] + 1e-12)
    assert ctrl.emissions_reduction_percent > 0


def test_ledger_invariants(results):
    _, ctrl = results
    led = ctrl.ledger
    assert np.all(led["grid_import"] >= 0)
    np.testing.assert_allclose(led["delta_T"], led["t_ref_applied"] - led["t_ref_user"], atol=1e-12)
    np.testing.assert_allclose(led["emissions"], led["grid_import"] * led["ci"], rtol=1e-15)
    assert np.all((led["alpha"] >= 0) & (led["alpha"] <= 1))
    # heating season: shifts are upward only, and only where there is surplus
    assert np.all(led["delta_T"] >= 0)
    assert np.all(led["delta_T"][led["surplus"] == 0] == 0)


def test_accounting_closes(results):
    _, ctrl = results
    led = ctrl.ledger
    total = (ctrl.baseline_emissions_kg - ctrl.controlled_emissions_kg) * 1000.0
    assert led["delta_co2"].sum() == pytest.approx(total, rel=1e-6)
    assert ctrl.controlled_emissions_kg * 1000 == pytest.approx(led["emissions"].sum(), rel=1e-12)
    assert ctrl.emissions_reduction_percent == pytest.approx(
        100 * (ctrl.baseline_emissions_kg - ctrl.controlled_emissions_kg) / ctrl.baseline_emissions_kg, rel=1e-9)
    assert ctrl.avg_daily_saving == pytest.approx(total / ctrl.n_days, rel=1e-9)


def test_released_energy_never_exceeds_stored(results):
    _, ctrl = results
    led = ctrl.ledger
    released = (led["baseline_import"] - led["grid_import"]).sum()
    stored = (led["alpha"] * led["surplus"]).sum()
    assert released <= stored + 1e-9


def test_zero_pv_matches_baseline(scenario):
    dark = replace(scenario, pv=TimeSeries(scenario.pv.start, scenario.pv.step,
                                           np.zeros(len(scenario.pv)), Unit.KWH))
    base, ctrl = run(dark, controlled=False), run(dark, controlled=True)
    for name in ("emissions", "grid_import", "e_pred"):
        np.testing.assert_array_equal(ctrl.ledger[name], base.ledger[name])
    assert ctrl.emissions_reduction_percent == 0.0


def test_huge_omega_collapses_to_baseline(scenario):
    base = run(scenario, controlled=False).ledger
    gaps = {}
    for omega in (1e14, 1e15):
        ctrl = run(scenario.with_controller(omega=omega)).ledger
        np.testing.assert_allclose(ctrl["emissions"], base["emissions"], rtol=1e-4 * 1e15 / omega, atol=1e-12)
        gaps[omega] = np.abs(ctrl["emissions"] - base["emissions"]).max()
        assert np.abs(ctrl["delta_T"]).max() < 1e-4 * 1e15 / omega
    # the residual decays as 1 / omega
    assert gaps[1e14] / gaps[1e15] == pytest.approx(10.0, rel=1e-6)


def test_runs_are_deterministic(scenario, tmp_path):
    a, b = run(scenario), run(scenario)
    write_ledger_csv(a, tmp_path / "a.csv")
    write_ledger_csv(b, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_vectorised_decisions_match_receding_steps(scenario):
    prepared = prepare(scenario)
    cfg = scenario.controller.with_(omega=1e12)
    alpha, raw, m_k, _ = decide_all(cfg, prepared)
    n = len(prepared)
    for k in list(range(0, n, 7)) + [n - 3, n - 2, n - 1]:
        model, state = segment_state(prepared, k)
        d = receding_step(cfg, model, prepared.signals, k, state)
        assert alpha[k] == pytest.approx(d.alpha, rel=1e-9, abs=1e-12)
        assert raw[k] == pytest.approx(d.alpha_unsaturated, rel=1e-9, abs=1e-12)
    assert m_k[-1] == 1 and alpha[-1] == 0.0


def test_mode_follows_calendar():
    assert mode_for(date(2024, 10, 15)) == "heating"
    assert mode_for(date(2024, 4, 15)) == "heating"
    assert mode_for(date(2024, 4, 16)) == "cooling"
    assert mode_for(date(2024, 10, 14)) == "cooling"
    assert mode_for(date(2024, 1, 1)) == "heating"
    assert mode_for(date(2024, 7, 1)) == "cooling"


def test_records_carry_season_mode():
    s = desk_scenario(days=6, start=datetime(2024, 4, 13, tzinfo=timezone.utc))
    ctrl = run(s)
    for r in ctrl.records:
        expected = "heating" if r.timestamp.date() <= date(2024, 4, 15) else "cooling"
        assert r.mode == expected
        if r.mode == "cooling":
            assert r.delta_T <= 0


def test_missing_model_and_signal_gap():
    s = desk_scenario(days=2)
    with pytest.raises(ModelMissing):
        run(replace(s, models={"cooling": s.models["cooling"]}))
    with pytest.raises(SignalGap):
        run(replace(s, end=s.end + timedelta(days=1)))


def test_delta_co2_step_examples():
    w = ForecastWindow([2.0, 0.0], [0.0, 1.0], [300.0, 300.0])
    assert delta_co2_step(w, 0.0) == 0.0
    assert delta_co2_step(ForecastWindow([1.0], [2.0], [300.0]), 1.0) == 0.0
    assert delta_co2_step(w, 1.0) == 150.0


def test_aggregate_examples():
    res = aggregate([record(8, 100.0, 90.0)])
    assert res.emissions_reduction_percent == pytest.approx(10.0, rel=1e-12)
    assert res.avg_daily_saving == pytest.approx(10.0, rel=1e-12)
    assert res.n_days == 1
    day = [record(h, 1.0, 1.0, dt) for h, dt in ((9, 0.0), (10, 0.2), (11, -0.5))]
    assert aggregate(day).max_daily_deltaT == 0.5
    assert aggregate(day).avg_daily_deltaT == pytest.approx(0.7 / 3, rel=1e-12)
    with pytest.raises(EmptyLedger):
        aggregate([])


def test_daily_statistics_use_local_days():
    # 23:30 UTC is the next day at UTC+1
    recs = [record(23.5, 1.0, 1.0, 0.4), record(22.0, 1.0, 1.0, 0.1)]
    assert aggregate(recs).n_days == 1
    shifted = aggregate(recs, utc_offset_hours=1.0)
    assert shifted.n_days == 2
    assert shifted.avg_daily_deltaT == pytest.approx(0.25, rel=1e-12)


def test_reference_table_values_format_cleanly(tmp_path):
    # medium-weight optimum quoted for the reference building
    empty = Ledger((), np.zeros(0, int), np.zeros(0, int), {})
    res = SimulationResult(empty, True, 7.52, 100.0, 5.612, 75.0, 25.37, 25.0, 52.30, 0.3, 0.9, 365)
    data = json.loads(write_summary(res, tmp_path / "s.json").read_text())
    assert data["emissions_reduction_percent"] == 25.37
    assert data["avg_daily_saving_g_per_day"] == 52.30
    assert (data["avg_daily_deltaT"], data["max_daily_deltaT"]) == (0.3, 0.9)


def test_controller_step_sets_resolution():
    s = desk_scenario(days=2, step=30.0)
    res = run(s)
    assert len(res.ledger) == 96
    assert res.ledger.timestamps[1] - res.ledger.timestamps[0] == timedelta(minutes=30)
    # energy per step halves, so the two-day baseline totals agree with the hourly run
    hourly = run(desk_scenario(days=2), controlled=False)
    assert res.baseline_energy_kwh == pytest.approx(hourly.baseline_energy_kwh, rel=0.05)


def test_config_recorded_on_result(scenario):
    res = run(scenario.with_controller(omega=123.0))
    assert res.config["omega"] == 123.0
    assert isinstance(res.summary()["config"], dict)
    assert ControllerConfig().horizon == 24
