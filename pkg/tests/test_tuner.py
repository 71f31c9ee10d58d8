import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import desk_scenario
from oracles import brute_force_front
from thermal_ballast.exceptions import NoFeasibleCell
from thermal_ballast.tuner import (
    THREADS_ENV,
    SweepCell,
    SweepSpec,
    default_n_jobs,
    heatmap_data,
    pareto_front,
    select_optimum,
    sweep,
)


def cell(red, dt, m=24.0, ts=60.0, omega=1e6):
    return SweepCell(m, ts, omega, red, red * 2, dt / 3, dt)


# reference building optima for the light, medium and heavy rooms
TABLE_CELLS = [
    SweepCell(12, 30, 1e6, 9.88, 19.67, 0.1, 0.5),
    SweepCell(24, 60, 1e6, 25.37, 52.30, 0.3, 0.9),
    SweepCell(48, 30, 1e6, 24.77, 46.06, 0.4, 1.2),
]


@pytest.fixture(scope="module")
def column():
    """One (m, ts) column over the full omega range on the desk scenario."""
    spec = SweepSpec(horizons=(24,), steps=(60,), omega_count=16)
    return sweep(desk_scenario(), spec).cells


def test_default_spec_mirrors_reference_grid():
    spec = SweepSpec()
    assert spec.horizons == (12, 18, 24, 48)
    assert spec.steps == (30, 60, 120, 180, 240)
    assert spec.omegas.size == 16
    assert spec.omegas[0] == 1.0 and spec.omegas[-1] == pytest.approx(1e15, rel=1e-12)
    assert spec.comfort_bound == 1.5
    assert SweepSpec.from_dict(spec.to_dict()) == spec


@pytest.mark.parametrize("kw", [dict(horizons=()), dict(omega_lo=10, omega_hi=1), dict(comfort_bound=0),
                                dict(steps=(-30,))])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        SweepSpec(**kw)


def test_comfort_dominated_cell_does_nothing():
    spec = SweepSpec(horizons=(24,), steps=(60,), omega_count=1, omega_lo=1e15)
    (only,) = sweep(desk_scenario(days=7), spec).cells
    assert only.emissions_reduction_percent == pytest.approx(0.0, abs=1e-3)
    assert only.max_daily_deltaT == pytest.approx(0.0, abs=1e-3)


def test_lower_omega_stores_more():
    spec = SweepSpec(horizons=(24,), steps=(60,), omega_count=2, omega_lo=1e6, omega_hi=1e15)
    low, high = sweep(desk_scenario(days=7), spec).cells
    assert low.omega < high.omega
    assert low.emissions_reduction_percent >= high.emissions_reduction_percent
    assert low.max_daily_deltaT >= high.max_daily_deltaT
    assert low.emissions_reduction_percent > 0


def test_small_sweep_bookkeeping():
    spec = SweepSpec(horizons=(12, 18), steps=(60, 240), omega_count=4)
    res = sweep(desk_scenario(days=4), spec)
    # 18 h is not a whole number of 240 min steps
    assert [(m, ts) for m, ts, _ in res.skipped] == [(18.0, 240.0)]
    assert len(res) == 16 - 4
    assert not res.failed
    keys = [(c.m, c.ts) for c in res.cells]
    assert keys == [(12.0, 60.0)] * 4 + [(12.0, 240.0)] * 4 + [(18.0, 60.0)] * 4
    assert all(np.isfinite([c.emissions_reduction_percent, c.max_daily_deltaT]).all() for c in res)
    assert all(c.emissions_reduction_percent >= 0 for c in res)


def test_parallel_sweep_matches_serial():
    spec = SweepSpec(horizons=(12,), steps=(60, 120), omega_count=3)
    scn = desk_scenario(days=3)
    assert sweep(scn, spec, n_jobs=1).cells == sweep(scn, spec, n_jobs=2).cells


def test_failing_cells_are_reported_not_raised():
    spec = SweepSpec(horizons=(12,), steps=(60, 45), omega_count=2)
    res = sweep(desk_scenario(days=2), spec)
    assert len(res.cells) == 2
    assert {f[1] for f in res.failed} == {45.0}


def test_omega_trade_off_along_a_column(column):
    red = [c.emissions_reduction_percent for c in column]
    dt = [c.max_daily_deltaT for c in column]
    assert np.all(np.diff(red) <= 1e-12)
    assert np.all(np.diff(dt) <= 1e-12)
    assert red[0] > red[-1]


def test_pareto_examples():
    a = cell(10, 0.5)
    assert pareto_front([a]) == [a]
    b = cell(25, 0.9)
    assert pareto_front([b, a]) == [a, b]
    worse, better = cell(10, 0.9), cell(25, 0.5)
    assert pareto_front([worse, better]) == [better]
    twin = cell(25, 0.5, m=12)
    assert pareto_front([better, twin, worse]) == [better, twin]
    assert pareto_front([]) == []


cells_strategy = st.lists(
    st.builds(cell, st.integers(0, 8).map(float), st.integers(0, 8).map(lambda v: v / 4)),
    min_size=1, max_size=50,
)


@settings(max_examples=150, deadline=None)
@given(cells_strategy)
def test_pareto_matches_brute_force(cells):
    front = pareto_front(cells)
    assert sorted(map(id, front)) == sorted(map(id, brute_force_front(cells)))
    dts = [c.max_daily_deltaT for c in front]
    assert dts == sorted(dts)


def test_select_optimum_examples():
    assert select_optimum(pareto_front(TABLE_CELLS), 1.5).emissions_reduction_percent == 25.37
    assert select_optimum(TABLE_CELLS, 0.6).emissions_reduction_percent == 9.88
    with pytest.raises(NoFeasibleCell):
        select_optimum(TABLE_CELLS, 0.0)
    only = cell(3, 0.2)
    assert select_optimum([only, cell(30, 2.0)]) is only


def test_select_optimum_tie_breaks():
    a = cell(10, 0.5, m=24, ts=60)
    b = cell(10, 0.4, m=48, ts=30)
    c = cell(10, 0.4, m=12, ts=30)
    d = cell(10, 0.4, m=12, ts=60)
    assert select_optimum([a, b, c, d]) is d


@settings(max_examples=60, deadline=None)
@given(cells_strategy, st.randoms(use_true_random=False))
def test_selection_ignores_order(cells, rnd):
    shuffled = list(cells)
    rnd.shuffle(shuffled)
    try:
        expected = select_optimum(cells, 1.0)
    except NoFeasibleCell:
        with pytest.raises(NoFeasibleCell):
            select_optimum(shuffled, 1.0)
        return
    assert select_optimum(shuffled, 1.0) == expected


def test_heatmap_picks_best_feasible_cell_per_pair():
    cells = [cell(r, d, m, ts) for (m, ts), (r, d) in
             itertools.product([(12, 30), (24, 30), (12, 60)], [(5, 0.3), (9, 2.0)])]
    data = heatmap_data(cells, horizons=[12, 24], steps=[30, 60], comfort_bound=1.5)
    np.testing.assert_array_equal(data["reduction"], [[5, 5], [5, np.nan]])
    assert data["max_deltaT"][0, 0] == 0.3


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert default_n_jobs() == 1
    monkeypatch.setenv(THREADS_ENV, "2")
    assert 1 <= default_n_jobs() <= 2
    monkeypatch.setenv(THREADS_ENV, "lots")
    with pytest.raises(ValueError):
        default_n_jobs()
