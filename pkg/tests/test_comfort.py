import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import pmv_by_root_finding
from thermal_ballast.comfort import (
    ComfortInput,
    ComfortResult,
    classify,
    clothing_surface_temperature,
    pmv,
    ppd,
)
from thermal_ballast.exceptions import NoConvergence

# office conditions at the user setpoint and at the setpoint pushed by 1.2 K
SEASON_CASES = [
    (ComfortInput(20.0, air_speed=0.1, clothing=1.1), -0.31),
    (ComfortInput(21.2, air_speed=0.1, clothing=1.1), -0.05),
    (ComfortInput(26.0, air_speed=0.15, clothing=0.6), 0.33),
    (ComfortInput(24.8, air_speed=0.15, clothing=0.6), -0.04),
]

# ISO 7730 Annex D style cases, air speed already relative to the body
STANDARD_CASES = [
    (dict(air_temp=22.0, mean_radiant_temp=22.0, air_speed=0.1, relative_humidity=60, metabolic_rate=1.2,
          clothing=0.5), -0.75),
    (dict(air_temp=27.0, mean_radiant_temp=27.0, air_speed=0.1, relative_humidity=60, metabolic_rate=1.2,
          clothing=0.5), 0.77),
    (dict(air_temp=23.5, mean_radiant_temp=25.5, air_speed=0.1, relative_humidity=60, metabolic_rate=1.2,
          clothing=0.5), -0.01),
    (dict(air_temp=27.0, mean_radiant_temp=27.0, air_speed=0.3, relative_humidity=60, metabolic_rate=1.2,
          clothing=0.5), 0.44),
]


@pytest.mark.parametrize("inp,expected", SEASON_CASES)
def test_office_seasons_reproduce_reference_votes(inp, expected):
    assert abs(pmv(inp).pmv - expected) <= 0.05


@pytest.mark.parametrize("inp,expected", SEASON_CASES)
def test_frozen_votes(inp, expected):
    # frozen after agreeing with the root-finding oracle; guards against drift
    frozen = {-0.31: -0.3128, -0.05: -0.0544, 0.33: 0.3290, -0.04: -0.0402}[expected]
    assert pmv(inp).pmv == pytest.approx(frozen, abs=5e-4)


@pytest.mark.parametrize("inp,_", SEASON_CASES)
def test_agrees_with_root_finding_oracle(inp, _):
    ref = pmv_by_root_finding(inp.air_temp, inp.mean_radiant_temp, inp.relative_air_speed,
                              inp.relative_humidity, inp.metabolic_rate, inp.clothing)
    assert pmv(inp).pmv == pytest.approx(ref, abs=1e-3)


@pytest.mark.parametrize("kw,expected", STANDARD_CASES)
def test_standard_reference_cases(kw, expected):
    assert pmv(ComfortInput(relative_speed=True, **kw)).pmv == pytest.approx(expected, abs=0.02)


def test_body_movement_raises_relative_speed():
    still = ComfortInput(20.0, air_speed=0.1, metabolic_rate=1.2)
    assert still.relative_air_speed == pytest.approx(0.16, rel=1e-12)
    assert ComfortInput(20.0, air_speed=0.1, metabolic_rate=1.0).relative_air_speed == 0.1
    assert ComfortInput(20.0, air_speed=0.1, relative_speed=True).relative_air_speed == 0.1


def test_classify_examples():
    assert classify(-0.31, "existing")
    assert not classify(0.6, "new")
    assert classify(0.0, "new") and classify(0.0, "existing")
    assert not classify(0.7, "existing")  # bound is strict
    assert classify(ComfortResult(0.45, ppd(0.45)), "new")
    with pytest.raises(ValueError):
        classify(0.1, "passive")


def test_ppd_minimum_is_five_at_neutral():
    assert ppd(0.0) == 5.0
    values = [ppd(v) for v in np.linspace(-3, 3, 601)]
    assert min(values) == 5.0
    assert ppd(1.0) == pytest.approx(26.1, abs=0.1)


def test_pmv_increases_with_air_temperature():
    votes = [pmv(ComfortInput(t, clothing=0.8)).pmv for t in np.arange(18.0, 30.01, 0.25)]
    assert np.all(np.diff(votes) > 0)


@settings(max_examples=60, deadline=None)
@given(ta=st.floats(18, 28), delta=st.floats(0.1, 2.0), clo=st.floats(0.3, 1.5),
       v=st.floats(0.0, 0.5), rh=st.floats(20, 80))
def test_warming_and_cooling_move_votes_apart(ta, delta, clo, v, rh):
    inp = ComfortInput(ta, air_speed=v, relative_humidity=rh, clothing=clo)
    mid = pmv(inp).pmv
    assert pmv(inp.shifted(delta)).pmv > mid > pmv(inp.shifted(-delta)).pmv


def test_result_bookkeeping():
    res = pmv(ComfortInput(22.0))
    assert res.ppd == ppd(res.pmv)
    assert res.ppd >= 5.0
    assert 1 <= res.iterations <= 200
    assert 22.0 < res.t_clothing < 35.0
    assert res.to_dict() == {"pmv": res.pmv, "ppd": res.ppd}


def test_no_convergence_is_reported():
    with pytest.raises(NoConvergence):
        clothing_surface_temperature(ComfortInput(20.0), max_iter=1)


@pytest.mark.parametrize("kw", [
    dict(air_speed=-0.1), dict(relative_humidity=120.0), dict(metabolic_rate=0.0),
    dict(clothing=-0.5), dict(air_temp=float("nan")),
])
def test_input_validation(kw):
    base = dict(air_temp=20.0)
    with pytest.raises(ValueError):
        ComfortInput(**{**base, **kw})
