from datetime import datetime, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.utils.validation import check_is_fitted

from oracles import naive_state_space
from thermal_ballast.exceptions import (
    ConstantTruth,
    InsufficientData,
    LengthMismatch,
    RankDeficient,
    StepMismatch,
    UnstableModel,
    ZeroScale,
)
from thermal_ballast.synthetic import training_data, training_inputs, truth_arx, truth_model
from thermal_ballast.thermal_model import (
    StateSpaceModel,
    StateSpaceRegressor,
    arx_to_state_space,
    identify,
    nmae,
    project_poles,
    r_squared,
    simulate,
    simulate_array,
)
from thermal_ballast.timeseries import TimeSeries, Unit

T0 = datetime(2024, 1, 1, tzinfo=timezone.utc)


def random_stable_model(rng, n=2):
    A = rng.normal(size=(n, n))
    A *= 0.9 / max(abs(np.linalg.eigvals(A)))
    return StateSpaceModel(A, rng.normal(size=(n, 3)), rng.normal(size=n), rng.normal(size=3), 60.0)


def series(values, unit=Unit.DIMENSIONLESS, step=60.0):
    return TimeSeries(T0, step, values, unit)


def test_pure_feedthrough():
    model = StateSpaceModel([[0.0]], [[0, 0, 0]], [0.0], [1, 0, 0], 60.0)
    out = simulate(model, [series(np.full(5, 20.0), Unit.CELSIUS), series(np.zeros(5)), series(np.zeros(5))])
    np.testing.assert_array_equal(out.values, 20.0)
    assert out.unit is Unit.KW


def test_zero_inputs_give_zero_power(rng):
    model = random_stable_model(rng)
    out = simulate(model, [series(np.zeros(10))] * 3)
    np.testing.assert_array_equal(out.values, 0.0)


def test_simulation_matches_naive_recursion(rng):
    model = random_stable_model(rng)
    U = rng.normal(size=(200, 3))
    x0 = rng.normal(size=2)
    fast = simulate_array(model, U, x0, clip=False)
    slow = naive_state_space(model.A.tolist(), model.B.tolist(), model.C.tolist(), model.D.tolist(), U, x0)
    np.testing.assert_allclose(fast, slow, rtol=0, atol=1e-12)
    np.testing.assert_array_equal(simulate_array(model, U, x0), np.maximum(fast, 0.0))


def test_simulate_checks_steps_and_lengths(rng):
    model = random_stable_model(rng)
    with pytest.raises(StepMismatch):
        simulate(model, [series(np.zeros(4), step=30.0)] * 3)
    with pytest.raises(LengthMismatch):
        simulate(model, [series(np.zeros(4)), series(np.zeros(4)), series(np.zeros(5))])


def test_unstable_model_rejected():
    with pytest.raises(UnstableModel):
        StateSpaceModel([[1.01]], [[1, 0, 0]], [1.0], [0, 0, 0], 60.0)


def test_r_squared_examples():
    assert r_squared([1, 2, 3], [1, 2, 3]) == 1.0
    assert r_squared([1, 2, 3], [2, 2, 2]) == 0.0
    assert r_squared([1, 2, 3], [1, 2, 4]) == 0.5
    with pytest.raises(ConstantTruth):
        r_squared([2, 2, 2], [1, 2, 3])
    with pytest.raises(InsufficientData):
        r_squared([1], [1])


def test_nmae_examples():
    assert nmae([1, 2, 3], [1, 2, 3]) == 0.0
    assert nmae([0, 10], [1, 9]) == 10.0
    # 3-sample hand case: errors (1, 0, 2), mean 1, scale 4 -> 25 %
    assert nmae([2, -4, 1], [3, -4, 3]) == 25.0
    with pytest.raises(ZeroScale):
        nmae([0, 0, 0], [1, 2, 3])


def test_noiseless_identification_recovers_coefficients():
    X, y = training_data(2000, "heating", noise=0.0, seed=3)
    est = StateSpaceRegressor(order=2).fit(X[:1400], y[:1400])
    a, b = truth_arx("heating")
    np.testing.assert_allclose(est.arx_a_, a, atol=1e-6)
    np.testing.assert_allclose(est.arx_b_, b, atol=1e-6)
    _, report = identify(X, y, order=2)
    assert report.r2 >= 1 - 1e-9


@pytest.mark.parametrize("mode", ["heating", "cooling"])
def test_noisy_identification_meets_targets(mode):
    X, y = training_data(2000, mode, noise=0.01, seed=0)
    model, report = identify(X, y, order=2, split_fraction=0.7, mode=mode)
    assert report.r2 >= 0.95
    assert report.nmae_percent <= 5.0
    assert model.mode == mode and model.order == 2
    assert report.n_validation == 2000 - 1400 - 20


def test_constant_inputs_are_rank_deficient():
    X = np.tile([20.0, 2.0, 5.0], (300, 1))
    y = np.random.default_rng(0).normal(size=300)
    with pytest.raises(RankDeficient):
        identify(X, y, order=2)


def test_identification_preconditions():
    X, y = training_data(120, "heating")
    with pytest.raises(InsufficientData):
        identify(X[:99], y[:99], order=2)
    with pytest.raises(ValueError):
        identify(X, y, split_fraction=0.5)
    with pytest.raises(ValueError):
        identify(X, y, split_fraction=0.95)


def test_order_selection_shape():
    X, y = training_data(2000, "heating", noise=0.01, seed=5)
    r2 = {n: identify(X, y, order=n)[1].r2 for n in (1, 2, 3)}
    assert r2[1] < r2[2]
    assert r2[3] - r2[2] < 0.01


def test_pole_projection_keeps_angles():
    roots = np.array([1.2 * np.exp(0.3j), 1.2 * np.exp(-0.3j), 0.5])
    a = np.real(np.poly(roots))[1:]
    a_new, moved = project_poles(a)
    assert moved
    new_roots = np.roots(np.concatenate(([1.0], a_new)))
    assert np.max(np.abs(new_roots)) == pytest.approx(0.995, rel=1e-9)
    assert sorted(np.round(np.abs(np.angle(new_roots)), 9)) == sorted(np.round(np.abs(np.angle(roots)), 9))
    assert project_poles([-0.5])[1] is False


def test_unstable_fit_is_projected():
    rng = np.random.default_rng(8)
    X = training_inputs(400, "heating", seed=8)
    # explosive AR(1) output driven by the inputs
    y = np.zeros(400)
    for k in range(1, 400):
        y[k] = 1.01 * y[k - 1] + 0.01 * X[k - 1, 0] + rng.normal(0, 0.01)
    est = StateSpaceRegressor(order=1).fit(X, y)
    assert est.projected_
    assert est.model_.spectral_radius == pytest.approx(0.995, rel=1e-9)


def test_regressor_follows_estimator_conventions():
    X, y = training_data(500, "cooling", seed=2)
    est = StateSpaceRegressor(order=2, mode="cooling")
    assert est.get_params() == {"order": 2, "ts": 60.0, "mode": "cooling", "pole_radius": 0.995}
    cloned = clone(est)
    cloned.fit(X, y)
    check_is_fitted(cloned)
    assert cloned.predict(X).shape == (500,)
    assert cloned.score(X, y) > 0.99
    with pytest.raises(ValueError):
        StateSpaceRegressor(order=4).fit(X, y)


def test_model_json_round_trip(tmp_path):
    model = truth_model("heating")
    path = tmp_path / "model.json"
    model.save(path)
    assert StateSpaceModel.load(path) == model


def test_resample_preserves_dc_gain():
    model = truth_model("heating")
    u = np.array([21.0, 2.0, 5.0])
    gain = lambda m: m.C @ m.steady_state(u) + m.D @ u
    for ts in (30.0, 120.0, 240.0, 90.0):
        assert gain(model.resample(ts)) == pytest.approx(gain(model), rel=1e-10)
    # integer multiples agree with stepping the original model
    two = model.resample(120.0)
    np.testing.assert_allclose(two.A, model.A @ model.A, rtol=1e-14)


def test_arx_realisation_matches_difference_equation(rng):
    a = np.array([-1.2, 0.35])
    b = rng.normal(size=(3, 3))
    model = arx_to_state_space(a, b, 60.0)
    U = rng.normal(size=(100, 3))
    y = simulate_array(model, U, clip=False)
    ref = np.zeros(100)
    for k in range(100):
        ref[k] = sum(-a[i - 1] * ref[k - i] for i in (1, 2) if k - i >= 0)
        ref[k] += sum(b[i] @ U[k - i] for i in range(3) if k - i >= 0)
    np.testing.assert_allclose(y, ref, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_simulation_is_linear_before_clipping(seed):
    rng = np.random.default_rng(seed)
    model = random_stable_model(rng, n=int(rng.integers(1, 4)))
    U1, U2 = rng.normal(size=(50, 3)), rng.normal(size=(50, 3))
    lhs = simulate_array(model, U1 + U2, clip=False)
    rhs = simulate_array(model, U1, clip=False) + simulate_array(model, U2, clip=False)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)
