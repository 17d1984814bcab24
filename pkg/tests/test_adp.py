"""Value model, Bellman error composition, and the online tuning loop."""

import math

import numpy as np
import pytest

from stafkit import (
    AdpConfig,
    CostSpec,
    DivergenceError,
    ValueModel,
    adp_centers,
    bellman_error,
    bellman_error_critic_gradient,
    control_hat,
    grad_value_hat,
    hjb_residual,
    regulator_optimal_control,
    regulator_optimal_value,
    regulator_optimal_value_gradient,
    regulator_system,
    run_adp,
    unit_cost,
    value_hat,
)


@pytest.fixture(scope="module")
def setup():
    system = regulator_system()
    cost = unit_cost(2, 1)
    model = ValueModel(centers=adp_centers())
    return system, cost, model


def test_cost_spec_validation():
    with pytest.raises(ValueError):
        CostSpec(Q=np.array([[1.0, 0.5], [0.0, 1.0]]), R=np.eye(1))
    with pytest.raises(ValueError):
        CostSpec(Q=np.diag([1.0, -1.0]), R=np.eye(1))
    spec = unit_cost(2, 1)
    assert np.allclose(spec.R_inv, np.eye(1))


def test_value_vanishes_at_origin(setup):
    _, _, model = setup
    rng = np.random.default_rng(30)
    for _ in range(10):
        w = rng.normal(size=3)
        assert value_hat(model, np.zeros(2), w) == 0.0
    assert value_hat(model, np.array([0.8, -0.3]), np.zeros(3)) == 0.0


def test_value_composes_centers_and_kernel(setup):
    _, _, model = setup
    x = np.array([1.0, 0.0])
    centers = model.centers.eval(x)
    expected = math.exp(float(x @ centers[0])) - 1.0
    assert value_hat(model, x, np.array([1.0, 0.0, 0.0])) == pytest.approx(
        expected, rel=1e-14
    )


def test_gradient_zero_weights(setup):
    _, _, model = setup
    assert np.allclose(grad_value_hat(model, np.array([0.5, 0.2]), np.zeros(3)), 0.0)


def test_gradient_at_origin_is_weighted_center_sum(setup):
    _, _, model = setup
    w = np.array([1.0, -0.5, 2.0])
    centers0 = model.centers.eval(np.zeros(2))
    expected = (w[:, None] * centers0).sum(axis=0)
    assert np.allclose(grad_value_hat(model, np.zeros(2), w), expected, atol=1e-15)


@pytest.mark.parametrize("convention", ["frozen", "total"])
def test_gradient_matches_finite_differences(setup, convention):
    _, _, model = setup
    rng = np.random.default_rng(31)
    h = 1e-6
    for _ in range(10):
        x = rng.uniform(-1.0, 1.0, size=2)
        w = rng.normal(size=3)
        if convention == "frozen":
            frozen_centers = model.centers.eval(x)

            def value_at(y):
                return float(np.expm1(frozen_centers @ y) @ w)

        else:

            def value_at(y):
                return value_hat(model, y, w)

        fd = np.zeros(2)
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fd[i] = (value_at(x + e) - value_at(x - e)) / (2 * h)
        grad = grad_value_hat(model, x, w, convention)
        denom = max(np.linalg.norm(fd), 1e-12)
        assert np.linalg.norm(grad - fd) / denom < 1e-5


def test_gradient_unknown_convention(setup):
    _, _, model = setup
    with pytest.raises(ValueError):
        grad_value_hat(model, np.zeros(2), np.zeros(3), "sideways")


def test_control_zero_weights(setup):
    system, cost, model = setup
    u = control_hat(system, cost, model, np.array([0.7, -0.2]), np.zeros(3))
    assert np.allclose(u, 0.0)


def test_control_small_near_origin(setup):
    system, cost, model = setup
    rng = np.random.default_rng(32)
    for _ in range(10):
        w = rng.normal(size=3)
        u = control_hat(system, cost, model, np.zeros(2), w)
        bound = 0.0105 * np.linalg.norm(system.g(np.zeros(2))) * np.abs(w).sum()
        assert abs(float(u[0])) <= bound


def test_bellman_error_zero_at_origin_with_zero_actor(setup):
    system, cost, model = setup
    rng = np.random.default_rng(33)
    for _ in range(5):
        w_c = rng.normal(size=3)
        assert bellman_error(system, cost, model, np.zeros(2), np.zeros(3), w_c) == 0.0


def test_bellman_error_recomposition(setup):
    # oracle: reassemble the three summands from the primitives separately
    system, cost, model = setup
    rng = np.random.default_rng(34)
    for _ in range(20):
        x = rng.uniform(-1.5, 1.5, size=2)
        w_a = rng.normal(size=3)
        w_c = rng.normal(size=3)
        u = control_hat(system, cost, model, x, w_a)
        grad_c = grad_value_hat(model, x, w_c)
        manual = (
            float(x @ cost.Q @ x)
            + float(u @ cost.R @ u)
            + float(grad_c @ (system.f(x) + system.g(x) @ u))
        )
        assert bellman_error(system, cost, model, x, w_a, w_c) == pytest.approx(
            manual, rel=1e-12, abs=1e-12
        )


def test_hjb_residual_vanishes_for_analytic_pair(setup):
    system, cost, _ = setup
    for x1 in np.linspace(-2, 2, 21):
        for x2 in np.linspace(-2, 2, 21):
            x = np.array([x1, x2])
            residual = hjb_residual(
                system,
                cost,
                x,
                regulator_optimal_value_gradient(x),
                regulator_optimal_control(x),
            )
            assert abs(residual) < 1e-10


def test_critic_gradient_linearity(setup):
    # the residual is linear in the critic weights with slope omega
    system, cost, model = setup
    rng = np.random.default_rng(35)
    x = rng.uniform(-1.0, 1.0, size=2)
    w_a = rng.normal(size=3)
    omega = bellman_error_critic_gradient(system, cost, model, x, w_a)
    base = bellman_error(system, cost, model, x, w_a, np.zeros(3))
    for _ in range(5):
        w_c = rng.normal(size=3)
        predicted = base + float(omega @ w_c)
        assert bellman_error(system, cost, model, x, w_a, w_c) == pytest.approx(
            predicted, rel=1e-10, abs=1e-10
        )


def test_run_adp_equilibrium_at_origin(setup):
    system, cost, model = setup
    config = AdpConfig(x0=np.zeros(2), total_time=1.0)
    trace = run_adp(system, cost, model, config)
    assert len(trace.states) == 100
    final = trace.states[-1]
    assert np.linalg.norm(final.x) < 1e-12
    assert np.allclose(final.critic_weights, 1.0, atol=1e-12)
    assert np.allclose(final.actor_weights, 1.0, atol=1e-12)


def test_run_adp_short_run_is_stable_and_recorded(setup):
    system, cost, model = setup
    config = AdpConfig(x0=np.array([-1.0, 1.0]), total_time=2.0)
    trace = run_adp(system, cost, model, config)
    assert len(trace.states) == 200
    assert np.all(np.isfinite(trace.states_matrix()))
    assert np.linalg.norm(trace.states[-1].x) < np.linalg.norm(trace.states[0].x)
    # ground truth on by default: error traces populated
    assert np.isfinite(trace.value_errors()).all()
    assert np.isfinite(trace.control_errors()).all()


def test_run_adp_without_ground_truth(setup):
    system, cost, model = setup
    config = AdpConfig(x0=np.array([-0.5, 0.5]), total_time=0.5, ground_truth=False)
    trace = run_adp(system, cost, model, config)
    assert trace.states[-1].value_error is None
    assert np.isnan(trace.value_errors()).all()


def test_run_adp_actor_tracks_critic(setup):
    # with unit actor gain the actor lands on the critic after each update
    system, cost, model = setup
    config = AdpConfig(x0=np.array([0.5, -0.5]), total_time=0.5)
    trace = run_adp(system, cost, model, config)
    for s in trace.states[::10]:
        assert np.allclose(s.actor_weights, s.critic_weights, atol=1e-14)


def test_run_adp_partial_actor_gain(setup):
    system, cost, model = setup
    config = AdpConfig(x0=np.array([0.5, -0.5]), total_time=0.5, actor_gain=0.1)
    trace = run_adp(system, cost, model, config)
    gaps = [
        np.linalg.norm(s.actor_weights - s.critic_weights) for s in trace.states
    ]
    assert gaps[0] > 0.0 or gaps[1] > 0.0
    assert np.all(np.isfinite(gaps))


def test_run_adp_divergence_guard(setup):
    system, cost, model = setup
    config = AdpConfig(x0=np.array([-1.0, 1.0]), total_time=5.0, state_cap=0.5)
    with pytest.raises(DivergenceError, match="state norm"):
        run_adp(system, cost, model, config)


def test_run_adp_total_convention_runs(setup):
    system, cost, model = setup
    config = AdpConfig(x0=np.array([-1.0, 1.0]), total_time=2.0, convention="total")
    trace = run_adp(system, cost, model, config)
    assert np.linalg.norm(trace.states[-1].x) < 1.0


def test_run_adp_dither_window(setup):
    system, cost, model = setup
    config = AdpConfig(
        x0=np.array([-1.0, 1.0]),
        total_time=2.0,
        dither_amplitude=0.2,
        dither_time=1.0,
    )
    trace = run_adp(system, cost, model, config)
    base = run_adp(system, cost, model, AdpConfig(x0=np.array([-1.0, 1.0]), total_time=2.0))
    # the probe perturbs the trajectory during the window
    mid = len(trace.states) // 2
    assert not np.allclose(trace.states[mid].x, base.states[mid].x)
