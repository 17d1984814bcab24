"""Moving-kernel value/actor parameterizations for the infinite-horizon regulator.

The value function is approximated by V(y; x, W) = sum_i W_i (exp(y . c_i(x)) - 1)
with centers that travel with the state, so the basis vanishes at the origin
and only three kernel terms are carried.  The feedback is the usual
control-affine minimizer -R^-1 g^T grad(V)/2 applied to the actor weights,
and both weight vectors are tuned online from the instantaneous residual of
the Hamilton-Jacobi-Bellman equation.

The online tuning rule here is a deliberately simple substitute law (the
source analysis defers its own update laws to companion work): the critic
takes a normalized gradient step on the squared residual each time step and
the actor tracks the critic.  It is documented as such and validated by the
property suite, not claimed to reproduce any published law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .centers import CenterMap
from .dynamics import (
    DynamicalSystem,
    closed_loop_field,
    regulator_optimal_control,
    regulator_optimal_value,
    rk4_field_step,
)


class DivergenceError(RuntimeError):
    """State or weights exceeded the configured caps during an online run."""


@dataclass(frozen=True)
class CostSpec:
    """Quadratic running cost x^T Q x + u^T R u with SPD Q and R."""

    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        r = np.atleast_2d(np.asarray(self.R, dtype=float))
        for name, mat in (("Q", q), ("R", r)):
            if mat.shape[0] != mat.shape[1]:
                raise ValueError(f"{name} must be square")
            if not np.allclose(mat, mat.T, atol=1e-12):
                raise ValueError(f"{name} must be symmetric")
            if np.min(np.linalg.eigvalsh(mat)) <= 0.0:
                raise ValueError(f"{name} must be positive definite")
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "R", r)
        object.__setattr__(self, "_R_inv", np.linalg.inv(r))

    @property
    def R_inv(self) -> np.ndarray:
        return self._R_inv


def unit_cost(n: int, m: int) -> CostSpec:
    """Identity state and control weighting (the shipped experiment's cost)."""
    return CostSpec(Q=np.eye(n), R=np.eye(m))


@dataclass(frozen=True)
class ValueModel:
    """Value parameterization V(y; x, W) = sum_i W_i (exp(y . c_i(x)) - 1).

    The -1 offset makes every basis function vanish at y = 0, so the value
    estimate is exactly zero at the origin for all weights.
    """

    centers: CenterMap

    @property
    def weight_count(self) -> int:
        return self.centers.count


def basis_values(model: ValueModel, x: np.ndarray) -> np.ndarray:
    """Basis vector (exp(x . c_i(x)) - 1)_i at evaluation point y = x."""
    x = np.asarray(x, dtype=float)
    centers = model.centers.eval(x)
    return np.expm1(centers @ x)


def basis_gradients(
    model: ValueModel, x: np.ndarray, convention: str = "frozen"
) -> np.ndarray:
    """Gradients of the basis functions at y = x, one row per basis (M, n).

    convention="frozen": derivative in the evaluation point y only, centers
    held at c_i(x); row i is exp(x . c_i(x)) c_i(x).  This is the default used
    by the feedback law.

    convention="total": additionally differentiates the center anchor, adding
    exp(x . c_i(x)) (dc_i/dx)^T x per row.  Exposed for comparison.
    """
    x = np.asarray(x, dtype=float)
    centers = model.centers.eval(x)
    scale = np.exp(centers @ x)
    grads = scale[:, None] * centers
    if convention == "frozen":
        return grads
    if convention == "total":
        # d/dx [x . c_i(x)] = c_i(x) + (I + dd_i/dx)^T x; the frozen rows
        # already carry the c_i part.
        offset_jacs = model.centers.offset_jacobians_at(x)
        for i in range(model.weight_count):
            center_jac = np.eye(x.shape[0]) + offset_jacs[i]
            grads[i] += scale[i] * (center_jac.T @ x)
        return grads
    raise ValueError(f"unknown gradient convention: {convention!r}")


def value_hat(model: ValueModel, x: np.ndarray, weights: np.ndarray) -> float:
    """Value estimate at the current state (evaluation point = anchor point)."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (model.weight_count,):
        raise ValueError(f"expected {model.weight_count} weights")
    return float(basis_values(model, x) @ weights)


def grad_value_hat(
    model: ValueModel, x: np.ndarray, weights: np.ndarray, convention: str = "frozen"
) -> np.ndarray:
    """State gradient of the value estimate under the chosen convention."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (model.weight_count,):
        raise ValueError(f"expected {model.weight_count} weights")
    return basis_gradients(model, x, convention).T @ weights


def control_hat(
    system: DynamicalSystem,
    cost: CostSpec,
    model: ValueModel,
    x: np.ndarray,
    actor_weights: np.ndarray,
    convention: str = "frozen",
) -> np.ndarray:
    """Feedback -R^-1 g(x)^T grad(V)(x, W_a) / 2 from the actor weights."""
    if not system.is_control_affine:
        raise ValueError("control requires a control-affine system")
    grad = grad_value_hat(model, x, actor_weights, convention)
    return -0.5 * cost.R_inv @ (system.g(np.asarray(x, dtype=float)).T @ grad)


def hjb_residual(
    system: DynamicalSystem,
    cost: CostSpec,
    x: np.ndarray,
    value_gradient: np.ndarray,
    control: np.ndarray,
) -> float:
    """Residual x^T Q x + u^T R u + grad(V) . (f(x) + g(x) u).

    Vanishes identically when the supplied gradient and control come from the
    optimal value function; nonzero values measure the Bellman error of an
    approximation pair.
    """
    x = np.asarray(x, dtype=float)
    u = np.atleast_1d(np.asarray(control, dtype=float))
    grad = np.asarray(value_gradient, dtype=float)
    xdot = system.f(x) + system.g(x) @ u
    return float(x @ cost.Q @ x + u @ cost.R @ u + grad @ xdot)


def bellman_error(
    system: DynamicalSystem,
    cost: CostSpec,
    model: ValueModel,
    x: np.ndarray,
    actor_weights: np.ndarray,
    critic_weights: np.ndarray,
    convention: str = "frozen",
) -> float:
    """Bellman error of the (actor, critic) pair at the state x."""
    u = control_hat(system, cost, model, x, actor_weights, convention)
    grad_c = grad_value_hat(model, x, critic_weights, convention)
    return hjb_residual(system, cost, x, grad_c, u)


def bellman_error_critic_gradient(
    system: DynamicalSystem,
    cost: CostSpec,
    model: ValueModel,
    x: np.ndarray,
    actor_weights: np.ndarray,
    convention: str = "frozen",
) -> np.ndarray:
    """Gradient of the Bellman error in the critic weights.

    The residual is linear in W_c: component i is the basis gradient of unit
    weight i dotted with the closed-loop field under the actor control.
    """
    x = np.asarray(x, dtype=float)
    u = control_hat(system, cost, model, x, actor_weights, convention)
    xdot = system.f(x) + system.g(x) @ u
    return basis_gradients(model, x, convention) @ xdot


@dataclass(frozen=True)
class AdpConfig:
    """Online-run settings: initial data, gains, caps, and optional extras.

    The ground-truth comparison (known optimal value/control of the shipped
    regulator) populates the value/control error traces when enabled.  The
    dither adds a decaying sinusoidal probe to the control during an initial
    window; it defaults to off.
    """

    x0: np.ndarray
    dt: float = 0.01
    total_time: float = 40.0
    critic_gain: float = 1.0
    actor_gain: float = 1.0
    initial_critic: np.ndarray | None = None
    initial_actor: np.ndarray | None = None
    convention: str = "frozen"
    ground_truth: bool = True
    dither_amplitude: float = 0.0
    dither_time: float = 0.0
    state_cap: float = 50.0
    weight_cap: float = 1e3

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.total_time < 0.0:
            raise ValueError("total_time must be nonnegative")


@dataclass(frozen=True)
class AdpState:
    """One recorded step of the online run.

    `value_error` and `control_error` are against the known optimal solution
    and are None when the ground-truth comparison is disabled.
    """

    t: float
    x: np.ndarray
    actor_weights: np.ndarray
    critic_weights: np.ndarray
    bellman: float
    value_error: float | None = None
    control_error: float | None = None


@dataclass
class AdpTrace:
    states: list[AdpState] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def states_matrix(self) -> np.ndarray:
        return np.array([s.x for s in self.states])

    def actor_matrix(self) -> np.ndarray:
        return np.array([s.actor_weights for s in self.states])

    def critic_matrix(self) -> np.ndarray:
        return np.array([s.critic_weights for s in self.states])

    def bellman_errors(self) -> np.ndarray:
        return np.array([s.bellman for s in self.states])

    def value_errors(self) -> np.ndarray:
        return np.array(
            [math.nan if s.value_error is None else s.value_error for s in self.states]
        )

    def control_errors(self) -> np.ndarray:
        return np.array(
            [
                math.nan if s.control_error is None else s.control_error
                for s in self.states
            ]
        )


def _dither(config: AdpConfig, t: float) -> float:
    if config.dither_amplitude == 0.0 or t >= config.dither_time:
        return 0.0
    decay = 1.0 - t / config.dither_time
    return config.dither_amplitude * decay * (
        math.sin(7.0 * t) + math.sin(3.1 * t + 1.0)
    )


def run_adp(
    system: DynamicalSystem,
    cost: CostSpec,
    model: ValueModel,
    config: AdpConfig,
) -> AdpTrace:
    """Closed-loop online run: adapt weights from the residual, drive the state.

    Per step: evaluate the Bellman error at the current state and weights,
    apply the substitute update law (normalized critic gradient step, actor
    tracking), record the step, then advance the state one RK4 step under the
    actor feedback (weights frozen during the step).  Exceeding the state or
    weight caps aborts with diagnostics.
    """
    if not system.is_control_affine:
        raise ValueError("online tuning requires a control-affine system")
    m = model.weight_count
    x = np.array(config.x0, dtype=float)
    w_c = (
        np.ones(m)
        if config.initial_critic is None
        else np.array(config.initial_critic, dtype=float)
    )
    w_a = (
        w_c.copy()
        if config.initial_actor is None
        else np.array(config.initial_actor, dtype=float)
    )
    if w_c.shape != (m,) or w_a.shape != (m,):
        raise ValueError(f"weight vectors must have length {m}")

    gt = config.ground_truth
    n_steps = int(round(config.total_time / config.dt))
    trace = AdpTrace()

    for k in range(n_steps):
        t = k * config.dt
        delta = bellman_error(system, cost, model, x, w_a, w_c, config.convention)
        omega = bellman_error_critic_gradient(
            system, cost, model, x, w_a, config.convention
        )
        norm2 = float(omega @ omega)
        w_c = w_c - config.critic_gain * delta / (1.0 + norm2) ** 2 * omega
        w_a = w_a + config.actor_gain * (w_c - w_a)

        value_err = None
        control_err = None
        if gt:
            value_err = abs(value_hat(model, x, w_c) - regulator_optimal_value(x))
            u_hat = control_hat(system, cost, model, x, w_a, config.convention)
            control_err = float(
                np.linalg.norm(u_hat - regulator_optimal_control(x))
            )
        trace.states.append(
            AdpState(
                t=t,
                x=x.copy(),
                actor_weights=w_a.copy(),
                critic_weights=w_c.copy(),
                bellman=delta,
                value_error=value_err,
                control_error=control_err,
            )
        )

        if np.linalg.norm(x) > config.state_cap:
            raise DivergenceError(
                f"step {k} (t={t:.6g}): state norm {np.linalg.norm(x):.3e} "
                f"exceeds cap {config.state_cap:.3e}"
            )
        if np.linalg.norm(w_c) > config.weight_cap or np.linalg.norm(w_a) > config.weight_cap:
            raise DivergenceError(
                f"step {k} (t={t:.6g}): weight norm exceeds cap {config.weight_cap:.3e}"
            )

        def policy(y: np.ndarray, _t: float = t) -> np.ndarray:
            u = control_hat(system, cost, model, y, w_a, config.convention)
            return u + _dither(config, _t)

        x = rk4_field_step(closed_loop_field(system, policy), x, t, config.dt)

    return trace
