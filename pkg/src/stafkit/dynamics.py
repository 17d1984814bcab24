"""Fixed-step RK4 integration and the two shipped dynamical systems.

The integrator is the classical fourth-order Runge-Kutta scheme at a fixed
step shared with the weight-update clock; both experiment loops advance the
state with it.  Shipped systems: the planar rotation field (circular
trajectories) and a control-affine regulator with a known optimal solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

DriftFn = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class DynamicalSystem:
    """A first-order system xdot = drift(x, t), optionally control-affine.

    For control-affine systems xdot = f(x) + g(x) u, `f` and `g` are set and
    `drift` is the uncontrolled field (u = 0).  The drift is assumed locally
    Lipschitz on the working domain (documented contract, not checked).
    """

    dimension: int
    drift: DriftFn
    f: Callable[[np.ndarray], np.ndarray] | None = None
    g: Callable[[np.ndarray], np.ndarray] | None = None
    control_dim: int = 0

    @property
    def is_control_affine(self) -> bool:
        return self.f is not None and self.g is not None


def rk4_field_step(field: DriftFn, x: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One classical RK4 update of xdot = field(x, t); local error O(dt^5)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    x = np.asarray(x, dtype=float)
    k1 = np.asarray(field(x, t), dtype=float)
    k2 = np.asarray(field(x + 0.5 * dt * k1, t + 0.5 * dt), dtype=float)
    k3 = np.asarray(field(x + 0.5 * dt * k2, t + 0.5 * dt), dtype=float)
    k4 = np.asarray(field(x + dt * k3, t + dt), dtype=float)
    x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(x_next)):
        raise RuntimeError(f"non-finite state after RK4 step at t={t:.6g}, dt={dt:.6g}")
    return x_next


def rk4_step(system: DynamicalSystem, x: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One RK4 update of the system's drift field."""
    return rk4_field_step(system.drift, x, t, dt)


def closed_loop_field(
    system: DynamicalSystem, policy: Callable[[np.ndarray], np.ndarray]
) -> DriftFn:
    """Drift of the control-affine system under the state feedback `policy`."""
    if not system.is_control_affine:
        raise ValueError("closed loop requires a control-affine system")

    def field(x: np.ndarray, t: float) -> np.ndarray:
        return system.f(x) + system.g(x) @ np.atleast_1d(policy(x))

    return field


def circular_system() -> DynamicalSystem:
    """Planar rotation field xdot = [[0, 1], [-1, 0]] x; trajectories are circles."""
    a = np.array([[0.0, 1.0], [-1.0, 0.0]])

    def drift(x: np.ndarray, t: float) -> np.ndarray:
        return a @ x

    return DynamicalSystem(dimension=2, drift=drift)


def regulator_system() -> DynamicalSystem:
    """Control-affine regulator benchmark with a known optimal solution.

    f(x) = (x2 - x1, -x1/2 - x2 (1 - (cos(2 x1) + 2)^2) / 2),
    g(x) = (0, cos(2 x1) + 2)^T, one control input.

    With unit state and control cost the optimal value function is
    x1^2 / 2 + x2^2 and the optimal feedback is -(cos(2 x1) + 2) x2; see
    `regulator_optimal_value` / `regulator_optimal_control`.
    """

    def f(x: np.ndarray) -> np.ndarray:
        gx = math.cos(2.0 * x[0]) + 2.0
        return np.array(
            [
                x[1] - x[0],
                -0.5 * x[0] - 0.5 * x[1] * (1.0 - gx * gx),
            ]
        )

    def g(x: np.ndarray) -> np.ndarray:
        return np.array([[0.0], [math.cos(2.0 * x[0]) + 2.0]])

    def drift(x: np.ndarray, t: float) -> np.ndarray:
        return f(x)

    return DynamicalSystem(dimension=2, drift=drift, f=f, g=g, control_dim=1)


def regulator_optimal_value(x: np.ndarray) -> float:
    """Closed-form optimal cost-to-go of the regulator benchmark."""
    return 0.5 * x[0] * x[0] + x[1] * x[1]


def regulator_optimal_value_gradient(x: np.ndarray) -> np.ndarray:
    return np.array([x[0], 2.0 * x[1]])


def regulator_optimal_control(x: np.ndarray) -> np.ndarray:
    """Closed-form optimal feedback of the regulator benchmark."""
    return np.array([-(math.cos(2.0 * x[0]) + 2.0) * x[1]])
