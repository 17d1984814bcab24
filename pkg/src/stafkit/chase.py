"""Exact-line-search gradient descent on moving-center weight error.

At each time step the centers are frozen at the current state and a fixed
number of gradient steps with the exact quadratic line search are applied to
the weights; the centers then move with the state and the process repeats.
Each inner step contracts the squared-norm weight error by at least the
Kantorovich factor of the current Gram matrix, so the tracking error is
driven into a band whose width shrinks with the update period.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .centers import CenterMap
from .dynamics import DynamicalSystem, rk4_step
from .rkhs import (
    CONDITION_CAP,
    ConditioningError,
    ExponentialKernel,
    GramMatrix,
    TargetFunction,
    build_gram,
    ideal_weights_solve,
    rkhs_error_quadratic,
    sample_target,
)


@dataclass(frozen=True)
class ChaseConfig:
    """Run settings for the moving-approximation loop.

    `inner_iterations` gradient steps are taken per time step of size `dt`.
    `domain_halfwidth` declares the compact working box; excursions are
    recorded as warnings but do not stop the run.
    """

    x0: np.ndarray
    dt: float = 0.01
    inner_iterations: int = 10
    total_time: float = 14.0
    initial_weights: np.ndarray | None = None
    domain_halfwidth: float = 2.0
    condition_cap: float = CONDITION_CAP

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.inner_iterations < 1:
            raise ValueError("inner_iterations must be >= 1")
        if self.total_time < 0.0:
            raise ValueError("total_time must be nonnegative")


@dataclass(frozen=True)
class ChaseState:
    """One recorded step: weights, ideal weights, and error diagnostics.

    `error` is the quadratic surrogate (a - w)^T K (a - w) recomputed from
    scratch at this step's Gram matrix; `contraction_factor` is the
    Kantorovich bound of that Gram matrix.
    """

    t: float
    x: np.ndarray
    weights: np.ndarray
    ideal_weights: np.ndarray
    error: float
    contraction_factor: float


@dataclass
class ChaseTrace:
    states: list[ChaseState] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def states_matrix(self) -> np.ndarray:
        return np.array([s.x for s in self.states])

    def weights_matrix(self) -> np.ndarray:
        return np.array([s.weights for s in self.states])

    def ideal_weights_matrix(self) -> np.ndarray:
        return np.array([s.ideal_weights for s in self.states])

    def errors(self) -> np.ndarray:
        return np.array([s.error for s in self.states])


def gradient(gram: GramMatrix, samples: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Descent direction g = 2 V(c) - 2 K(c) a (negative objective gradient)."""
    samples = np.asarray(samples, dtype=float)
    a = np.asarray(a, dtype=float)
    if samples.shape != (gram.size,) or a.shape != (gram.size,):
        raise ValueError("sample/weight dimensions do not match the Gram matrix")
    return 2.0 * (samples - gram.entries @ a)


def optimal_step(gram: GramMatrix, g: np.ndarray, zero_tol: float = 1e-14) -> float:
    """Exact line-search step g.g / (2 g^T K g); zero for a vanishing direction."""
    g = np.asarray(g, dtype=float)
    if float(np.linalg.norm(g)) <= zero_tol:
        return 0.0
    return float(g @ g) / (2.0 * float(g @ gram.entries @ g))


def kantorovich_factor(gram: GramMatrix) -> float:
    """Per-step contraction bound ((A/a - 1)/(A/a + 1))^2 from the extreme eigenvalues.

    A/a is the Gram's eigenvalue ratio; the returned factor lies in [0, 1) and
    bounds 1 - (g.g)^2 / ((g^T K g)(g^T K^-1 g)) over all nonzero g.
    """
    if gram.eig_min <= 0.0:
        raise ConditioningError("Kantorovich factor requires a positive definite Gram")
    ratio = gram.eig_max / gram.eig_min
    return ((ratio - 1.0) / (ratio + 1.0)) ** 2


def chase_step(
    weights: np.ndarray, gram: GramMatrix, samples: np.ndarray, iterations: int
) -> np.ndarray:
    """Apply `iterations` exact-line-search gradient steps at frozen centers.

    Each step maps a to a + lambda g with the exact quadratic step; the
    surrogate error never increases and contracts by at least the Kantorovich
    factor per step.  Breaks out early if the gradient vanishes.
    """
    a = np.array(weights, dtype=float)
    for _ in range(iterations):
        g = gradient(gram, samples, a)
        lam = optimal_step(gram, g)
        if lam == 0.0:
            break
        a = a + lam * g
    return a


def evaluate_approximant(
    kernel: ExponentialKernel, center_map: CenterMap, x: np.ndarray, weights: np.ndarray
) -> float:
    """The moving approximation at the state: sum_i a_i K(x, c_i(x))."""
    centers = center_map.eval(np.asarray(x, dtype=float))
    values = kernel.pairwise(np.asarray(x, dtype=float)[None, :], centers)[0]
    return float(values @ np.asarray(weights, dtype=float))


def run_chase(
    system: DynamicalSystem,
    target: TargetFunction,
    center_map: CenterMap,
    config: ChaseConfig,
) -> ChaseTrace:
    """Drive the state with RK4 and chase the moving ideal weights.

    Per step: freeze centers at the current state, build the Gram matrix,
    sample the target at the centers, run the inner gradient iterations, and
    record the step (ideal weights are recomputed by linear solve as a
    diagnostic; the update law itself only uses samples and the Gram).  The
    state then advances by one RK4 step.  A conditioning failure aborts with
    the step index; leaving the working box only logs a warning.
    """
    kernel = ExponentialKernel(system.dimension)
    x = np.array(config.x0, dtype=float)
    if x.shape != (system.dimension,):
        raise ValueError("x0 dimension does not match the system")

    m = center_map.count
    if config.initial_weights is None:
        a = np.zeros(m)
    else:
        a = np.array(config.initial_weights, dtype=float)
        if a.shape != (m,):
            raise ValueError(f"initial weights must have length {m}")

    n_steps = int(round(config.total_time / config.dt))
    trace = ChaseTrace()
    escaped = False

    for k in range(n_steps):
        t = k * config.dt
        centers = center_map.eval(x)
        gram = build_gram(kernel, centers)
        if not gram.well_conditioned(config.condition_cap):
            raise ConditioningError(
                f"step {k} (t={t:.6g}): Gram condition {gram.condition:.3e} "
                f"exceeds cap {config.condition_cap:.3e}"
            )
        samples = sample_target(target, centers)
        a = chase_step(a, gram, samples, config.inner_iterations)
        w = ideal_weights_solve(gram, samples, condition_cap=config.condition_cap)
        trace.states.append(
            ChaseState(
                t=t,
                x=x.copy(),
                weights=a.copy(),
                ideal_weights=w,
                error=rkhs_error_quadratic(gram, a, w),
                contraction_factor=kantorovich_factor(gram),
            )
        )
        if not escaped and np.any(np.abs(x) > config.domain_halfwidth):
            trace.warnings.append(
                f"step {k} (t={t:.6g}): state {x} left the working box "
                f"|x_i| <= {config.domain_halfwidth}"
            )
            escaped = True
        x = rk4_step(system, x, t, config.dt)

    return trace
