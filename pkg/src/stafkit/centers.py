"""Moving-center maps: centers c_i(x) = x + d_i(x) that travel with the state.

The offsets d_i keep every center inside a ball of known radius around the
current state, so the kernel basis follows the state through its domain.
Two maps ship with the experiments (a rigid equilateral triangle and a
state-scaled triad whose radius shrinks near the origin) plus a configurable
regular-polygon family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

OffsetFn = Callable[[np.ndarray], np.ndarray]
JacobianFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CenterMap:
    """Ordered collection of offset maps d_i defining centers x + d_i(x).

    `radius_bound` is the supremum of the offset norms over the working
    domain.  `offset_jacobians` (optional) supply d d_i / dx for gradient
    computations that account for center motion; maps without analytic
    Jacobians fall back to central finite differences.
    """

    dimension: int
    offsets: tuple[OffsetFn, ...]
    radius_bound: float
    offset_jacobians: tuple[JacobianFn, ...] | None = None

    @property
    def count(self) -> int:
        return len(self.offsets)

    def offsets_at(self, x: np.ndarray) -> np.ndarray:
        """Offset vectors d_i(x), stacked as an (M, n) array in index order."""
        x = self._check_state(x)
        return np.stack([np.asarray(d(x), dtype=float) for d in self.offsets])

    def eval(self, x: np.ndarray) -> np.ndarray:
        """Centers x + d_i(x), stacked as an (M, n) array in index order."""
        x = self._check_state(x)
        return x[None, :] + self.offsets_at(x)

    def offset_jacobians_at(self, x: np.ndarray, fd_step: float = 1e-6) -> np.ndarray:
        """Jacobians d d_i / dx as an (M, n, n) array.

        Uses the analytic Jacobians when provided, otherwise central finite
        differences with step `fd_step` on each offset map.
        """
        x = self._check_state(x)
        if self.offset_jacobians is not None:
            return np.stack([np.asarray(j(x), dtype=float) for j in self.offset_jacobians])
        n = self.dimension
        jacs = np.zeros((self.count, n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = fd_step
            plus = self.offsets_at(x + e)
            minus = self.offsets_at(x - e)
            jacs[:, :, k] = (plus - minus) / (2.0 * fd_step)
        return jacs

    def _check_state(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(f"state must have shape ({self.dimension},), got {x.shape}")
        return x


def eval_centers(center_map: CenterMap, x: np.ndarray) -> np.ndarray:
    """Centers [x + d_1(x), ..., x + d_M(x)] in fixed index order."""
    return center_map.eval(x)


def polygon_centers(count: int, radius: float, phase: float = 0.0) -> CenterMap:
    """Rigid regular polygon of centers around the state (n = 2).

    Offsets d_i = radius * (sin(phase + (i-1) 2 pi / count),
    cos(phase + (i-1) 2 pi / count)), constant in x.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if radius <= 0.0:
        raise ValueError("radius must be positive")

    vectors = []
    for i in range(count):
        angle = phase + 2.0 * math.pi * i / count
        vectors.append(radius * np.array([math.sin(angle), math.cos(angle)]))

    offsets = tuple((lambda x, v=v: v) for v in vectors)
    zero = np.zeros((2, 2))
    jacobians = tuple((lambda x, z=zero: z) for _ in vectors)
    return CenterMap(
        dimension=2,
        offsets=offsets,
        radius_bound=radius,
        offset_jacobians=jacobians,
    )


def triangle_centers(radius: float) -> CenterMap:
    """Equilateral triangle at fixed distance `radius` from the state (n = 2)."""
    return polygon_centers(3, radius, phase=0.0)


# Scale profile of the state-shrinking triad: rho(s) = 0.7 (s + 0.01)/(1 + s)
# with s = x.x, so the offset radius is 0.007 at the origin and approaches
# 0.7 for large states.
_ADP_SCALE = 0.7
_ADP_FLOOR = 0.01


def _adp_magnitude(s: float) -> float:
    return _ADP_SCALE * (s + _ADP_FLOOR) / (1.0 + s)


def _adp_magnitude_ds(s: float) -> float:
    return _ADP_SCALE * (1.0 - _ADP_FLOOR) / (1.0 + s) ** 2


def adp_centers() -> CenterMap:
    """State-scaled triad used by the regulator experiment (n = 2).

    d_i(x) = 0.7 (x.x + 0.01)/(1 + x.x) * (cos(2 pi i / 3 + pi / 2),
    sin(2 pi i / 3 + pi / 2)) for i = 1, 2, 3.  The offsets shrink toward
    norm 0.007 at the origin and saturate below 0.7 far from it.
    """
    directions = []
    for i in (1, 2, 3):
        angle = 2.0 * math.pi * i / 3.0 + math.pi / 2.0
        directions.append(np.array([math.cos(angle), math.sin(angle)]))

    def make_offset(v: np.ndarray) -> OffsetFn:
        def offset(x: np.ndarray) -> np.ndarray:
            return _adp_magnitude(float(x @ x)) * v

        return offset

    def make_jacobian(v: np.ndarray) -> JacobianFn:
        def jacobian(x: np.ndarray) -> np.ndarray:
            s = float(x @ x)
            return 2.0 * _adp_magnitude_ds(s) * np.outer(v, x)

        return jacobian

    return CenterMap(
        dimension=2,
        offsets=tuple(make_offset(v) for v in directions),
        radius_bound=_ADP_SCALE,
        offset_jacobians=tuple(make_jacobian(v) for v in directions),
    )
