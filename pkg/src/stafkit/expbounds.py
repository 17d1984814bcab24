"""Monomials as exponential-kernel sums with constrained centers.

The scaled product m^|alpha| prod_i (exp(y_i / m) - 1)^alpha_i equals the
monomial y^alpha up to an O(1/m) error; expanding the product by the binomial
theorem yields an explicit linear combination of exponential kernel sections
whose centers (l_1/m, ..., l_n/m) shrink into any ball around the origin as m
grows.  Multiplying through by exp(y.x) shifts every center to x + l/m, which
gives local approximants anchored at an arbitrary point, and summing over the
monomials of a polynomial gives kernel approximants of exp(y.x) * poly(y).
The number of kernel terms needed is bounded by a single binomial
coefficient; see `center_count_bound`.

Weights grow like m^|alpha| with alternating signs, so evaluation uses
compensated summation; the overflow guard rejects scale/order combinations
whose weights leave double range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

#: Decimal-exponent budget for the weight magnitudes m^|alpha| * binomials.
_SAFE_EXPONENT_BUDGET = 300.0


@dataclass(frozen=True)
class MultiIndex:
    """Tuple of nonnegative integer exponents indexing a monomial y^alpha."""

    components: tuple[int, ...]

    def __post_init__(self):
        if len(self.components) < 1:
            raise ValueError("a multi-index needs at least one component")
        if any(c < 0 or c != int(c) for c in self.components):
            raise ValueError(f"components must be nonnegative integers: {self.components}")
        object.__setattr__(self, "components", tuple(int(c) for c in self.components))

    @property
    def order(self) -> int:
        return sum(self.components)

    @property
    def dimension(self) -> int:
        return len(self.components)


def _as_multi_index(alpha) -> MultiIndex:
    if isinstance(alpha, MultiIndex):
        return alpha
    return MultiIndex(tuple(alpha))


@dataclass(frozen=True)
class MonomialApproximant:
    """Exponential-sum approximant sum_j weights[j] exp(y . centers[j]).

    Produced by the binomial expansion at scale m: term count is
    prod_i (alpha_i + 1), every center has components x_i + l_i / m with
    0 <= l_i <= alpha_i.
    """

    weights: np.ndarray
    centers: np.ndarray
    scale: int

    @property
    def term_count(self) -> int:
        return self.weights.shape[0]

    def evaluate(self, y) -> float:
        """Compensated-sum evaluation at a single point."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        exponents = self.centers @ y
        return math.fsum(w * math.exp(e) for w, e in zip(self.weights, exponents))

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Compensated-sum evaluation at each row of `points`."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        exponents = points @ self.centers.T
        terms = self.weights[None, :] * np.exp(exponents)
        return np.array([math.fsum(row) for row in terms])

    def max_center_distance(self, anchor=None) -> float:
        """Largest Euclidean distance of a center from `anchor` (default origin)."""
        if anchor is None:
            anchor = np.zeros(self.centers.shape[1])
        anchor = np.asarray(anchor, dtype=float)
        return float(np.max(np.linalg.norm(self.centers - anchor[None, :], axis=1)))


def _check_scale(alpha: MultiIndex, m: int) -> None:
    if m < 1:
        raise ValueError("scale m must be >= 1")
    log_binom = sum(math.log10(math.comb(a, a // 2)) for a in alpha.components)
    if alpha.order * math.log10(max(m, 2)) + log_binom > _SAFE_EXPONENT_BUDGET:
        raise OverflowError(
            f"weights of order m^{alpha.order} with m={m} exceed the safe "
            f"floating-point exponent budget"
        )


def monomial_approximant(alpha, m: int) -> MonomialApproximant:
    """Binomial-expansion approximant of the monomial y^alpha at scale m.

    Term l (componentwise 0 <= l_i <= alpha_i) carries weight
    m^|alpha| * prod_i C(alpha_i, l_i) * (-1)^(|alpha| - sum_i l_i) at center
    l / m; the sum approximates y^alpha with sup error O(1/m) on any fixed
    ball around the origin.
    """
    alpha = _as_multi_index(alpha)
    _check_scale(alpha, m)

    lead = float(m) ** alpha.order
    weights = []
    centers = []
    for l in product(*(range(a + 1) for a in alpha.components)):
        binom = 1
        for a_i, l_i in zip(alpha.components, l):
            binom *= math.comb(a_i, l_i)
        sign = -1.0 if (alpha.order - sum(l)) % 2 else 1.0
        weights.append(lead * binom * sign)
        centers.append(np.array(l, dtype=float) / m)
    return MonomialApproximant(
        weights=np.array(weights), centers=np.stack(centers), scale=m
    )


def shifted_approximant(alpha, m: int, x) -> MonomialApproximant:
    """Approximant of exp(y.x) * y^alpha: same weights, centers moved to x + l/m."""
    alpha = _as_multi_index(alpha)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (alpha.dimension,):
        raise ValueError(
            f"anchor must have dimension {alpha.dimension}, got shape {x.shape}"
        )
    base = monomial_approximant(alpha, m)
    return MonomialApproximant(
        weights=base.weights, centers=base.centers + x[None, :], scale=m
    )


def center_count_bound(n: int, big_n: int, s: int) -> int:
    """Kernel-term bound C(n + N + S, N + S) as an exact integer.

    n is the ambient dimension, N and S the degrees of the two approximating
    polynomials (target and reciprocal-exponential).  Symmetric in N and S
    and monotone in each argument; for n = 1, S = 0 it reduces to N + 1.
    """
    if n < 1:
        raise ValueError("dimension n must be >= 1")
    if big_n < 0 or s < 0:
        raise ValueError("polynomial degrees must be nonnegative")
    return math.comb(n + big_n + s, big_n + s)


def polynomial_to_exponential(
    poly_coeffs: dict[tuple[int, ...], float], m: int, x
) -> MonomialApproximant:
    """Merged approximant of exp(y.x) * sum_alpha c_alpha y^alpha.

    Per-monomial approximants share centers x + l/m; contributions are merged
    by the integer offset l (compensated sums), so the term count stays below
    C(n + beta, beta) for a degree-beta polynomial.
    """
    if not poly_coeffs:
        raise ValueError("polynomial must have at least one coefficient")
    dims = {len(alpha) for alpha in poly_coeffs}
    if len(dims) != 1:
        raise ValueError("all multi-indices must have the same dimension")
    n = dims.pop()
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (n,):
        raise ValueError(f"anchor must have dimension {n}, got shape {x.shape}")

    contributions: dict[tuple[int, ...], list[float]] = {}
    for alpha, coeff in poly_coeffs.items():
        alpha = _as_multi_index(alpha)
        _check_scale(alpha, m)
        base = monomial_approximant(alpha, m)
        for w, l in zip(
            base.weights, product(*(range(a + 1) for a in alpha.components))
        ):
            contributions.setdefault(l, []).append(float(coeff) * w)

    offsets = sorted(contributions)
    weights = np.array([math.fsum(contributions[l]) for l in offsets])
    centers = np.stack([x + np.array(l, dtype=float) / m for l in offsets])
    return MonomialApproximant(weights=weights, centers=centers, scale=m)
