"""Exponential-kernel RKHS primitives: Gram matrices and ideal weights.

The approximation space is span{K(., c_i)} for the kernel K(x, y) = exp(x.y)
and centers c_1..c_M.  The best approximation of a target V in the Hilbert
norm has weights solving K(c) w = V(c), where K(c) is the Gram matrix and
V(c) the vector of target samples at the centers.  Two independent routes to
w are provided: an SPD linear solve (production path) and a Gram-Schmidt
projection assembled from determinants (oracle path); they agree to round-off
on well-conditioned centers and are cross-checked in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy import linalg

TargetFunction = Callable[[np.ndarray], float]

#: Pairwise center distance below which a Gram matrix is flagged as singular.
DUPLICATE_TOL = 1e-12
#: Condition-number cap beyond which linear solves refuse to proceed.
CONDITION_CAP = 1e12
#: Largest basis size for which the determinant-form Gram-Schmidt is used
#: literally; larger spans fall back to triangular orthonormalization.
GRAM_SCHMIDT_LITERAL_MAX = 8


class ConditioningError(RuntimeError):
    """Gram matrix too ill-conditioned (or singular) for a reliable solve."""


class DegeneracyError(ValueError):
    """A leading principal determinant in the Gram-Schmidt chain is not positive."""


class ExponentialKernel:
    """The kernel K(x, y) = exp(x.y) on R^n.

    Strictly positive definite: the Gram matrix of any set of pairwise
    distinct centers is symmetric positive definite.
    """

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError(f"kernel dimension must be >= 1, got {dimension}")
        self.dimension = int(dimension)

    def evaluate(self, x: Sequence[float], y: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != (self.dimension,) or y.shape != (self.dimension,):
            raise ValueError(
                f"expected two vectors of length {self.dimension}, "
                f"got shapes {x.shape} and {y.shape}"
            )
        return float(np.exp(x @ y))

    def pairwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Matrix of exp(a_i . b_j) for rows a_i of `a` and b_j of `b`."""
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_2d(np.asarray(b, dtype=float))
        if a.shape[1] != self.dimension or b.shape[1] != self.dimension:
            raise ValueError("center dimension does not match kernel dimension")
        return np.exp(a @ b.T)

    __call__ = evaluate


def exponential_kernel(x: Sequence[float], y: Sequence[float]) -> float:
    """Evaluate exp(x.y) for two vectors of equal length."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(np.exp(x @ y))


@dataclass(frozen=True)
class GramMatrix:
    """Kernel matrix K(c_i, c_j) with eigenvalue diagnostics.

    `eig_max` / `eig_min` are the extreme eigenvalues of the (symmetrized)
    matrix; `has_duplicates` flags center pairs closer than the duplicate
    tolerance, in which case downstream solves refuse to run.
    """

    entries: np.ndarray
    centers: np.ndarray | None
    eig_min: float
    eig_max: float
    has_duplicates: bool = False

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def condition(self) -> float:
        if self.eig_min <= 0.0:
            return math.inf
        return self.eig_max / self.eig_min

    def well_conditioned(self, cap: float = CONDITION_CAP) -> bool:
        return (not self.has_duplicates) and self.eig_min > 0.0 and self.condition <= cap

    @staticmethod
    def from_entries(entries: np.ndarray) -> "GramMatrix":
        """Wrap a raw symmetric matrix (no centers) for synthetic tests and drivers."""
        entries = np.asarray(entries, dtype=float)
        entries = 0.5 * (entries + entries.T)
        eigs = np.linalg.eigvalsh(entries)
        return GramMatrix(
            entries=entries,
            centers=None,
            eig_min=float(eigs[0]),
            eig_max=float(eigs[-1]),
        )


def build_gram(
    kernel: ExponentialKernel,
    centers: np.ndarray,
    duplicate_tol: float = DUPLICATE_TOL,
) -> GramMatrix:
    """Assemble the Gram matrix of `centers` under `kernel`.

    Centers closer than `duplicate_tol` (pairwise Euclidean distance) mark the
    result as singular; solves downstream raise ConditioningError on it.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.shape[0] < 1:
        raise ValueError("at least one center is required")
    entries = kernel.pairwise(centers, centers)
    entries = 0.5 * (entries + entries.T)

    has_duplicates = False
    m = centers.shape[0]
    if m > 1:
        diffs = centers[:, None, :] - centers[None, :, :]
        dists = np.sqrt(np.sum(diffs * diffs, axis=-1))
        dists[np.diag_indices(m)] = np.inf
        has_duplicates = bool(np.min(dists) < duplicate_tol)

    eigs = np.linalg.eigvalsh(entries)
    return GramMatrix(
        entries=entries,
        centers=centers,
        eig_min=float(eigs[0]),
        eig_max=float(eigs[-1]),
        has_duplicates=has_duplicates,
    )


def sample_target(target: TargetFunction, centers: np.ndarray) -> np.ndarray:
    """Vector of target samples (V(c_1), ..., V(c_M))."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    return np.array([float(target(c)) for c in centers])


def _as_samples(
    target: Union[TargetFunction, np.ndarray], centers: np.ndarray | None
) -> np.ndarray:
    if callable(target):
        if centers is None:
            raise ValueError("a callable target needs centers to sample at")
        return sample_target(target, centers)
    return np.asarray(target, dtype=float)


def ideal_weights_solve(
    gram: GramMatrix,
    target: Union[TargetFunction, np.ndarray],
    condition_cap: float = CONDITION_CAP,
) -> np.ndarray:
    """Weights of the Hilbert-norm best approximation: solve K(c) w = V(c).

    `target` is either a callable sampled at the Gram's centers or a
    precomputed sample vector.  Uses a Cholesky (SPD) factorization; raises
    ConditioningError when the Gram is flagged singular or its condition
    number exceeds `condition_cap`.
    """
    samples = _as_samples(target, gram.centers)
    if samples.shape != (gram.size,):
        raise ValueError(f"expected {gram.size} samples, got shape {samples.shape}")
    if gram.has_duplicates:
        raise ConditioningError("Gram matrix has (near-)duplicate centers")
    if gram.eig_min <= 0.0 or gram.condition > condition_cap:
        raise ConditioningError(
            f"Gram matrix condition {gram.condition:.3e} exceeds cap {condition_cap:.3e}"
        )
    factor = linalg.cho_factor(gram.entries, lower=True)
    return linalg.cho_solve(factor, samples)


def _orthonormal_coeffs_determinant(entries: np.ndarray, det_tol: float) -> np.ndarray:
    """Coefficient matrix U of the determinant-form Gram-Schmidt basis.

    Row m holds the expansion of the m-th orthonormal basis function in terms
    of the kernel sections at centers 1..m: u_m = sum_l U[m, l] K(., c_l).
    U[m, l] comes from the cofactor expansion (along its last row) of the
    bordered determinant whose first m-1 rows are kernel rows K(c_i, c_j) and
    whose last row is the free evaluation row, normalized by sqrt(D_{m-1} D_m)
    with D_m the leading principal minors of the Gram matrix.
    """
    m_total = entries.shape[0]
    dets = [1.0]
    for m in range(1, m_total + 1):
        d = float(np.linalg.det(entries[:m, :m]))
        if d <= det_tol:
            raise DegeneracyError(
                f"leading principal determinant D_{m} = {d:.3e} is not positive"
            )
        dets.append(d)

    coeffs = np.zeros((m_total, m_total))
    for m in range(1, m_total + 1):
        norm = math.sqrt(dets[m - 1] * dets[m])
        top = entries[: m - 1, :m]
        for l in range(1, m + 1):
            minor = np.delete(top, l - 1, axis=1)
            sign = -1.0 if (m + l) % 2 else 1.0
            coeffs[m - 1, l - 1] = sign * float(np.linalg.det(minor)) / norm
    return coeffs


def _orthonormal_coeffs_triangular(entries: np.ndarray) -> np.ndarray:
    """Orthonormalization coefficients via the inverse Cholesky factor."""
    lower = np.linalg.cholesky(entries)
    return linalg.solve_triangular(lower, np.eye(entries.shape[0]), lower=True)


def ideal_weights_gram_schmidt(
    kernel: ExponentialKernel,
    centers: np.ndarray,
    target: Union[TargetFunction, np.ndarray],
    det_tol: float = 1e-300,
    literal_max: int = GRAM_SCHMIDT_LITERAL_MAX,
) -> np.ndarray:
    """Projection coefficients of the target onto span{K(., c_i)}.

    Builds the orthonormal basis of the span by the determinant form of
    Gram-Schmidt (literal determinant expansion up to `literal_max` centers,
    triangular orthonormalization beyond) and projects using only the target
    samples at the centers.  Independent of ideal_weights_solve; agrees with
    it to round-off on well-conditioned centers.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    entries = kernel.pairwise(centers, centers)
    entries = 0.5 * (entries + entries.T)
    samples = _as_samples(target, centers)
    if samples.shape != (centers.shape[0],):
        raise ValueError("sample count does not match center count")

    if centers.shape[0] <= literal_max:
        coeffs = _orthonormal_coeffs_determinant(entries, det_tol)
    else:
        coeffs = _orthonormal_coeffs_triangular(entries)
    # Projection = sum_m <V, u_m> u_m; in weight space this is U^T (U V(c)).
    return coeffs.T @ (coeffs @ samples)


def rkhs_error_quadratic(gram: GramMatrix, a: np.ndarray, w: np.ndarray) -> float:
    """Squared Hilbert-norm gap between two weightings of the same span.

    Returns (a - w)^T K(c) (a - w), which equals the difference of the
    projection objective at a and at the ideal weights w.  The unknowable
    squared norm of the target cancels in the difference, so this is the
    computable surrogate tracked by the weight-update laws.  Clamped at zero
    against round-off.
    """
    a = np.asarray(a, dtype=float)
    w = np.asarray(w, dtype=float)
    if a.shape != (gram.size,) or w.shape != (gram.size,):
        raise ValueError("weight dimensions do not match the Gram matrix")
    d = a - w
    return max(float(d @ gram.entries @ d), 0.0)
