"""Kernel evaluation, Gram assembly, and the two ideal-weight routes."""

import math

import numpy as np
import pytest

from stafkit import (
    ConditioningError,
    DegeneracyError,
    ExponentialKernel,
    GramMatrix,
    build_gram,
    exponential_kernel,
    ideal_weights_gram_schmidt,
    ideal_weights_solve,
    rkhs_error_quadratic,
    sample_target,
    triangle_centers,
)


def section7_target(p):
    return p[0] ** 2 + 5.0 * p[1] ** 2 + math.tanh(p[0] * p[1])


def test_kernel_values():
    assert exponential_kernel([0.0, 0.0], [0.0, 0.0]) == 1.0
    assert exponential_kernel([1.0, 0.0], [0.0, 1.0]) == 1.0
    assert exponential_kernel([1.0, 2.0], [3.0, 4.0]) == pytest.approx(
        math.exp(11.0), rel=1e-15
    )


def test_kernel_dimension_mismatch():
    with pytest.raises(ValueError):
        exponential_kernel([1.0, 2.0], [1.0])
    k = ExponentialKernel(2)
    with pytest.raises(ValueError):
        k.evaluate([1.0], [1.0])


def test_kernel_symmetry_random():
    rng = np.random.default_rng(1)
    for n in (1, 2, 3):
        k = ExponentialKernel(n)
        for _ in range(50):
            x, y = rng.normal(size=n), rng.normal(size=n)
            assert k.evaluate(x, y) == k.evaluate(y, x)


def test_build_gram_single_center():
    k = ExponentialKernel(2)
    c = np.array([[0.3, -0.4]])
    gram = build_gram(k, c)
    assert gram.entries.shape == (1, 1)
    assert gram.entries[0, 0] == pytest.approx(math.exp(0.25), rel=1e-15)


def test_build_gram_two_centers():
    k = ExponentialKernel(2)
    gram = build_gram(k, [[0.0, 0.0], [1.0, 0.0]])
    expected = np.array([[1.0, 1.0], [1.0, math.e]])
    assert np.allclose(gram.entries, expected, rtol=1e-15)


def test_gram_symmetric_and_positive_definite_random():
    # eigen-decomposition oracle over 100 random draws of 3 distinct centers
    rng = np.random.default_rng(2)
    k = ExponentialKernel(2)
    for _ in range(100):
        centers = rng.uniform(-1.0, 1.0, size=(3, 2))
        gram = build_gram(k, centers)
        assert np.array_equal(gram.entries, gram.entries.T)
        manual = np.array(
            [[k.evaluate(ci, cj) for cj in centers] for ci in centers]
        )
        eigs = np.linalg.eigvalsh(0.5 * (manual + manual.T))
        assert eigs[0] > 0.0
        assert gram.eig_min == pytest.approx(eigs[0], rel=1e-10)
        assert gram.eig_max == pytest.approx(eigs[-1], rel=1e-10)


def test_gram_pd_property_small_sizes():
    rng = np.random.default_rng(3)
    for n in (1, 2, 3):
        k = ExponentialKernel(n)
        for m in range(1, 7):
            centers = rng.uniform(-1.0, 1.0, size=(m, n))
            gram = build_gram(k, centers)
            assert gram.eig_min > 0.0 or gram.condition > 1e10


def test_duplicate_centers_flagged_and_refused():
    k = ExponentialKernel(2)
    gram = build_gram(k, [[0.1, 0.2], [0.1, 0.2]])
    assert gram.has_duplicates
    with pytest.raises(ConditioningError):
        ideal_weights_solve(gram, np.array([1.0, 1.0]))


def test_ideal_weights_single_center_span():
    k = ExponentialKernel(2)
    c1 = np.array([0.5, -0.2])
    gram = build_gram(k, [c1])
    target = lambda p: 2.0 * k.evaluate(p, c1)
    w = ideal_weights_solve(gram, target)
    assert w == pytest.approx([2.0], rel=1e-12)


def test_ideal_weights_recover_span_coefficients():
    rng = np.random.default_rng(4)
    k = ExponentialKernel(2)
    centers = np.array([[0.0, 0.0], [0.6, 0.1], [-0.3, 0.5], [0.2, -0.6]])
    b = rng.normal(size=4)
    target = lambda p: sum(b[i] * k.evaluate(p, centers[i]) for i in range(4))
    gram = build_gram(k, centers)
    w = ideal_weights_solve(gram, target)
    assert np.linalg.norm(w - b) / np.linalg.norm(b) < 1e-8


def test_ideal_weights_residual_bound():
    k = ExponentialKernel(2)
    centers = triangle_centers(0.1).eval(np.array([1.0, 0.0]))
    gram = build_gram(k, centers)
    samples = sample_target(section7_target, centers)
    w = ideal_weights_solve(gram, samples)
    residual = np.linalg.norm(gram.entries @ w - samples)
    assert residual <= 1e-10 * np.linalg.norm(samples)


def test_conditioning_cap_triggers():
    k = ExponentialKernel(2)
    # nearly coincident centers: condition number far above the cap
    gram = build_gram(k, [[0.0, 0.0], [1e-8, 0.0]])
    assert not gram.has_duplicates
    with pytest.raises(ConditioningError):
        ideal_weights_solve(gram, np.array([1.0, 1.0]))


def test_gram_schmidt_single_center():
    k = ExponentialKernel(2)
    c1 = np.array([0.4, 0.3])
    target = lambda p: section7_target(p)
    w = ideal_weights_gram_schmidt(k, [c1], target)
    assert w[0] == pytest.approx(target(c1) / k.evaluate(c1, c1), rel=1e-12)


def test_gram_schmidt_exact_membership():
    k = ExponentialKernel(2)
    centers = np.array([[0.0, 0.1], [0.3, -0.2]])
    target = lambda p: k.evaluate(p, centers[1])
    w = ideal_weights_gram_schmidt(k, centers, target)
    assert np.allclose(w, [0.0, 1.0], atol=1e-10)


def test_gram_schmidt_matches_solve_triangle_instance():
    k = ExponentialKernel(2)
    centers = triangle_centers(0.1).eval(np.array([1.0, 0.0]))
    gram = build_gram(k, centers)
    w_solve = ideal_weights_solve(gram, section7_target)
    w_gs = ideal_weights_gram_schmidt(k, centers, section7_target)
    assert np.linalg.norm(w_solve - w_gs) / np.linalg.norm(w_solve) < 1e-8


def test_gram_schmidt_matches_solve_random():
    rng = np.random.default_rng(5)
    for _ in range(25):
        n = int(rng.integers(1, 4))
        k = ExponentialKernel(n)
        centers = rng.uniform(-0.8, 0.8, size=(3, n))
        gram = build_gram(k, centers)
        if not gram.well_conditioned(1e6):
            continue
        samples = rng.normal(size=3)
        w_solve = ideal_weights_solve(gram, samples)
        w_gs = ideal_weights_gram_schmidt(k, centers, samples)
        assert np.linalg.norm(w_solve - w_gs) <= 1e-8 * max(np.linalg.norm(w_solve), 1.0)


def test_gram_schmidt_triangular_fallback_above_literal_max():
    rng = np.random.default_rng(6)
    k = ExponentialKernel(3)
    centers = rng.uniform(-0.8, 0.8, size=(10, 3))
    gram = build_gram(k, centers)
    assert gram.well_conditioned(1e8)
    samples = rng.normal(size=10)
    w_solve = ideal_weights_solve(gram, samples)
    w_gs = ideal_weights_gram_schmidt(k, centers, samples)
    assert np.linalg.norm(w_solve - w_gs) / np.linalg.norm(w_solve) < 1e-8


def test_gram_schmidt_degenerate_centers():
    k = ExponentialKernel(2)
    with pytest.raises(DegeneracyError):
        ideal_weights_gram_schmidt(
            k, [[0.1, 0.2], [0.1, 0.2]], np.array([1.0, 1.0]), det_tol=1e-30
        )


def test_error_quadratic_zero_at_ideal():
    k = ExponentialKernel(2)
    gram = build_gram(k, [[0.0, 0.0], [0.5, 0.5]])
    w = np.array([1.0, -2.0])
    assert rkhs_error_quadratic(gram, w, w) == 0.0


def test_error_quadratic_identity_gram():
    gram = GramMatrix.from_entries(np.eye(3))
    a = np.array([1.0, 0.0, 0.0])
    w = np.zeros(3)
    assert rkhs_error_quadratic(gram, a, w) == 1.0


def test_error_quadratic_matches_hilbert_norm_expansion():
    # oracle: expand ||sum (a_i - b_i) K(., c_i)||^2 term by term with kernel
    # evaluations and compare against the quadratic form
    rng = np.random.default_rng(7)
    k = ExponentialKernel(2)
    centers = rng.uniform(-0.7, 0.7, size=(4, 2))
    b = rng.normal(size=4)
    a = rng.normal(size=4)
    expanded = 0.0
    for i in range(4):
        for j in range(4):
            expanded += (a[i] - b[i]) * (a[j] - b[j]) * k.evaluate(centers[i], centers[j])
    gram = build_gram(k, centers)
    assert rkhs_error_quadratic(gram, a, b) == pytest.approx(expanded, rel=1e-10)


def test_error_quadratic_nonnegative_random():
    rng = np.random.default_rng(8)
    k = ExponentialKernel(2)
    for _ in range(50):
        centers = rng.uniform(-0.8, 0.8, size=(3, 2))
        gram = build_gram(k, centers)
        a, w = rng.normal(size=3), rng.normal(size=3)
        val = rkhs_error_quadratic(gram, a, w)
        assert val >= 0.0
        if np.linalg.norm(a - w) > 1e-8 and gram.eig_min > 1e-10:
            assert val > 0.0


def test_ideal_weight_map_finite_difference_lipschitz():
    # perturb the centers at three scales; the finite-difference Lipschitz
    # estimate of C -> W(C) must be stable across scales (smooth weight map)
    rng = np.random.default_rng(9)
    k = ExponentialKernel(2)
    base = triangle_centers(0.2).eval(np.array([0.4, -0.3]))
    gram = build_gram(k, base)
    w0 = ideal_weights_solve(gram, section7_target)
    direction = rng.normal(size=base.shape)
    direction /= np.linalg.norm(direction)
    estimates = []
    for h in (1e-3, 1e-4, 1e-5):
        perturbed = base + h * direction
        w1 = ideal_weights_solve(build_gram(k, perturbed), section7_target)
        estimates.append(np.linalg.norm(w1 - w0) / h)
    assert max(estimates) / min(estimates) < 1.1
