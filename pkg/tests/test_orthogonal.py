import numpy as np
import pytest

from muonbound import (
    DegenerateInputError,
    DimensionError,
    OrthoMethod,
    frobenius_inner,
    frobenius_norm,
    newton_schulz,
    nuclear_norm,
    orthogonality_defect,
    orthogonalize,
    polar_factor_exact,
)


def well_conditioned(rng, m, n, cond):
    """m x n matrix with singular values spanning [1/cond, 1]."""
    u, _ = np.linalg.qr(rng.standard_normal((m, n)))
    v, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.linspace(1.0, 1.0 / cond, n)
    return u @ np.diag(s) @ v.T


def test_polar_fixed_point_on_orthonormal_input():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.standard_normal((6, 3)))
    assert frobenius_norm(polar_factor_exact(q) - q) <= 1e-12


def test_polar_of_positive_diagonal_is_identity():
    assert np.allclose(polar_factor_exact(np.diag([5.0, 2.0])), np.eye(2), atol=1e-14)


def test_polar_postconditions():
    rng = np.random.default_rng(1)
    c = rng.standard_normal((6, 3))
    o = polar_factor_exact(c)
    assert orthogonality_defect(o) <= 1e-10
    nuc = nuclear_norm(c)
    assert abs(frobenius_inner(c, o) - nuc) <= 1e-8 * max(1.0, nuc)
    assert abs(frobenius_norm(o) - np.sqrt(3)) <= 1e-10


def test_polar_dominates_random_orthonormal_search():
    # brute maximization of c . o over random orthonormal candidates must
    # never beat the returned factor
    rng = np.random.default_rng(2)
    c = well_conditioned(rng, 6, 3, cond=20.0)
    best = frobenius_inner(c, polar_factor_exact(c))
    for _ in range(10_000):
        q, _ = np.linalg.qr(rng.standard_normal((6, 3)))
        assert frobenius_inner(c, q) <= best + 1e-6


def test_polar_maximality_over_near_orthonormal_candidates():
    # candidates within 1e-8 of orthonormality must not beat the exact
    # factor by more than the stated margin
    rng = np.random.default_rng(12)
    c = rng.standard_normal((6, 3))
    best = frobenius_inner(c, polar_factor_exact(c))
    for _ in range(2000):
        q, _ = np.linalg.qr(rng.standard_normal((6, 3)))
        q = q + 2e-10 * rng.standard_normal((6, 3))
        assert orthogonality_defect(q) <= 1e-8
        assert frobenius_inner(c, q) <= best + 1e-6


def test_polar_scale_equivariance():
    rng = np.random.default_rng(3)
    c = rng.standard_normal((7, 4))
    o = polar_factor_exact(c)
    for alpha in (1e-4, 0.3, 2.0, 1e5):
        assert frobenius_norm(polar_factor_exact(alpha * c) - o) <= 1e-9


def test_polar_rank_deficient_is_deterministic_and_orthonormal():
    rng = np.random.default_rng(4)
    c = np.outer(rng.standard_normal(5), rng.standard_normal(3))
    o1 = polar_factor_exact(c)
    o2 = polar_factor_exact(c.copy())
    np.testing.assert_array_equal(o1, o2)
    assert orthogonality_defect(o1) <= 1e-10


def test_polar_rejects_wide_input():
    with pytest.raises(DimensionError):
        polar_factor_exact(np.ones((2, 5)))
    with pytest.raises(DimensionError):
        newton_schulz(np.ones((2, 5)), 5)


def test_orthogonalize_handles_wide_input_by_transposition():
    rng = np.random.default_rng(5)
    c = rng.standard_normal((3, 7))
    o = orthogonalize(c, OrthoMethod("exact_polar"))
    assert o.shape == (3, 7)
    # the constraint runs over the smaller side: rows are orthonormal
    assert np.linalg.norm(o @ o.T - np.eye(3)) <= 1e-10
    np.testing.assert_allclose(o, polar_factor_exact(c.T).T, atol=1e-12)


def test_newton_schulz_fixed_point():
    rng = np.random.default_rng(6)
    q, _ = np.linalg.qr(rng.standard_normal((5, 3)))
    # orthonormal input is an exact fixed point of the raw iteration:
    # q q^T q = q, so (3q - q)/2 = q at every step
    for iters in (1, 7, 30):
        assert frobenius_norm(newton_schulz(q, iters, prescale=False) - q) <= 1e-12
    # the Frobenius prescale first shrinks the singular values to 1/sqrt(3),
    # so the scaled route only returns to q in the limit
    assert frobenius_norm(newton_schulz(q, 30) - q) <= 1e-9


def test_newton_schulz_scalar_arithmetic():
    c = np.array([[0.5]])
    # prescale maps 0.5 to 1.0, already the fixed point
    assert newton_schulz(c, 1)[0, 0] == pytest.approx(1.0, abs=1e-15)
    # raw iteration: (3 * 0.5 - 0.5^3) / 2
    assert newton_schulz(c, 1, prescale=False)[0, 0] == pytest.approx(0.6875, abs=0)


def test_newton_schulz_converges_to_exact_polar():
    rng = np.random.default_rng(7)
    for _ in range(5):
        c = well_conditioned(rng, 8, 4, cond=float(rng.uniform(2.0, 100.0)))
        gap = frobenius_norm(newton_schulz(c, 30) - polar_factor_exact(c))
        assert gap <= 1e-6


def test_newton_schulz_rejects_zero():
    with pytest.raises(DegenerateInputError):
        newton_schulz(np.zeros((4, 2)), 10)


def test_orthogonality_defect_examples():
    assert orthogonality_defect(np.eye(4)) == 0.0
    n = 3
    assert orthogonality_defect(2.0 * np.eye(n)) == pytest.approx(3.0 * np.sqrt(n), rel=1e-14)


def test_defect_of_exact_polar_output():
    rng = np.random.default_rng(8)
    for _ in range(5):
        o = polar_factor_exact(rng.standard_normal((9, 4)))
        assert orthogonality_defect(o) <= 1e-10


def test_ortho_method_validation():
    with pytest.raises(ValueError):
        OrthoMethod("qr")
    with pytest.raises(ValueError):
        OrthoMethod("newton_schulz", ns_iterations=0)
    assert OrthoMethod("newton_schulz", ns_iterations=5).ns_iterations == 5
