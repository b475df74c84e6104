import math

import numpy as np
import pytest
from scipy import stats

from muonbound import (
    DimensionError,
    constants,
    full_gradient,
    loss,
    make_problem,
    minibatch_gradient,
    sample_batch,
    single_sample_variance,
)
from muonbound.problems import ProblemInstance

from oracles import central_diff_gradient, naive_full_gradient, naive_loss


@pytest.fixture(scope="module")
def quad():
    return make_problem("quadratic", 16, 5, 3, seed=11)


@pytest.fixture(scope="module")
def lsq():
    return make_problem("least_squares", 12, 5, 3, seed=12, k_rows=7)


@pytest.fixture(scope="module")
def bumps():
    return make_problem("nonconvex", 10, 4, 3, seed=13)


def test_quadratic_loss_at_mean_target_is_infimum(quad):
    pc = constants(quad)
    tbar = quad.targets.mean(axis=0)
    assert loss(quad, tbar) == pytest.approx(pc.f_star, rel=1e-12)
    assert np.allclose(full_gradient(quad, tbar), 0.0, atol=1e-12)


def test_nonconvex_single_component_zero_at_target():
    p = make_problem("nonconvex", 1, 4, 3, seed=5)
    t0 = p.targets[0]
    assert loss(p, t0) == 0.0
    assert np.allclose(full_gradient(p, t0), 0.0, atol=1e-15)


@pytest.mark.parametrize("fixture", ["quad", "lsq", "bumps"])
def test_loss_matches_naive_summation(fixture, request):
    p = request.getfixturevalue(fixture)
    rng = np.random.default_rng(21)
    for _ in range(5):
        w = rng.standard_normal((p.m, p.n))
        assert loss(p, w) == pytest.approx(naive_loss(p, w), rel=1e-12)


@pytest.mark.parametrize("fixture", ["quad", "lsq", "bumps"])
def test_full_gradient_matches_naive_and_finite_differences(fixture, request):
    p = request.getfixturevalue(fixture)
    rng = np.random.default_rng(22)
    w = rng.standard_normal((p.m, p.n))
    g = full_gradient(p, w)
    np.testing.assert_allclose(g, naive_full_gradient(p, w), rtol=1e-12, atol=1e-14)
    fd = central_diff_gradient(lambda x: loss(p, x), w, h=1e-5)
    scale = np.linalg.norm(g) + 1.0
    assert np.linalg.norm(g - fd) <= 1e-5 * scale


def test_minibatch_full_enumeration_equals_full_gradient(quad):
    rng = np.random.default_rng(23)
    w = rng.standard_normal((quad.m, quad.n))
    batch = np.arange(1, quad.n_components + 1)
    np.testing.assert_allclose(
        minibatch_gradient(quad, w, batch), full_gradient(quad, w), atol=1e-12
    )


def test_minibatch_singleton(quad):
    rng = np.random.default_rng(24)
    w = rng.standard_normal((quad.m, quad.n))
    for i in (1, 7, quad.n_components):
        np.testing.assert_allclose(
            minibatch_gradient(quad, w, [i]), w - quad.targets[i - 1], atol=1e-14
        )


def test_minibatch_validation(quad):
    w = np.zeros((quad.m, quad.n))
    with pytest.raises(ValueError):
        minibatch_gradient(quad, w, [])
    with pytest.raises(ValueError):
        minibatch_gradient(quad, w, [0])
    with pytest.raises(ValueError):
        minibatch_gradient(quad, w, [quad.n_components + 1])
    with pytest.raises(DimensionError):
        loss(quad, np.zeros((quad.m + 1, quad.n)))


def test_quadratic_constants(quad):
    pc = constants(quad)
    assert pc.L == 1.0
    tbar = quad.targets.mean(axis=0)
    direct = np.mean([np.sum((t - tbar) ** 2) for t in quad.targets])
    assert pc.sigma2 == pytest.approx(direct, rel=1e-12)
    assert pc.f_star == pytest.approx(naive_loss(quad, tbar), rel=1e-12)


def test_quadratic_equal_targets_zero_variance():
    base = np.ones((3, 2))
    p = ProblemInstance(
        kind="quadratic", n_components=4, m=3, n=2, rng_seed=0,
        targets=np.stack([base] * 4),
    )
    assert constants(p).sigma2 == 0.0


def test_nonconvex_smoothness_constant_via_grid_oracle(bumps):
    # max |s''| over a dense grid, s(x) = x^2/(1+x^2)
    x = np.linspace(-6.0, 6.0, 200_001)
    s2 = (2.0 - 6.0 * x * x) / (1.0 + x * x) ** 3
    assert np.max(np.abs(s2)) == pytest.approx(2.0, abs=1e-6)
    assert constants(bumps).L == 2.0


def test_nonconvex_infimum_matches_bruteforce_scan(bumps):
    pc = constants(bumps)
    # coordinatewise dense scan is an independent (coarser) route to f*
    total = 0.0
    for j in range(bumps.m):
        for k in range(bumps.n):
            vals = bumps.targets[:, j, k]
            grid = np.linspace(vals.min(), vals.max(), 20_001)
            d = grid[:, None] - vals[None, :]
            g = np.mean(d * d / (1.0 + d * d), axis=1)
            total += float(g.min())
    assert pc.f_star == pytest.approx(total, rel=1e-6)
    # certified value is never above any probed point
    rng = np.random.default_rng(31)
    for _ in range(50):
        w = pc.minimizer + rng.standard_normal(pc.minimizer.shape)
        assert loss(bumps, w) >= pc.f_star - 1e-12


def test_least_squares_constants(lsq):
    pc = constants(lsq)
    # smoothness of each piece is the top eigenvalue of x_i^T x_i
    l_direct = np.mean(
        [np.linalg.eigvalsh(x.T @ x)[-1] for x in lsq.xs]
    )
    assert pc.L == pytest.approx(l_direct, rel=1e-12)
    # pooled normal equations give the infimum: perturbations cannot do better
    rng = np.random.default_rng(32)
    for _ in range(20):
        w = pc.minimizer + 0.1 * rng.standard_normal(pc.minimizer.shape)
        assert loss(lsq, w) >= pc.f_star - 1e-12


@pytest.mark.parametrize("fixture", ["quad", "lsq", "bumps"])
def test_smoothness_and_descent_inequalities(fixture, request):
    p = request.getfixturevalue(fixture)
    pc = constants(p)
    rng = np.random.default_rng(33)
    for _ in range(50):
        w1 = 2.0 * rng.standard_normal((p.m, p.n))
        w2 = 2.0 * rng.standard_normal((p.m, p.n))
        lips = np.linalg.norm(full_gradient(p, w1) - full_gradient(p, w2))
        assert lips <= pc.L * np.linalg.norm(w1 - w2) * (1 + 1e-9) + 1e-12
        model = (
            loss(p, w2)
            + float(np.sum(full_gradient(p, w2) * (w1 - w2)))
            + 0.5 * pc.L * np.linalg.norm(w1 - w2) ** 2
        )
        assert loss(p, w1) <= model + 1e-9 * (1.0 + abs(model))


@pytest.mark.parametrize("fixture", ["quad", "lsq", "bumps"])
def test_variance_bound_certificate(fixture, request):
    p = request.getfixturevalue(fixture)
    pc = constants(p)
    rng = np.random.default_rng(34)
    center = pc.minimizer
    for _ in range(10):
        w = center + rng.standard_normal(center.shape)
        assert single_sample_variance(p, w) <= pc.sigma2 + 1e-9


def test_sample_batch_single_component():
    p = make_problem("quadratic", 1, 2, 2, seed=1)
    rng = np.random.default_rng(0)
    batch = sample_batch(p, rng, 20)
    assert np.all(batch == 1)


def test_sample_batch_deterministic(quad):
    b1 = sample_batch(quad, np.random.default_rng(99), 50)
    b2 = sample_batch(quad, np.random.default_rng(99), 50)
    np.testing.assert_array_equal(b1, b2)
    with pytest.raises(ValueError):
        sample_batch(quad, np.random.default_rng(0), 0)


def test_sample_batch_uniformity_chi2():
    p = make_problem("quadratic", 16, 2, 2, seed=2)
    rng = np.random.default_rng(12345)
    draws = sample_batch(p, rng, 10**6)
    observed = np.bincount(draws, minlength=17)[1:]
    result = stats.chisquare(observed)
    assert result.pvalue > 0.001


def test_minibatch_unbiasedness_monte_carlo(quad):
    pc = constants(quad)
    rng = np.random.default_rng(77)
    w = rng.standard_normal((quad.m, quad.n))
    draws = 100_000
    batch = sample_batch(quad, rng, draws)  # iid draws; mean of singleton gradients
    mean_grad = minibatch_gradient(quad, w, batch)
    gap = np.linalg.norm(mean_grad - full_gradient(quad, w))
    assert gap <= 3.0 * math.sqrt(pc.sigma2 / draws)


def test_minibatch_variance_contract(quad):
    pc = constants(quad)
    rng = np.random.default_rng(78)
    w = rng.standard_normal((quad.m, quad.n))
    grad = full_gradient(quad, w)
    for b in (1, 8):
        sq = 0.0
        trials = 4000
        for _ in range(trials):
            g = minibatch_gradient(quad, w, sample_batch(quad, rng, b))
            sq += float(np.sum((g - grad) ** 2))
        assert sq / trials <= (pc.sigma2 / b) * 1.05


def test_make_problem_validation():
    with pytest.raises(ValueError):
        make_problem("cubic", 4, 3, 2, seed=0)
    with pytest.raises(DimensionError):
        make_problem("quadratic", 4, 2, 3, seed=0)  # m < n
    with pytest.raises(ValueError):
        make_problem("quadratic", 0, 3, 2, seed=0)
