"""Finite-sum synthetic objectives with certified constants.

Each instance is f(w) = (1/N) sum_i f_i(w) over m x n matrices (m >= n),
chosen so that the constants a convergence bound needs -- the mean
smoothness L, a single-sample gradient variance bound sigma^2, and the
infimum f* -- are either closed form or computable by a bracketed 1-D
search:

* ``quadratic``      f_i(w) = 0.5 ||w - t_i||_F^2
* ``least_squares``  f_i(w) = 0.5 ||x_i w - y_i||_F^2
* ``nonconvex``      f_i(w) = sum_jk s(w_jk - t_i_jk),  s(x) = x^2/(1+x^2)

The bump s is bounded with |s'| <= 3*sqrt(3)/8 and |s''| <= 2 (attained at
0), so the nonconvex family has L = 2 exactly and a hard variance cap.
Minibatches are drawn i.i.d. uniform with replacement; component indices
are 1-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

PROBLEM_KINDS = ("quadratic", "least_squares", "nonconvex")

# sup |s'| for s(x) = x^2/(1+x^2), attained at x = 1/sqrt(3)
_BUMP_SLOPE_MAX = 3.0 * math.sqrt(3.0) / 8.0

# Probe grid used to refine variance bounds that have no closed form:
# 64 random points in a Frobenius ball of radius 10 around the data center,
# then a 1.5x safety factor on the observed maximum.
_PROBE_COUNT = 64
_PROBE_RADIUS = 10.0
_PROBE_SAFETY = 1.5


@dataclass(frozen=True)
class ProblemInstance:
    """Immutable finite-sum objective; payload depends on ``kind``."""

    kind: str
    n_components: int  # N
    m: int
    n: int
    rng_seed: int
    targets: np.ndarray | None = None  # (N, m, n) quadratic / nonconvex
    xs: np.ndarray | None = None  # (N, k, m) least_squares
    ys: np.ndarray | None = None  # (N, k, n) least_squares

    def __post_init__(self):
        if self.kind not in PROBLEM_KINDS:
            raise ValueError(f"kind must be one of {PROBLEM_KINDS}, got {self.kind!r}")
        if self.n_components < 1:
            raise ValueError("n_components must be >= 1")
        if not (self.m >= self.n >= 1):
            raise DimensionError(f"need m >= n >= 1, got m={self.m}, n={self.n}")
        for name in ("targets", "xs", "ys"):
            arr = getattr(self, name)
            if arr is not None and not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")


@dataclass(frozen=True)
class ProblemConstants:
    """Certified constants of an instance."""

    L: float  # mean smoothness (1/N) sum L_i
    sigma2: float  # single-sample gradient variance bound
    f_star: float  # infimum of f
    minimizer: np.ndarray | None = None


def make_problem(
    kind: str,
    n_components: int,
    m: int,
    n: int,
    seed: int,
    spread: float = 1.0,
    k_rows: int | None = None,
) -> ProblemInstance:
    """Generate an instance; ``spread`` scales the dispersion of the data."""
    rng = np.random.default_rng(seed)
    if kind in ("quadratic", "nonconvex"):
        targets = spread * rng.standard_normal((n_components, m, n))
        return ProblemInstance(kind, n_components, m, n, seed, targets=targets)
    if kind == "least_squares":
        k = k_rows if k_rows is not None else m
        if k < 1:
            raise ValueError("k_rows must be >= 1")
        xs = rng.standard_normal((n_components, k, m))
        w_true = rng.standard_normal((m, n))
        ys = xs @ w_true + spread * rng.standard_normal((n_components, k, n))
        return ProblemInstance(kind, n_components, m, n, seed, xs=xs, ys=ys)
    raise ValueError(f"kind must be one of {PROBLEM_KINDS}, got {kind!r}")


def _check_shape(p: ProblemInstance, w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (p.m, p.n):
        raise DimensionError(f"iterate has shape {w.shape}, expected {(p.m, p.n)}")
    return w


def _component_losses(p: ProblemInstance, w: np.ndarray) -> np.ndarray:
    if p.kind == "quadratic":
        d = w - p.targets
        return 0.5 * np.sum(d * d, axis=(1, 2))
    if p.kind == "least_squares":
        r = p.xs @ w - p.ys
        return 0.5 * np.sum(r * r, axis=(1, 2))
    d = w - p.targets
    d2 = d * d
    return np.sum(d2 / (1.0 + d2), axis=(1, 2))


def _component_gradients(p: ProblemInstance, w: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Stack of gradients of the selected components (0-based ``idx``)."""
    if p.kind == "quadratic":
        return w - p.targets[idx]
    if p.kind == "least_squares":
        xs = p.xs[idx]
        r = xs @ w - p.ys[idx]
        return np.matmul(xs.transpose(0, 2, 1), r)
    d = w - p.targets[idx]
    d2 = d * d
    return 2.0 * d / (1.0 + d2) ** 2


def loss(p: ProblemInstance, w) -> float:
    """f(w) = (1/N) sum_i f_i(w)."""
    w = _check_shape(p, w)
    return float(np.mean(_component_losses(p, w)))


def full_gradient(p: ProblemInstance, w) -> np.ndarray:
    """Gradient of f at w."""
    w = _check_shape(p, w)
    if p.kind == "quadratic":
        return w - p.targets.mean(axis=0)
    idx = np.arange(p.n_components)
    return _component_gradients(p, w, idx).mean(axis=0)


def minibatch_gradient(p: ProblemInstance, w, batch) -> np.ndarray:
    """(1/b) sum over the batch of component gradients.

    ``batch`` is a sequence of 1-based component indices, repeats allowed.
    """
    w = _check_shape(p, w)
    batch = np.asarray(batch, dtype=np.int64)
    if batch.ndim != 1 or batch.size < 1:
        raise ValueError("batch must be a non-empty sequence of indices")
    if np.any(batch < 1) or np.any(batch > p.n_components):
        raise ValueError(f"batch indices must lie in [1..{p.n_components}]")
    return _component_gradients(p, w, batch - 1).mean(axis=0)


def sample_batch(p: ProblemInstance, rng: np.random.Generator, b: int) -> np.ndarray:
    """Draw ``b`` component indices i.i.d. uniform with replacement (1-based)."""
    if b < 1:
        raise ValueError("batch size must be >= 1")
    return rng.integers(1, p.n_components + 1, size=b)


def single_sample_variance(p: ProblemInstance, w) -> float:
    """(1/N) sum_i ||grad f_i(w) - grad f(w)||_F^2 -- the variance of the
    singleton stochastic gradient at ``w``."""
    w = _check_shape(p, w)
    grads = _component_gradients(p, w, np.arange(p.n_components))
    d = grads - grads.mean(axis=0)
    return float(np.mean(np.sum(d * d, axis=(1, 2))))


def _probe_points(center: np.ndarray, seed: int):
    """Deterministic probe grid in the radius-10 ball around ``center``.

    The first point is the center itself; the rest alternate between
    radius-uniform draws (interior-heavy, where bounded-gradient objectives
    have their largest variance) and volume-uniform draws (shell-heavy,
    where unbounded-gradient objectives do).
    """
    rng = np.random.default_rng((seed, 0x9E3779B9))
    d = center.size
    yield center.copy()
    for i in range(_PROBE_COUNT - 1):
        g = rng.standard_normal(center.shape)
        u = rng.uniform()
        r = _PROBE_RADIUS * (u if i % 2 == 0 else u ** (1.0 / d))
        yield center + r * g / np.linalg.norm(g)


def _probed_sigma2(p: ProblemInstance, center: np.ndarray) -> float:
    worst = 0.0
    for w in _probe_points(center, p.rng_seed):
        worst = max(worst, single_sample_variance(p, w))
    return _PROBE_SAFETY * worst


def _golden_section_min(fun, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Argmin of a unimodal-enough ``fun`` on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol * (1.0 + abs(a) + abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def _bump_coordinate_min(values: np.ndarray) -> tuple[float, float]:
    """Global minimum of g(w) = mean_i s(w - values_i) for one coordinate.

    g' is negative left of min(values) and positive right of max(values), so
    the minimizer lies in their hull; a dense grid brackets it and a
    golden-section pass refines the winning cell.
    """
    lo, hi = float(values.min()), float(values.max())

    def g(w):
        d = w - values
        d2 = d * d
        return float(np.mean(d2 / (1.0 + d2)))

    if hi - lo < 1e-12:
        return lo, g(lo)
    grid = np.linspace(lo, hi, 512)
    d = grid[:, None] - values[None, :]
    d2 = d * d
    gv = np.mean(d2 / (1.0 + d2), axis=1)
    k = int(np.argmin(gv))
    a = grid[max(0, k - 1)]
    b = grid[min(len(grid) - 1, k + 1)]
    w_star = _golden_section_min(g, float(a), float(b))
    return w_star, g(w_star)


def constants(p: ProblemInstance) -> ProblemConstants:
    """Certify L, sigma^2, and f* for the instance.

    quadratic: everything is closed form (L = 1, variance is independent of
    the iterate, the minimizer is the target mean).

    least_squares: L_i is the top eigenvalue of x_i^T x_i; f* comes from the
    pooled normal equations; the variance grows with ||w||, so it is bounded
    on the probe ball around the minimizer with a 1.5x safety factor.

    nonconvex: L = sup|s''| = 2; f* is separable per coordinate and found by
    a bracketed grid plus golden-section refinement; the variance is the
    smaller of the analytic cap 4 (3*sqrt(3)/8)^2 m n and the probed value.
    """
    if p.kind == "quadratic":
        tbar = p.targets.mean(axis=0)
        d = p.targets - tbar
        sigma2 = float(np.mean(np.sum(d * d, axis=(1, 2))))
        return ProblemConstants(L=1.0, sigma2=sigma2, f_star=0.5 * sigma2, minimizer=tbar)

    if p.kind == "least_squares":
        grams = np.matmul(p.xs.transpose(0, 2, 1), p.xs)
        l_each = np.array([np.linalg.eigvalsh(g)[-1] for g in grams])
        gram_mean = grams.mean(axis=0)
        rhs = np.matmul(p.xs.transpose(0, 2, 1), p.ys).mean(axis=0)
        minimizer, *_ = np.linalg.lstsq(gram_mean, rhs, rcond=None)
        return ProblemConstants(
            L=float(l_each.mean()),
            sigma2=_probed_sigma2(p, minimizer),
            f_star=loss(p, minimizer),
            minimizer=minimizer,
        )

    # nonconvex
    minimizer = np.empty((p.m, p.n))
    f_star = 0.0
    for j in range(p.m):
        for k in range(p.n):
            w_star, g_min = _bump_coordinate_min(p.targets[:, j, k])
            minimizer[j, k] = w_star
            f_star += g_min
    cap = 4.0 * _BUMP_SLOPE_MAX**2 * p.m * p.n
    sigma2 = min(cap, _probed_sigma2(p, p.targets.mean(axis=0)))
    return ProblemConstants(L=2.0, sigma2=sigma2, f_star=f_star, minimizer=minimizer)
