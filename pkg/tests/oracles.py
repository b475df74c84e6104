"""Independent oracles used by the test suite.

Everything here deliberately avoids the library's own code paths: explicit
Python loops, extended-precision one-sided Jacobi for singular values,
central finite differences, and direct double sums for the bound terms
(including the momentum shift written out as beta**(i+1), not factored).
"""

from __future__ import annotations

import numpy as np


def naive_trace_inner(a: np.ndarray, b: np.ndarray) -> float:
    """trace(a^T b) from the full triple-loop product."""
    m, n = a.shape
    prod = [[0.0] * n for _ in range(n)]
    for j in range(n):
        for k in range(n):
            s = 0.0
            for i in range(m):
                s += float(a[i, j]) * float(b[i, k])
            prod[j][k] = s
    return sum(prod[j][j] for j in range(n))


def naive_frobenius_norm(a: np.ndarray) -> float:
    s = 0.0
    for row in a:
        for v in row:
            s += float(v) * float(v)
    return s**0.5


def jacobi_singular_values(a: np.ndarray, sweeps: int = 60) -> np.ndarray:
    """Singular values via one-sided Jacobi in extended precision.

    Rotations orthogonalize column pairs of the working matrix; at
    convergence the column norms are the singular values.
    """
    w = np.asarray(a, dtype=np.longdouble).copy()
    if w.shape[0] < w.shape[1]:
        w = w.T
    n = w.shape[1]
    one = np.longdouble(1.0)
    for _ in range(sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = np.dot(w[:, p], w[:, p])
                beta = np.dot(w[:, q], w[:, q])
                gamma = np.dot(w[:, p], w[:, q])
                if abs(gamma) <= np.longdouble(1e-24) * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if zeta == 0.0:
                    t = one
                else:
                    t = np.sign(zeta) / (abs(zeta) + np.sqrt(one + zeta * zeta))
                c = one / np.sqrt(one + t * t)
                s = c * t
                col_p = w[:, p].copy()
                w[:, p] = c * col_p - s * w[:, q]
                w[:, q] = s * col_p + c * w[:, q]
        if not rotated:
            break
    values = np.sqrt(np.sum(w * w, axis=0))
    return np.sort(values)[::-1]


def central_diff_gradient(fun, w: np.ndarray, h: float = 1e-5) -> np.ndarray:
    g = np.zeros_like(w, dtype=np.float64)
    for idx in np.ndindex(*w.shape):
        wp = w.copy()
        wm = w.copy()
        wp[idx] += h
        wm[idx] -= h
        g[idx] = (fun(wp) - fun(wm)) / (2.0 * h)
    return g


# per-kind component math, written from the defining formulas


def quad_component_loss(target: np.ndarray, w: np.ndarray) -> float:
    d = w - target
    return 0.5 * float(np.sum(d * d))


def quad_component_grad(target: np.ndarray, w: np.ndarray) -> np.ndarray:
    return w - target


def ls_component_loss(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    r = x @ w - y
    return 0.5 * float(np.sum(r * r))


def ls_component_grad(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    return x.T @ (x @ w - y)


def bump(x):
    return x * x / (1.0 + x * x)


def bump_component_loss(target: np.ndarray, w: np.ndarray) -> float:
    return float(np.sum(bump(w - target)))


def bump_component_grad(target: np.ndarray, w: np.ndarray) -> np.ndarray:
    d = w - target
    return 2.0 * d / (1.0 + d * d) ** 2


def naive_loss(problem, w: np.ndarray) -> float:
    """Mean of component losses by explicit accumulation."""
    total = 0.0
    for i in range(problem.n_components):
        if problem.kind == "quadratic":
            total += quad_component_loss(problem.targets[i], w)
        elif problem.kind == "least_squares":
            total += ls_component_loss(problem.xs[i], problem.ys[i], w)
        else:
            total += bump_component_loss(problem.targets[i], w)
    return total / problem.n_components


def naive_full_gradient(problem, w: np.ndarray) -> np.ndarray:
    total = np.zeros_like(w)
    for i in range(problem.n_components):
        if problem.kind == "quadratic":
            total += quad_component_grad(problem.targets[i], w)
        elif problem.kind == "least_squares":
            total += ls_component_grad(problem.xs[i], problem.ys[i], w)
        else:
            total += bump_component_grad(problem.targets[i], w)
    return total / problem.n_components


def brute_bound_terms(
    coeffs: dict, etas, inv_sqrt_b, beta: float, nesterov: bool
) -> list[float]:
    """Direct double-sum evaluation of the bound terms.

    The momentum shift is written out exactly as it appears in the bound:
    beta**t / beta**i without Nesterov, beta**(t+1) / beta**(i+1) with it,
    plus the trailing noise term in the Nesterov case.
    """
    etas = [float(e) for e in etas]
    isb = [float(x) for x in inv_sqrt_b]
    steps = len(etas)
    s = sum(etas)
    terms = [coeffs["c1"] / s, coeffs["c2"] * sum(e * e for e in etas) / s]
    shift = 1 if nesterov else 0
    a3 = sum(etas[t] * beta ** (t + shift) for t in range(steps))
    a4 = sum(
        etas[t] * sum(beta ** (i + shift) * etas[t - i] for i in range(1, t + 1))
        for t in range(steps)
    )
    a5 = sum(
        etas[t] * sum(beta ** (i + shift) * isb[t - i] for i in range(t + 1))
        for t in range(steps)
    )
    terms.append(coeffs["c3"] * a3 / s)
    terms.append(coeffs["c4"] * a4 / s)
    terms.append(coeffs["c5"] * a5 / s)
    if nesterov:
        terms.append(coeffs["c6"] * sum(etas[t] * isb[t] for t in range(steps)) / s)
    return terms
