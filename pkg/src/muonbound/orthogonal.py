"""Nearest column-orthogonal factor of a matrix.

For ``c`` with economy SVD ``u @ diag(s) @ v.T``, the minimizer of
``||o - c||_F`` over ``o.T @ o = I`` is the polar factor ``u @ v.T``.  It is
also the maximizer of the inner product ``c . o`` over the same constraint
set, with maximum equal to the nuclear norm of ``c``.

Two routes are provided:

* ``polar_factor_exact`` -- via the SVD; deterministic even for
  rank-deficient input thanks to the SVD sign convention.
* ``newton_schulz`` -- the cubic fixed-point iteration

      x <- (3 x - x x^T x) / 2

  which drives every singular value to 1 whenever they start in
  (0, sqrt(3)).  Pre-scaling by the Frobenius norm puts them in (0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionError
from .linalg import as_matrix, svd


@dataclass(frozen=True)
class OrthoMethod:
    """How a momentum blend is turned into an orthogonal step direction."""

    kind: str = "exact_polar"  # "exact_polar" | "newton_schulz"
    ns_iterations: int = 30

    def __post_init__(self):
        if self.kind not in ("exact_polar", "newton_schulz"):
            raise ValueError(f"unknown orthogonalization kind: {self.kind!r}")
        if self.kind == "newton_schulz" and self.ns_iterations < 1:
            raise ValueError("ns_iterations must be >= 1")


def polar_factor_exact(c) -> np.ndarray:
    """Exact polar factor of an m x n matrix with m >= n."""
    c = as_matrix(c, "c")
    m, n = c.shape
    if m < n:
        raise DimensionError(
            f"polar factor needs m >= n, got {c.shape}; use orthogonalize() for wide input"
        )
    f = svd(c)
    return f.u @ f.v.T


def newton_schulz(c, iters: int, prescale: bool = True) -> np.ndarray:
    """Approximate polar factor after ``iters`` cubic Newton-Schulz steps.

    With ``prescale`` (the default) the iterate starts at ``c / ||c||_F``,
    which guarantees convergence; for well-conditioned full-rank input
    (condition number <= 100) 30 iterations land within 1e-6 of the exact
    polar factor.  Disabling the prescale exposes the raw iteration.
    """
    c = as_matrix(c, "c")
    m, n = c.shape
    if m < n:
        raise DimensionError(
            f"Newton-Schulz needs m >= n, got {c.shape}; use orthogonalize() for wide input"
        )
    if iters < 1:
        raise ValueError("iters must be >= 1")
    norm = np.linalg.norm(c, "fro")
    if norm == 0.0:
        raise DegenerateInputError("cannot orthogonalize the zero matrix")
    x = c / norm if prescale else c.copy()
    for _ in range(iters):
        x = 1.5 * x - 0.5 * (x @ (x.T @ x))
    return x


def orthogonality_defect(o) -> float:
    """``||o.T @ o - I||_F`` over the column dimension."""
    o = as_matrix(o, "o")
    gram = o.T @ o
    return float(np.linalg.norm(gram - np.eye(o.shape[1]), "fro"))


def orthogonalize(c, method: OrthoMethod) -> np.ndarray:
    """Dispatch on ``method``; wide inputs are transposed, solved, and
    transposed back so the constraint always runs over the smaller side."""
    c = as_matrix(c, "c")
    if c.shape[0] < c.shape[1]:
        return orthogonalize(c.T, method).T
    if method.kind == "exact_polar":
        return polar_factor_exact(c)
    return newton_schulz(c, method.ns_iterations)
