"""Dense matrix arithmetic and spectral factorizations.

All operations work on 2-D float64 numpy arrays (row-major layout) and are
pure functions: inputs are validated at the public entry points and never
mutated.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionError, NumericalError

# Singular values below RANK_RTOL * s_max do not count toward the rank.
RANK_RTOL = 1e-10


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array and check the entries are finite."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={out.ndim}")
    if out.shape[0] < 1 or out.shape[1] < 1:
        raise DimensionError(f"{name} must be at least 1x1, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    return out


def frobenius_inner(a, b) -> float:
    """Entrywise inner product sum_jk a_jk * b_jk."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(a * b))


def frobenius_norm(a) -> float:
    """Square root of the entrywise sum of squares."""
    return float(np.linalg.norm(as_matrix(a, "a"), "fro"))


class SvdFactors(NamedTuple):
    """Economy singular value decomposition ``a = u @ diag(s) @ v.T``."""

    u: np.ndarray  # m x r, orthonormal columns
    s: np.ndarray  # length r = min(m, n), non-increasing, non-negative
    v: np.ndarray  # n x r, orthonormal columns

    def reconstruct(self) -> np.ndarray:
        return self.u @ (self.s[:, None] * self.v.T)


def _singular_values(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # LAPACK hit its internal sweep cap
        raise NumericalError(f"SVD did not converge: {exc}") from exc


def svd(a) -> SvdFactors:
    """Economy SVD with a deterministic sign convention.

    Each column of ``u`` is flipped so that its first nonzero entry is
    non-negative (the matching ``v`` column flips with it), which makes the
    factors a function of the input alone.
    """
    a = as_matrix(a, "a")
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    u = np.ascontiguousarray(u)
    v = np.ascontiguousarray(vt.T)
    for j in range(u.shape[1]):
        nz = np.nonzero(u[:, j])[0]
        if nz.size and u[nz[0], j] < 0.0:
            u[:, j] = -u[:, j]
            v[:, j] = -v[:, j]
    return SvdFactors(u=u, s=s, v=v)


def nuclear_norm(a) -> float:
    """Sum of singular values."""
    return float(np.sum(_singular_values(as_matrix(a, "a"))))


def spectral_norm(a) -> float:
    """Largest singular value."""
    return float(_singular_values(as_matrix(a, "a"))[0])


def matrix_rank(a) -> int:
    """Number of singular values above ``RANK_RTOL`` times the largest."""
    s = _singular_values(as_matrix(a, "a"))
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))
