"""Convergence-bound engine.

``bound_terms`` evaluates, as exact finite sums over a schedule, the upper
bound on min_t E||grad f(w_t)||_F that the Muon update admits under mean
smoothness L and gradient-noise level sigma: five weighted-sum terms
(plus a sixth with Nesterov).  The two nested sums run through O(T)
recursions obtained by an index shift::

    u_t = beta * (eta_{t-1} + u_{t-1})          # sum_i beta^i eta_{t-i}
    v_t = 1/sqrt(b_t) + beta * v_{t-1}          # sum_i beta^i / sqrt(b_{t-i})

``bound_terms_reference`` keeps the direct O(T^2) double sums as a slow
cross-check.  ``closed_form_bound`` evaluates the closed-form bounds that
dominate the exact sums for the eight (learning-rate kind x batch-size
kind) pairings, plus a sharper "derived form" for the diminishing rate
with a general power a in (0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InconsistencyError
from .problems import ProblemConstants
from .schedules import BsSchedule, LrSchedule, bs_real_sequence, lr_sequence

CLOSED_FORM_LR_KINDS = ("constant", "cosine", "polynomial", "diminishing")
CLOSED_FORM_BS_KINDS = ("constant", "exponential")


@dataclass(frozen=True)
class BoundConstants:
    """Problem- and start-dependent coefficients of the bound.

    c1: initial optimality gap f(w0) - f*.
    c2: curvature penalty n L / 2.
    c3: initial momentum mismatch, 2 sqrt(n) ||m0 - grad f(w0)||_F.
    c4: momentum drift factor 2 n L.
    c5, c6: noise scale 2 (1 - beta) sigma sqrt(n) (always equal).
    """

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float


def bound_constants(
    pc: ProblemConstants, f_w0: float, m0_gap: float, beta: float, n: int
) -> BoundConstants:
    """Assemble the coefficients from certified problem constants.

    ``m0_gap`` is ||m0 - grad f(w0)||_F, supplied by the caller: either a
    realized (sampled) value or the a-priori bound from
    ``apriori_momentum_gap``.
    """
    if not (0.0 <= beta < 1.0):
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if m0_gap < 0.0:
        raise ValueError("m0_gap must be >= 0")
    gap = f_w0 - pc.f_star
    if gap < -1e-9 * (1.0 + abs(pc.f_star)):
        raise InconsistencyError(
            f"f(w0) = {f_w0} lies below the certified infimum {pc.f_star}"
        )
    sigma = math.sqrt(pc.sigma2)
    noise = 2.0 * (1.0 - beta) * sigma * math.sqrt(n)
    return BoundConstants(
        c1=max(0.0, gap),
        c2=0.5 * n * pc.L,
        c3=2.0 * m0_gap * math.sqrt(n),
        c4=2.0 * n * pc.L,
        c5=noise,
        c6=noise,
    )


def apriori_momentum_gap(grad0_norm: float, sigma: float, beta: float, b0: float) -> float:
    """Bound on E||m0 - grad f(w0)||_F that needs no sampling.

    m0 = (1-beta) g0 with E g0 = grad f(w0), so the gap is at most
    beta ||grad f(w0)||_F + (1-beta) sigma / sqrt(b0).
    """
    if b0 < 1:
        raise ValueError("b0 must be >= 1")
    return beta * grad0_norm + (1.0 - beta) * sigma / math.sqrt(b0)


@dataclass(frozen=True)
class BoundTerms:
    """The evaluated bound, term by term; ``term6`` is None without Nesterov."""

    term1: float
    term2: float
    term3: float
    term4: float
    term5: float
    term6: float | None
    total: float
    nesterov: bool

    def terms(self) -> tuple[float, ...]:
        base = (self.term1, self.term2, self.term3, self.term4, self.term5)
        return base + ((self.term6,) if self.term6 is not None else ())


def _validate_sequences(etas, inv_sqrt_b) -> tuple[np.ndarray, np.ndarray]:
    etas = np.asarray(etas, dtype=np.float64)
    isb = np.asarray(inv_sqrt_b, dtype=np.float64)
    if etas.ndim != 1 or etas.size < 1:
        raise ValueError("etas must be a non-empty 1-D sequence")
    if isb.shape != etas.shape:
        raise ValueError("inv_sqrt_b must match etas in length")
    if np.any(etas < 0.0) or not np.all(np.isfinite(etas)):
        raise ValueError("etas must be finite and >= 0")
    if np.any(isb < 0.0) or not np.all(np.isfinite(isb)):
        raise ValueError("inv_sqrt_b must be finite and >= 0")
    if etas.sum() <= 0.0:
        raise ValueError("etas must have positive sum")
    return etas, isb


def _assemble(c: BoundConstants, s: float, sum_sq: float, a3: float, a4: float,
              a5: float, a6: float, beta: float, nesterov: bool) -> BoundTerms:
    shift = beta if nesterov else 1.0
    term1 = c.c1 / s
    term2 = c.c2 * sum_sq / s
    term3 = shift * c.c3 * a3 / s
    term4 = shift * c.c4 * a4 / s
    term5 = shift * c.c5 * a5 / s
    term6 = c.c6 * a6 / s if nesterov else None
    total = term1 + term2 + term3 + term4 + term5 + (term6 or 0.0)
    return BoundTerms(term1, term2, term3, term4, term5, term6, total, nesterov)


def bound_terms(c: BoundConstants, etas, inv_sqrt_b, beta: float, nesterov: bool) -> BoundTerms:
    """Exact evaluation over explicit sequences eta_t and 1/sqrt(b_t)."""
    if not (0.0 <= beta < 1.0):
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    etas, isb = _validate_sequences(etas, inv_sqrt_b)
    steps = etas.size
    s = float(etas.sum())
    sum_sq = float(etas @ etas)
    a3 = float(etas @ np.power(beta, np.arange(steps)))
    u = 0.0  # sum_{i=1}^{t} beta^i eta_{t-i}
    v = 0.0  # sum_{i=0}^{t} beta^i / sqrt(b_{t-i})
    a4 = 0.0
    a5 = 0.0
    for t in range(steps):
        if t > 0:
            u = beta * (etas[t - 1] + u)
        v = isb[t] + beta * v
        a4 += etas[t] * u
        a5 += etas[t] * v
    a6 = float(etas @ isb)
    return _assemble(c, s, sum_sq, a3, a4, a5, a6, beta, nesterov)


def bound_terms_reference(
    c: BoundConstants, etas, inv_sqrt_b, beta: float, nesterov: bool
) -> BoundTerms:
    """Direct O(T^2) double-sum evaluation, kept as a slow cross-check."""
    if not (0.0 <= beta < 1.0):
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    etas, isb = _validate_sequences(etas, inv_sqrt_b)
    steps = etas.size
    s = float(etas.sum())
    sum_sq = float(sum(e * e for e in etas))
    a3 = sum(etas[t] * beta**t for t in range(steps))
    a4 = sum(
        etas[t] * sum(beta**i * etas[t - i] for i in range(1, t + 1)) for t in range(steps)
    )
    a5 = sum(
        etas[t] * sum(beta**i * isb[t - i] for i in range(t + 1)) for t in range(steps)
    )
    a6 = sum(etas[t] * isb[t] for t in range(steps))
    return _assemble(c, s, sum_sq, float(a3), float(a4), float(a5), float(a6), beta, nesterov)


def evaluate_bound(
    c: BoundConstants,
    lr: LrSchedule,
    bs: BsSchedule,
    beta: float,
    steps: int,
    nesterov: bool,
) -> BoundTerms:
    """Exact evaluation over the first ``steps`` ticks of the schedules.

    Batch sizes enter as their mathematical real values (``bs_real_at``),
    which is what the closed forms assume; pass realized integer sizes to
    ``bound_terms`` directly to bound a concrete run.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    etas = lr_sequence(lr, steps)
    breal = bs_real_sequence(bs, steps)
    inv_sqrt_b = np.where(np.isinf(breal), 0.0, 1.0 / np.sqrt(breal))
    return bound_terms(c, etas, inv_sqrt_b, beta, nesterov)


@dataclass(frozen=True)
class ClosedFormBound:
    """A closed-form bound value for one (lr kind, bs kind) pairing."""

    lr_kind: str
    bs_kind: str
    nesterov: bool
    value: float
    d_constants: dict[str, float]
    derived_form: bool = False


def _d_constants(c: BoundConstants, beta: float, eta: float, p: float | None) -> dict[str, float]:
    one_minus = 1.0 - beta
    d = {
        "d1": c.c1 / eta + c.c3 / one_minus,
        "d2": c.c2 + c.c4 / one_minus,
        "d3": c.c5 / one_minus,
        "d4": (c.c5 + c.c6) / one_minus,
        "d1_cosine": 2.0 * c.c1 / eta + eta * c.c2 + 2.0 * c.c3 / one_minus,
        "d2_cosine": 0.75 * c.c2 + 2.0 * c.c4 / one_minus,
    }
    if p is not None:
        d["d1_poly"] = c.c1 / eta + eta * c.c2 + c.c3 / one_minus
        d["d2_poly"] = c.c2 / (2.0 * p + 1.0) + c.c4 / one_minus
    return d


def closed_form_bound(
    c: BoundConstants,
    lr_kind: str,
    bs_kind: str,
    beta: float,
    steps: int,
    nesterov: bool,
    *,
    eta: float,
    b: float,
    delta: float | None = None,
    p: float | None = None,
    a: float = 0.5,
    derived_form: bool = False,
) -> ClosedFormBound:
    """Closed-form bound for the given schedule pairing at horizon ``steps``.

    ``eta`` and ``b`` are the peak rate and base batch size of the
    schedules; ``delta`` is the exponential growth factor and ``p`` the
    polynomial power where applicable.  The simple diminishing-rate form
    assumes the square-root power a = 1/2 and is valid once
    2 (sqrt(T) - 1) >= sqrt(T), i.e. T >= 4; ``derived_form=True``
    switches to the derived brackets, which hold for every T >= 2 and any
    a in (0, 1].
    """
    if lr_kind not in CLOSED_FORM_LR_KINDS:
        raise ValueError(f"lr_kind must be one of {CLOSED_FORM_LR_KINDS}, got {lr_kind!r}")
    if bs_kind not in CLOSED_FORM_BS_KINDS:
        raise ValueError(f"bs_kind must be one of {CLOSED_FORM_BS_KINDS}, got {bs_kind!r}")
    if not (0.0 <= beta < 1.0):
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if eta <= 0.0 or b <= 0.0:
        raise ValueError("eta and b must be positive")
    if bs_kind == "exponential" and (delta is None or delta <= 1.0):
        raise ValueError("exponential batch growth requires delta > 1")
    if lr_kind == "polynomial" and (p is None or p <= 0.0):
        raise ValueError("polynomial decay requires p > 0")
    if derived_form and lr_kind != "diminishing":
        raise ValueError("the derived form exists only for the diminishing rate")

    big_t = float(steps)
    d = _d_constants(c, beta, eta, p)
    tail_const = d["d4"] if nesterov else d["d3"]
    sd = None
    if bs_kind == "exponential":
        sd = math.sqrt(delta) / (math.sqrt(delta) - 1.0)

    if lr_kind == "diminishing":
        if derived_form:
            value = _derived_diminishing(c, beta, steps, nesterov, eta, b, sd, bs_kind, a)
            return ClosedFormBound(lr_kind, bs_kind, nesterov, value, d, derived_form=True)
        if not math.isclose(a, 0.5, rel_tol=0.0, abs_tol=1e-12):
            raise ValueError(
                "the simple diminishing form assumes a = 1/2; use derived_form for general a"
            )
        head = (d["d1"] + eta * d["d2"] * math.log(big_t)) / (2.0 * math.sqrt(big_t))
        if bs_kind == "constant":
            tail = tail_const / math.sqrt(b)
        else:
            tail = sd * tail_const / math.sqrt(b * big_t)
        return ClosedFormBound(lr_kind, bs_kind, nesterov, head + tail, d)

    if lr_kind == "constant":
        head = d["d1"] / big_t + d["d2"] * eta
        multiplier = 1.0
    elif lr_kind == "cosine":
        head = d["d1_cosine"] / big_t + d["d2_cosine"] * eta
        multiplier = 2.0
    else:  # polynomial
        head = (p + 1.0) * (d["d1_poly"] / big_t + d["d2_poly"] * eta)
        multiplier = p + 1.0

    if bs_kind == "constant":
        tail = multiplier * tail_const / math.sqrt(b)
    else:
        tail = multiplier * sd * tail_const / (math.sqrt(b) * big_t)
    return ClosedFormBound(lr_kind, bs_kind, nesterov, head + tail, d)


def _derived_diminishing(
    c: BoundConstants,
    beta: float,
    steps: int,
    nesterov: bool,
    eta: float,
    b: float,
    sd: float | None,
    bs_kind: str,
    a: float,
) -> float:
    """Derived brackets for eta_t = eta / (t+1)^a, a in (0, 1], T >= 2."""
    if not (0.0 < a <= 1.0):
        raise ValueError("a must lie in (0, 1]")
    if steps < 2:
        raise ValueError("the derived form requires T >= 2")
    big_t = float(steps)
    log_t = math.log(big_t)
    one_minus = 1.0 - beta

    # T**(1-a) - 1 rounds to 0 once a is within a few ulps of 1; the a = 1
    # brackets remain upper bounds there (sum eta_t >= eta log(T+1) holds
    # for every a <= 1, and sum eta_t^2 <= 2a eta^2 / (2a - 1) ~ 2 eta^2)
    growth = big_t ** (1.0 - a) - 1.0
    if math.isclose(a, 1.0, rel_tol=0.0, abs_tol=1e-12) or growth <= 0.0:
        inv_sum = 1.0 / (eta * log_t)
        sq_ratio = 2.0 * eta / log_t
    else:
        inv_sum = (1.0 - a) / (eta * growth)
        if math.isclose(a, 0.5, rel_tol=0.0, abs_tol=1e-12):
            sq_ratio = eta * (1.0 + log_t) / (2.0 * (math.sqrt(big_t) - 1.0))
        elif a < 0.5:
            sq_ratio = (1.0 - a) * eta * big_t ** (1.0 - 2.0 * a) / ((1.0 - 2.0 * a) * growth)
        else:
            sq_ratio = 2.0 * a * (1.0 - a) * eta / ((2.0 * a - 1.0) * growth)

    term1 = c.c1 * inv_sum
    term2 = c.c2 * sq_ratio
    term3 = c.c3 * eta * inv_sum / one_minus
    term4 = c.c4 * sq_ratio / one_minus
    if bs_kind == "constant":
        term5 = c.c5 / (one_minus * math.sqrt(b))
        term6 = c.c6 / math.sqrt(b)
    else:
        term5 = c.c5 * sd * eta * inv_sum / (one_minus * math.sqrt(b))
        term6 = c.c6 * sd * eta * inv_sum / math.sqrt(b)
    total = term1 + term2 + term3 + term4 + term5
    if nesterov:
        total += term6
    return total


def slope_estimate(pairs) -> float:
    """Least-squares slope of log(bound) against log(T).

    ``pairs`` is a sequence of (T, bound) with strictly increasing T and
    positive bounds; at least three points are required.
    """
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError("need at least 3 (T, bound) pairs")
    ts = np.array([float(t) for t, _ in pairs])
    vals = np.array([float(v) for _, v in pairs])
    if np.any(np.diff(ts) <= 0.0):
        raise ValueError("T values must be strictly increasing")
    if np.any(vals <= 0.0):
        raise ValueError("bound values must be positive")
    slope, _ = np.polyfit(np.log(ts), np.log(vals), 1)
    return float(slope)
