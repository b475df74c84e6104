"""The Muon optimizer: momentum orthogonalized into a fixed-norm step.

Per step, with stochastic gradient g, momentum buffer m_prev (zero before
the first step), momentum parameter beta in [0, 1):

    m  = beta * m_prev + (1 - beta) * g
    c  = beta * m + (1 - beta) * g     if Nesterov, else  c = m
    o  = nearest column-orthogonal matrix to c
    w' = w - eta_t * o

With the exact polar factor, o has orthonormal columns and every update
has Frobenius norm eta_t * sqrt(n) regardless of the gradient scale (the
Newton-Schulz route matches this up to its approximation error).  A zero
blend c has no well-defined orthogonal factor; that step leaves the
iterate in place and is flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .linalg import as_matrix
from .orthogonal import OrthoMethod, orthogonality_defect, orthogonalize
from .problems import (
    ProblemInstance,
    full_gradient,
    loss,
    minibatch_gradient,
    sample_batch,
    single_sample_variance,
)
from .schedules import BsSchedule, LrSchedule, bs_at, lr_at


@dataclass(frozen=True)
class MuonConfig:
    beta: float = 0.95
    nesterov: bool = False
    ortho: OrthoMethod = field(default_factory=OrthoMethod)

    def __post_init__(self):
        if not (0.0 <= self.beta < 1.0):
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")


@dataclass(frozen=True)
class MuonState:
    t: int
    w: np.ndarray
    m_prev: np.ndarray


def init_state(w0) -> MuonState:
    w0 = as_matrix(w0, "w0")
    return MuonState(t=0, w=w0.copy(), m_prev=np.zeros_like(w0))


@dataclass(frozen=True)
class StepDiagnostics:
    momentum: np.ndarray  # m after the update
    blend: np.ndarray  # c fed to the orthogonalizer
    direction: np.ndarray  # o actually applied (zero matrix when skipped)
    skipped: bool


def muon_step(
    state: MuonState, cfg: MuonConfig, g, eta_t: float
) -> tuple[MuonState, StepDiagnostics]:
    """One update; returns the advanced state and the step internals."""
    g = as_matrix(g, "gradient")
    if g.shape != state.w.shape:
        raise DimensionError(f"gradient shape {g.shape} != iterate shape {state.w.shape}")
    if eta_t < 0.0:
        raise ValueError("eta_t must be >= 0")
    m = cfg.beta * state.m_prev + (1.0 - cfg.beta) * g
    c = cfg.beta * m + (1.0 - cfg.beta) * g if cfg.nesterov else m
    if np.all(c == 0.0):
        direction = np.zeros_like(c)
        w_next = state.w
        skipped = True
    else:
        direction = orthogonalize(c, cfg.ortho)
        w_next = state.w - eta_t * direction
        skipped = False
    next_state = MuonState(t=state.t + 1, w=w_next, m_prev=m)
    return next_state, StepDiagnostics(momentum=m, blend=c, direction=direction, skipped=skipped)


@dataclass
class Trace:
    """Per-step diagnostics of one run (arrays of length T) plus the final
    iterate.  ``momentum_gap`` is ||m_t - grad f(w_t)||_F and
    ``nesterov_gap`` is ||c_t - grad f(w_t)||_F."""

    t: np.ndarray
    eta: np.ndarray
    b: np.ndarray
    loss: np.ndarray
    grad_norm: np.ndarray
    momentum_gap: np.ndarray
    nesterov_gap: np.ndarray
    ortho_defect: np.ndarray
    step_norm: np.ndarray  # ||w_{t+1} - w_t||_F
    skipped: np.ndarray
    w_final: np.ndarray
    final_loss: float
    max_sample_variance: float  # max singleton-gradient variance seen at probed steps

    def __len__(self) -> int:
        return len(self.t)


def run(
    problem: ProblemInstance,
    cfg: MuonConfig,
    lr: LrSchedule,
    bs: BsSchedule,
    steps: int,
    w0,
    seed: int,
) -> Trace:
    """Run ``steps`` Muon updates on ``problem`` from ``w0``.

    Sampling is driven by a generator seeded with ``seed``, so the trace is
    a deterministic function of its arguments.  Full-gradient diagnostics
    are recorded at every step; the singleton-gradient variance is probed on
    a ~64-point subsample of the visited iterates.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    w0 = as_matrix(w0, "w0")
    if w0.shape != (problem.m, problem.n):
        raise DimensionError(f"w0 has shape {w0.shape}, expected {(problem.m, problem.n)}")

    rng = np.random.default_rng(seed)
    state = init_state(w0)
    probe_every = max(1, steps // 64)

    eta = np.empty(steps)
    b = np.empty(steps, dtype=np.int64)
    loss_vals = np.empty(steps)
    grad_norm = np.empty(steps)
    momentum_gap = np.empty(steps)
    nesterov_gap = np.empty(steps)
    defect = np.empty(steps)
    step_norm = np.empty(steps)
    skipped = np.zeros(steps, dtype=bool)
    max_var = 0.0

    for t in range(steps):
        eta[t] = lr_at(lr, t)
        b[t] = bs_at(bs, t)
        batch = sample_batch(problem, rng, int(b[t]))
        g = minibatch_gradient(problem, state.w, batch)
        grad = full_gradient(problem, state.w)
        loss_vals[t] = loss(problem, state.w)
        grad_norm[t] = np.linalg.norm(grad, "fro")
        if t % probe_every == 0:
            max_var = max(max_var, single_sample_variance(problem, state.w))
        prev_w = state.w
        state, diag = muon_step(state, cfg, g, float(eta[t]))
        momentum_gap[t] = np.linalg.norm(diag.momentum - grad, "fro")
        nesterov_gap[t] = np.linalg.norm(diag.blend - grad, "fro")
        defect[t] = orthogonality_defect(diag.direction)
        step_norm[t] = np.linalg.norm(state.w - prev_w, "fro")
        skipped[t] = diag.skipped

    max_var = max(max_var, single_sample_variance(problem, state.w))
    return Trace(
        t=np.arange(steps),
        eta=eta,
        b=b,
        loss=loss_vals,
        grad_norm=grad_norm,
        momentum_gap=momentum_gap,
        nesterov_gap=nesterov_gap,
        ortho_defect=defect,
        step_norm=step_norm,
        skipped=skipped,
        w_final=state.w,
        final_loss=loss(problem, state.w),
        max_sample_variance=max_var,
    )
