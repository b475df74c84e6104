"""Built-in verification suite.

Runs every invariant the library promises, in dependency order: matrix
norms, orthogonalization identities, schedule sum brackets, problem
certificates (smoothness, descent inequality, oracle unbiasedness and
variance), the deterministic per-step inequalities of a noise-free run,
bound-engine cross-checks (recursion vs direct sums, closed-form
dominance, Nesterov shift, monotonicities, empirical validity), sweep rate
slopes, and artifact reproducibility.

``fast`` uses reduced grids and should finish in well under a minute;
``full`` uses the acceptance-criteria grids.
"""

from __future__ import annotations

import filecmp
import math
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import (
    BoundConstants,
    BoundTerms,
    apriori_momentum_gap,
    bound_constants,
    bound_terms,
    bound_terms_reference,
    closed_form_bound,
    evaluate_bound,
)
from .experiment import ExperimentConfig, ProblemSpec, run_experiment, run_sweep
from .linalg import frobenius_inner, frobenius_norm, matrix_rank, nuclear_norm
from .muon import MuonConfig, MuonState, Trace, muon_step, run
from .orthogonal import (
    OrthoMethod,
    newton_schulz,
    orthogonality_defect,
    polar_factor_exact,
)
from .problems import (
    ProblemInstance,
    _component_gradients,
    constants,
    full_gradient,
    loss,
    make_problem,
)
from .schedules import BsSchedule, LrSchedule, bs_real_sequence, lr_at, lr_sequence


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class VerifyReport:
    level: str
    results: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def summary_lines(self) -> list[str]:
        lines = [
            f"{'PASS' if r.passed else 'FAIL'}  {r.name}{'  -- ' + r.detail if r.detail else ''}"
            for r in self.results
        ]
        n_fail = sum(not r.passed for r in self.results)
        lines.append(
            f"{len(self.results) - n_fail}/{len(self.results)} checks passed ({self.level})"
        )
        return lines


def _n(level: str, fast: int, full: int) -> int:
    return fast if level == "fast" else full


# ---------------------------------------------------------------------------
# shared reference setup: the desk-scale quadratic used by the bound checks
# ---------------------------------------------------------------------------

_REF = {
    "kind": "quadratic",
    "n_components": 256,
    "m": 8,
    "n": 4,
    "seed": 20240501,
    "beta": 0.9,
    "eta": 0.01,
    "b": 16,
    "delta": 2.0,
    "p": 2.0,
}


def reference_bound_constants() -> tuple[BoundConstants, dict]:
    """Bound coefficients of the reference quadratic started at zero, with
    the a-priori first-momentum gap (no sampling needed)."""
    problem = make_problem(
        _REF["kind"], _REF["n_components"], _REF["m"], _REF["n"], _REF["seed"]
    )
    pc = constants(problem)
    w0 = np.zeros((problem.m, problem.n))
    f_w0 = loss(problem, w0)
    grad0 = float(np.linalg.norm(full_gradient(problem, w0), "fro"))
    m0 = apriori_momentum_gap(grad0, math.sqrt(pc.sigma2), _REF["beta"], _REF["b"])
    c = bound_constants(pc, f_w0, m0, _REF["beta"], problem.n)
    return c, dict(_REF)


def _make_schedules(lr_kind: str, bs_kind: str, steps: int) -> tuple[LrSchedule, BsSchedule]:
    lr = LrSchedule(
        kind=lr_kind,
        eta=_REF["eta"],
        p=_REF["p"] if lr_kind == "polynomial" else None,
        horizon=steps if lr_kind in ("cosine", "polynomial") else None,
    )
    bs = BsSchedule(
        kind=bs_kind,
        b=_REF["b"],
        delta=_REF["delta"] if bs_kind == "exponential" else None,
    )
    return lr, bs


def nesterov_shift_holds(
    plain: BoundTerms, nes: BoundTerms, beta: float, etas, inv_sqrt_b, c6: float
) -> bool:
    """The Nesterov evaluation must equal the plain one with terms 3-5
    scaled by beta plus the extra c6-weighted term."""
    etas = np.asarray(etas, dtype=np.float64)
    isb = np.asarray(inv_sqrt_b, dtype=np.float64)
    for got, base in (
        (nes.term3, plain.term3),
        (nes.term4, plain.term4),
        (nes.term5, plain.term5),
    ):
        if abs(got - beta * base) > 1e-12 * max(1.0, abs(base)):
            return False
    expected6 = c6 * float(etas @ isb) / float(etas.sum())
    return nes.term6 is not None and abs(nes.term6 - expected6) <= 1e-12 * max(1.0, expected6)


# ---------------------------------------------------------------------------
# individual checks
# ---------------------------------------------------------------------------

def _random_shapes(rng, count):
    for _ in range(count):
        m = int(rng.integers(1, 9))
        n = int(rng.integers(1, 9))
        yield m, n


def check_norm_sandwich(level: str):
    rng = np.random.default_rng(11)
    count = _n(level, 40, 100)
    for i, (m, n) in enumerate(_random_shapes(rng, count)):
        x = rng.standard_normal((m, n))
        if i % 3 == 0:  # force rank deficiency
            x = np.outer(rng.standard_normal(m), rng.standard_normal(n))
        fro = frobenius_norm(x)
        nuc = nuclear_norm(x)
        rank = matrix_rank(x)
        slack = 1e-9 * (1.0 + fro)
        if not (fro <= nuc + slack and nuc <= math.sqrt(max(rank, 1)) * fro + slack):
            return False, f"violated at case {i} shape {(m, n)}"
    return True, f"{count} matrices"


def check_triangle_inequality(level: str):
    rng = np.random.default_rng(12)
    count = _n(level, 50, 200)
    for i in range(count):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(1, 7))
        a = rng.standard_normal((m, n))
        b = rng.standard_normal((m, n))
        slack = 1e-9 * (1.0 + frobenius_norm(a) + frobenius_norm(b))
        if frobenius_norm(a + b) > frobenius_norm(a) + frobenius_norm(b) + slack:
            return False, f"frobenius case {i}"
        if nuclear_norm(a + b) > nuclear_norm(a) + nuclear_norm(b) + slack:
            return False, f"nuclear case {i}"
    return True, f"{count} triples"


def check_cauchy_schwarz(level: str):
    rng = np.random.default_rng(13)
    count = _n(level, 50, 200)
    for i in range(count):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(1, 7))
        a = rng.standard_normal((m, n))
        b = rng.standard_normal((m, n))
        lhs = frobenius_inner(a, b) ** 2
        rhs = frobenius_norm(a) ** 2 * frobenius_norm(b) ** 2
        if lhs > rhs * (1.0 + 1e-12) + 1e-12:
            return False, f"case {i}"
    return True, f"{count} pairs"


def check_nuclear_identity(level: str):
    rng = np.random.default_rng(14)
    count = _n(level, 10, 30)
    for i in range(count):
        m = int(rng.integers(2, 10))
        n = int(rng.integers(1, m + 1))
        cmat = rng.standard_normal((m, n))
        o = polar_factor_exact(cmat)
        if orthogonality_defect(o) > 1e-10:
            return False, f"defect case {i}"
        nuc = nuclear_norm(cmat)
        if abs(frobenius_inner(cmat, o) - nuc) > 1e-8 * max(1.0, nuc):
            return False, f"identity case {i}"
    return True, f"{count} matrices"


def check_maximality(level: str):
    rng = np.random.default_rng(15)
    candidates = _n(level, 300, 2000)
    for i in range(5):
        cmat = rng.standard_normal((6, 3))
        best = frobenius_inner(cmat, polar_factor_exact(cmat))
        for _ in range(candidates):
            q, _ = np.linalg.qr(rng.standard_normal((6, 3)))
            if frobenius_inner(cmat, q) > best + 1e-6:
                return False, f"beaten at case {i}"
    return True, f"5 matrices x {candidates} candidates"


def check_scale_equivariance(level: str):
    rng = np.random.default_rng(16)
    for i in range(10):
        cmat = rng.standard_normal((7, 4))
        o = polar_factor_exact(cmat)
        for alpha in (1e-3, 0.5, 7.0, 1e4):
            if frobenius_norm(polar_factor_exact(alpha * cmat) - o) > 1e-9:
                return False, f"case {i} alpha {alpha}"
    return True, "10 matrices x 4 scales"


def check_newton_schulz_agreement(level: str):
    rng = np.random.default_rng(17)
    count = _n(level, 5, 20)
    for i in range(count):
        u, _ = np.linalg.qr(rng.standard_normal((8, 4)))
        v, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        s = np.exp(np.linspace(0.0, -math.log(rng.uniform(2.0, 100.0)), 4))
        cmat = u @ np.diag(s) @ v.T
        gap = frobenius_norm(newton_schulz(cmat, 30) - polar_factor_exact(cmat))
        if gap > 1e-6:
            return False, f"gap {gap:.2e} at case {i}"
    return True, f"{count} well-conditioned matrices"


def check_cosine_monotone(level: str):
    horizon = _n(level, 64, 512)
    s = LrSchedule(kind="cosine", eta=0.3, horizon=horizon)
    rates = [lr_at(s, t) for t in range(horizon + 1)]
    ok = all(b <= a + 1e-15 for a, b in zip(rates, rates[1:]))
    in_range = all(0.0 <= r <= s.eta for r in rates)
    return ok and in_range, f"horizon {horizon}"


def check_diminishing_sum_bracket(level: str):
    eta = 0.1
    s = LrSchedule(kind="diminishing", eta=eta)
    for steps in (4, 16, _n(level, 128, 1024)):
        total = float(lr_sequence(s, steps).sum())
        lo = 2.0 * eta * (math.sqrt(steps + 1.0) - 1.0)
        hi = eta * (1.0 + 2.0 * (math.sqrt(steps) - 1.0))
        if not (lo - 1e-12 <= total <= hi + 1e-12):
            return False, f"T={steps}: {lo} <= {total} <= {hi} fails"
    return True, "T in {4, 16, " + str(_n(level, 128, 1024)) + "}"


def check_cosine_sum_identity(level: str):
    eta = 0.7
    for steps in (2, 5, 16, _n(level, 100, 1000)):
        s = LrSchedule(kind="cosine", eta=eta, horizon=steps)
        seq = lr_sequence(s, steps)
        if seq.sum() < eta * steps / 2.0 - 1e-12:
            return False, f"sum bracket fails at T={steps}"
        expected = 3.0 * eta**2 * steps / 8.0 + eta**2 / 2.0
        if abs(float(seq @ seq) - expected) > 1e-9 * expected:
            return False, f"square-sum identity fails at T={steps}"
    return True, "exact square-sum identity"


def _small_problems(level: str) -> list[ProblemInstance]:
    n_comp = _n(level, 12, 24)
    return [
        make_problem("quadratic", n_comp, 5, 3, seed=101),
        make_problem("least_squares", n_comp, 5, 3, seed=102, k_rows=6),
        make_problem("nonconvex", n_comp, 5, 3, seed=103),
    ]


def check_smoothness(level: str):
    rng = np.random.default_rng(21)
    pairs = _n(level, 40, 100)
    for p in _small_problems(level):
        pc = constants(p)
        for i in range(pairs):
            w1 = 3.0 * rng.standard_normal((p.m, p.n))
            w2 = 3.0 * rng.standard_normal((p.m, p.n))
            lhs = frobenius_norm(full_gradient(p, w1) - full_gradient(p, w2))
            rhs = pc.L * frobenius_norm(w1 - w2)
            if lhs > rhs * (1.0 + 1e-9) + 1e-12:
                return False, f"{p.kind} pair {i}"
    return True, f"3 kinds x {pairs} pairs"


def check_descent_lemma(level: str):
    rng = np.random.default_rng(22)
    pairs = _n(level, 40, 100)
    for p in _small_problems(level):
        pc = constants(p)
        for i in range(pairs):
            w1 = 3.0 * rng.standard_normal((p.m, p.n))
            w2 = 3.0 * rng.standard_normal((p.m, p.n))
            quad_model = (
                loss(p, w2)
                + frobenius_inner(full_gradient(p, w2), w1 - w2)
                + 0.5 * pc.L * frobenius_norm(w1 - w2) ** 2
            )
            if loss(p, w1) > quad_model + 1e-9 * (1.0 + abs(quad_model)):
                return False, f"{p.kind} pair {i}"
    return True, f"3 kinds x {pairs} pairs"


def check_unbiasedness(level: str):
    rng = np.random.default_rng(23)
    draws = _n(level, 20_000, 100_000)
    for p in _small_problems(level):
        pc = constants(p)
        w = pc.minimizer + 0.5 * rng.standard_normal((p.m, p.n))
        idx = rng.integers(0, p.n_components, size=draws)
        mean_grad = _component_gradients(p, w, idx).mean(axis=0)
        gap = frobenius_norm(mean_grad - full_gradient(p, w))
        band = 3.0 * math.sqrt(pc.sigma2 / draws)
        if gap > band:
            return False, f"{p.kind}: gap {gap:.3e} > band {band:.3e}"
    return True, f"3 kinds x {draws} singleton draws"


def check_variance_bound(level: str):
    rng = np.random.default_rng(24)
    batches = _n(level, 4000, 20_000)
    for p in _small_problems(level):
        pc = constants(p)
        w = pc.minimizer + 0.5 * rng.standard_normal((p.m, p.n))
        grad = full_gradient(p, w)
        for b in (1, 8):
            idx = rng.integers(0, p.n_components, size=(batches, b))
            grads = _component_gradients(p, w, idx.ravel()).reshape(batches, b, p.m, p.n)
            d = grads.mean(axis=1) - grad
            emp = float(np.mean(np.sum(d * d, axis=(1, 2))))
            if emp > (pc.sigma2 / b) * 1.05:
                return False, f"{p.kind} b={b}: {emp:.4e} > {pc.sigma2 / b:.4e} * 1.05"
    return True, f"3 kinds, b in (1, 8), {batches} batches"


def _noise_free_run(steps: int, nesterov: bool) -> tuple[ProblemInstance, Trace, float, float]:
    problem = make_problem("quadratic", 1, 8, 4, seed=31)
    cfg = MuonConfig(beta=0.9, nesterov=nesterov, ortho=OrthoMethod("exact_polar"))
    lr = LrSchedule(kind="constant", eta=0.01)
    bs = BsSchedule(kind="constant", b=1)
    w0 = np.zeros((8, 4))
    trace = run(problem, cfg, lr, bs, steps, w0, seed=0)
    pc = constants(problem)
    return problem, trace, pc.L, cfg.beta


def check_update_norm_identity(level: str):
    steps = _n(level, 80, 200)
    for nesterov in (False, True):
        _, trace, _, _ = _noise_free_run(steps, nesterov)
        expected = trace.eta * math.sqrt(4)
        live = ~trace.skipped
        if np.any(np.abs(trace.step_norm[live] - expected[live]) > 1e-9 * expected[live]):
            return False, f"nesterov={nesterov}"
    return True, f"{steps} steps, both momentum modes"


def check_per_step_progress(level: str):
    steps = _n(level, 80, 200)
    n = 4
    for nesterov in (False, True):
        _, trace, L, _ = _noise_free_run(steps, nesterov)
        losses = np.append(trace.loss, trace.final_loss)
        for t in range(steps):
            eta = trace.eta[t]
            lhs = losses[t] - losses[t + 1]
            rhs = (
                eta * trace.grad_norm[t]
                - 2.0 * math.sqrt(n) * eta * trace.nesterov_gap[t]
                - 0.5 * n * L * eta**2
            )
            if lhs < rhs - 1e-9:
                return False, f"nesterov={nesterov} step {t}"
    return True, f"{steps} steps, both momentum modes"


def _gap_recursion_bound(trace: Trace, L: float, beta: float, n: int) -> np.ndarray:
    """beta^t * gap0 + L sqrt(n) * sum_{i=1..t} beta^i eta_{t-i}, per step."""
    steps = len(trace)
    out = np.empty(steps)
    u = 0.0
    for t in range(steps):
        if t > 0:
            u = beta * (trace.eta[t - 1] + u)
        out[t] = beta**t * trace.momentum_gap[0] + L * math.sqrt(n) * u
    return out


def check_momentum_gap_recursion(level: str):
    steps = _n(level, 80, 200)
    _, trace, L, beta = _noise_free_run(steps, nesterov=False)
    bound = _gap_recursion_bound(trace, L, beta, 4)
    ok = np.all(trace.momentum_gap <= bound + 1e-9)
    return bool(ok), f"{steps} noise-free steps"


def check_blend_gap_recursion(level: str):
    steps = _n(level, 80, 200)
    _, trace, L, beta = _noise_free_run(steps, nesterov=True)
    plain = _gap_recursion_bound(trace, L, beta, 4)
    # with the Nesterov blend the noise-free bound is beta times the plain one
    ok = np.all(trace.nesterov_gap <= beta * plain + 1e-9)
    return bool(ok), f"{steps} noise-free steps"


def check_direction_invariance(level: str):
    rng = np.random.default_rng(32)
    cfg = MuonConfig(beta=0.0, nesterov=False)
    for i in range(10):
        w = rng.standard_normal((6, 3))
        g = rng.standard_normal((6, 3))
        state = MuonState(t=0, w=w, m_prev=np.zeros_like(w))
        base, _ = muon_step(state, cfg, g, 0.05)
        for alpha in (0.01, 3.0, 250.0):
            scaled, _ = muon_step(state, cfg, alpha * g, 0.05)
            if frobenius_norm(scaled.w - base.w) > 1e-9:
                return False, f"case {i} alpha {alpha}"
    return True, "10 states x 3 gradient scales"


def _random_schedule_pair(rng, steps: int) -> tuple[LrSchedule, BsSchedule]:
    lr_kind = rng.choice(["constant", "cosine", "polynomial", "diminishing"])
    eta = float(rng.uniform(0.001, 0.5))
    lr = LrSchedule(
        kind=str(lr_kind),
        eta=eta,
        p=float(rng.uniform(0.5, 3.0)) if lr_kind == "polynomial" else None,
        a=float(rng.uniform(0.25, 1.0)) if lr_kind == "diminishing" else 0.5,
        horizon=steps if lr_kind in ("cosine", "polynomial") else None,
    )
    bs_kind = rng.choice(["constant", "exponential"])
    bs = BsSchedule(
        kind=str(bs_kind),
        b=int(rng.integers(1, 64)),
        delta=float(rng.uniform(1.005, 1.5)) if bs_kind == "exponential" else None,
    )
    return lr, bs


def check_recursion_vs_reference(level: str):
    rng = np.random.default_rng(33)
    c, ref = reference_bound_constants()
    steps = _n(level, 200, 1000)
    pairs = _n(level, 3, 10)
    for i in range(pairs):
        lr, bs = _random_schedule_pair(rng, steps)
        beta = float(rng.uniform(0.0, 0.99))
        etas = lr_sequence(lr, steps)
        isb = 1.0 / np.sqrt(bs_real_sequence(bs, steps))
        for nesterov in (False, True):
            fast = bound_terms(c, etas, isb, beta, nesterov)
            slow = bound_terms_reference(c, etas, isb, beta, nesterov)
            for a, b in zip(fast.terms(), slow.terms()):
                if abs(a - b) > 1e-12 * max(1.0, abs(b)):
                    return False, f"pair {i} nesterov={nesterov}"
    return True, f"{pairs} schedule pairs at T={steps}"


def check_dominance(level: str):
    c, ref = reference_bound_constants()
    grid = (16, 64) if level == "fast" else (16, 64, 256, 1024)
    beta = ref["beta"]
    for lr_kind in ("constant", "cosine", "polynomial", "diminishing"):
        for bs_kind in ("constant", "exponential"):
            for nesterov in (False, True):
                for steps in grid:
                    lr, bs = _make_schedules(lr_kind, bs_kind, steps)
                    exact = evaluate_bound(c, lr, bs, beta, steps, nesterov).total
                    cf = closed_form_bound(
                        c, lr_kind, bs_kind, beta, steps, nesterov,
                        eta=ref["eta"], b=ref["b"], delta=ref["delta"], p=ref["p"],
                    ).value
                    if exact > cf * (1.0 + 1e-9):
                        return (
                            False,
                            f"{lr_kind}/{bs_kind} nesterov={nesterov} T={steps}: "
                            f"{exact:.6e} > {cf:.6e}",
                        )
    return True, f"8 pairings x 2 momentum modes x T in {grid}"


def check_nesterov_shift(level: str):
    c, ref = reference_bound_constants()
    steps = _n(level, 64, 256)
    beta = ref["beta"]
    for lr_kind, bs_kind in (("constant", "constant"), ("cosine", "exponential")):
        lr, bs = _make_schedules(lr_kind, bs_kind, steps)
        etas = lr_sequence(lr, steps)
        isb = 1.0 / np.sqrt(bs_real_sequence(bs, steps))
        plain = bound_terms(c, etas, isb, beta, False)
        nes = bound_terms(c, etas, isb, beta, True)
        if not nesterov_shift_holds(plain, nes, beta, etas, isb, c.c6):
            return False, f"{lr_kind}/{bs_kind}"
    return True, "2 pairings"


def check_monotone_in_batch(level: str):
    c, ref = reference_bound_constants()
    steps = _n(level, 64, 256)
    lr, _ = _make_schedules("constant", "constant", steps)
    prev = math.inf
    for b in (1, 2, 4, 16, 64, 256):
        bs = BsSchedule(kind="constant", b=b)
        total = evaluate_bound(c, lr, bs, ref["beta"], steps, False).total
        if total > prev * (1.0 + 1e-12):
            return False, f"total increased at b={b}"
        prev = total
    return True, "b in (1..256)"


def check_monotone_in_sigma(level: str):
    _, ref = reference_bound_constants()
    steps = _n(level, 64, 256)
    lr, bs = _make_schedules("constant", "constant", steps)
    prev = -math.inf
    for sigma in (0.0, 0.5, 1.0, 2.0, 8.0):
        noise = 2.0 * (1.0 - ref["beta"]) * sigma * math.sqrt(4)
        c = BoundConstants(c1=1.0, c2=2.0, c3=0.5, c4=8.0, c5=noise, c6=noise)
        total = evaluate_bound(c, lr, bs, ref["beta"], steps, True).total
        if total < prev * (1.0 - 1e-12):
            return False, f"total decreased at sigma={sigma}"
        prev = total
    return True, "sigma in (0..8)"


def _empirical_config(level: str, output_dir: str = "unused") -> ExperimentConfig:
    if level == "fast":
        problem = ProblemSpec(kind="quadratic", n_components=64, m=6, n=3, seed=7)
        steps, replicas = 60, 4
    else:
        problem = ProblemSpec(kind="quadratic", n_components=256, m=8, n=4, seed=7)
        steps, replicas = 500, 32
    return ExperimentConfig(
        problem=problem,
        optimizer=MuonConfig(beta=0.9, nesterov=False),
        lr=LrSchedule(kind="constant", eta=0.01),
        bs=BsSchedule(kind="constant", b=16),
        steps=steps,
        replicas=replicas,
        base_seed=1234,
        output_dir=output_dir,
    )


def check_empirical_validity(level: str):
    report = run_experiment(_empirical_config(level), write=False)
    ok = report.flags["empirical_min_le_bound"]
    detail = (
        f"min-of-mean {report.min_of_mean:.4e} vs bound {report.bound_realized.total:.4e}"
    )
    return bool(ok), detail


def check_rate_slopes(level: str):
    problem = ProblemSpec(
        kind=_REF["kind"], n_components=_REF["n_components"], m=_REF["m"], n=_REF["n"],
        seed=_REF["seed"],
    )
    opt = MuonConfig(beta=_REF["beta"], nesterov=False)
    top = 2**8 if level == "fast" else 2**12
    grid = [2**k for k in range(4, int(math.log2(top)) + 1)]
    windows = {"R1": (-0.55, -0.45), "R2": (-1.05, -0.95), "R3": (-1.05, -0.95)}
    for coupling, (lo, hi) in windows.items():
        res = run_sweep(problem, opt, coupling, grid)
        if not (lo <= res.slope <= hi):
            return False, f"{coupling} slope {res.slope:.3f} outside [{lo}, {hi}]"
    for coupling in ("R4", "R5"):
        res = run_sweep(problem, opt, coupling, grid)
        if abs(res.flatness_slope) > 0.1:
            return False, f"{coupling} normalized slope {res.flatness_slope:.3f} not flat"
    return True, f"R1-R5 over T in [16, {top}]"


def check_reproducibility(level: str):
    base = _empirical_config("fast")
    with tempfile.TemporaryDirectory() as tmp:
        dirs = [Path(tmp) / "a", Path(tmp) / "b"]
        for d in dirs:
            cfg = ExperimentConfig(
                problem=base.problem, optimizer=base.optimizer, lr=base.lr, bs=base.bs,
                steps=20, replicas=2, base_seed=5, output_dir=str(d),
            )
            run_experiment(cfg, write=True)
        names = sorted(p.name for p in dirs[0].iterdir())
        if names != sorted(p.name for p in dirs[1].iterdir()):
            return False, "artifact listings differ"
        _, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
        if mismatch or errors:
            return False, f"differing files: {mismatch + errors}"
    return True, f"{len(names)} artifacts byte-identical"


_REQUIRED_CHECKS = (
    "matrix.norm_sandwich",
    "matrix.triangle_inequality",
    "matrix.cauchy_schwarz",
    "ortho.nuclear_identity",
    "ortho.maximality",
    "ortho.scale_equivariance",
    "schedule.cosine_monotone",
    "schedule.diminishing_sum_bracket",
    "schedule.cosine_sum_identity",
    "problem.smoothness",
    "problem.descent_lemma",
    "problem.unbiasedness",
    "problem.variance_bound",
    "muon.update_norm_identity",
    "muon.per_step_progress",
    "muon.momentum_gap_recursion",
    "muon.blend_gap_recursion",
    "muon.direction_invariance",
    "bounds.recursion_vs_reference",
    "bounds.dominance",
    "bounds.nesterov_shift",
    "bounds.monotone_in_batch",
    "bounds.monotone_in_sigma",
    "bounds.empirical_validity",
    "sweep.rate_slopes",
    "harness.reproducibility",
)


def check_report_completeness(level: str):
    names = [name for name, _ in CHECKS]
    missing = [n for n in _REQUIRED_CHECKS if names.count(n) != 1]
    if missing:
        return False, f"missing or duplicated: {missing}"
    return True, f"{len(_REQUIRED_CHECKS)} required checks present exactly once"


CHECKS = [
    ("matrix.norm_sandwich", check_norm_sandwich),
    ("matrix.triangle_inequality", check_triangle_inequality),
    ("matrix.cauchy_schwarz", check_cauchy_schwarz),
    ("ortho.nuclear_identity", check_nuclear_identity),
    ("ortho.maximality", check_maximality),
    ("ortho.scale_equivariance", check_scale_equivariance),
    ("ortho.newton_schulz_agreement", check_newton_schulz_agreement),
    ("schedule.cosine_monotone", check_cosine_monotone),
    ("schedule.diminishing_sum_bracket", check_diminishing_sum_bracket),
    ("schedule.cosine_sum_identity", check_cosine_sum_identity),
    ("problem.smoothness", check_smoothness),
    ("problem.descent_lemma", check_descent_lemma),
    ("problem.unbiasedness", check_unbiasedness),
    ("problem.variance_bound", check_variance_bound),
    ("muon.update_norm_identity", check_update_norm_identity),
    ("muon.per_step_progress", check_per_step_progress),
    ("muon.momentum_gap_recursion", check_momentum_gap_recursion),
    ("muon.blend_gap_recursion", check_blend_gap_recursion),
    ("muon.direction_invariance", check_direction_invariance),
    ("bounds.recursion_vs_reference", check_recursion_vs_reference),
    ("bounds.dominance", check_dominance),
    ("bounds.nesterov_shift", check_nesterov_shift),
    ("bounds.monotone_in_batch", check_monotone_in_batch),
    ("bounds.monotone_in_sigma", check_monotone_in_sigma),
    ("bounds.empirical_validity", check_empirical_validity),
    ("sweep.rate_slopes", check_rate_slopes),
    ("harness.reproducibility", check_reproducibility),
    ("harness.report_completeness", check_report_completeness),
]


def verify_suite(level: str = "fast") -> VerifyReport:
    """Run every check at the given level ("fast" or "full")."""
    if level not in ("fast", "full"):
        raise ValueError(f"level must be 'fast' or 'full', got {level!r}")
    results = []
    for name, fn in CHECKS:
        try:
            passed, detail = fn(level)
        except Exception as exc:  # a crashed check is a failed check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name=name, passed=bool(passed), detail=detail))
    return VerifyReport(level=level, results=results)
