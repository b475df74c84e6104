"""Monte Carlo experiment runner and bound-sweep driver.

``run_experiment`` executes independent replicas of a Muon run (seeds
``base_seed + r``), writes one CSV trace per replica plus a JSON report,
and checks the run-level invariants: the empirical min-over-steps of the
replica-mean gradient norm must not exceed the evaluated bound, each
non-skipped update must have norm eta_t * sqrt(n), and the singleton
gradient variance probed along the visited iterates must stay within the
certified sigma^2.

``run_sweep`` evaluates closed-form bounds on a grid of horizons T under
one of five learning-rate / batch-size couplings and fits the log-log
slope.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .bounds import (
    BoundConstants,
    BoundTerms,
    apriori_momentum_gap,
    bound_constants,
    bound_terms,
    closed_form_bound,
    slope_estimate,
)
from .errors import ConfigError
from .muon import MuonConfig, Trace, run
from .problems import ProblemConstants, ProblemInstance, constants, full_gradient, loss, make_problem
from .schedules import BsSchedule, LrSchedule, bs_at, lr_sequence

WORKERS_ENV_VAR = "MUONBOUND_WORKERS"

TRACE_COLUMNS = (
    "t",
    "eta",
    "b",
    "loss",
    "grad_norm",
    "momentum_gap",
    "nesterov_gap",
    "ortho_defect",
)

COUPLINGS = ("R1", "R2", "R3", "R4", "R5")

# Default coupling constants for the sweeps.  The diminishing-rate rows use
# a larger peak rate and base batch so the log(T)/sqrt(T) shape dominates
# the noise tail on desk-scale grids.
SWEEP_DEFAULTS = {
    "R1": {"eta0": 0.01, "b0": 1.0, "delta": 2.0},
    "R2": {"eta0": 0.01, "b0": 1.0, "delta": 2.0},
    "R3": {"eta0": 0.01, "b0": 16.0, "delta": 2.0},
    "R4": {"eta0": 0.1, "b0": 64.0, "delta": 2.0},
    "R5": {"eta0": 0.1, "b0": 64.0, "delta": 2.0},
}


@dataclass(frozen=True)
class ProblemSpec:
    kind: str
    n_components: int
    m: int
    n: int
    seed: int
    spread: float = 1.0
    k_rows: int | None = None

    def build(self) -> ProblemInstance:
        return make_problem(
            self.kind, self.n_components, self.m, self.n, self.seed,
            spread=self.spread, k_rows=self.k_rows,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemSpec
    optimizer: MuonConfig
    lr: LrSchedule
    bs: BsSchedule
    steps: int
    replicas: int = 1
    base_seed: int = 0
    output_dir: str = "out"
    w0_kind: str = "zeros"  # "zeros" | "gaussian" | "minimizer"
    w0_scale: float = 1.0
    w0_seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError("run.steps must be >= 1")
        if self.replicas < 1:
            raise ConfigError("run.replicas must be >= 1")
        if self.w0_kind not in ("zeros", "gaussian", "minimizer"):
            raise ConfigError(f"unknown w0 kind {self.w0_kind!r}")


def initial_iterate(cfg: ExperimentConfig, pc: ProblemConstants) -> np.ndarray:
    shape = (cfg.problem.m, cfg.problem.n)
    if cfg.w0_kind == "zeros":
        return np.zeros(shape)
    if cfg.w0_kind == "gaussian":
        rng = np.random.default_rng(cfg.w0_seed)
        return cfg.w0_scale * rng.standard_normal(shape)
    if pc.minimizer is None:
        raise ConfigError("problem has no computed minimizer to start from")
    return pc.minimizer.copy()


def _replica_task(args) -> Trace:
    problem, opt, lr, bs, steps, w0, seed = args
    return run(problem, opt, lr, bs, steps, w0, seed)


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR, "1")
    try:
        workers = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV_VAR} must be an integer, got {raw!r}") from exc
    return max(1, workers)


@dataclass
class ExperimentReport:
    config: dict
    constants_used: dict
    per_replica_min: list[float]
    per_replica_argmin: list[int]
    mean_curve: list[float]
    min_of_mean: float
    argmin_of_mean: int
    mean_of_min: float
    bound_realized: BoundTerms
    bound_apriori: BoundTerms
    closed_form: dict
    flags: dict
    diagnostics: dict

    def to_dict(self) -> dict:
        out = {
            "config": self.config,
            "constants": self.constants_used,
            "per_replica": {
                "min_grad_norm": self.per_replica_min,
                "argmin_step": self.per_replica_argmin,
            },
            "mean_grad_norm_curve": self.mean_curve,
            "min_of_mean": self.min_of_mean,
            "argmin_of_mean": self.argmin_of_mean,
            "mean_of_min": self.mean_of_min,
            "bound": {
                "realized_m0": terms_dict(self.bound_realized),
                "apriori_m0": terms_dict(self.bound_apriori),
            },
            "closed_form": self.closed_form,
            "flags": self.flags,
            "diagnostics": self.diagnostics,
        }
        return out


def terms_dict(terms: BoundTerms) -> dict:
    d = {
        "term1": terms.term1,
        "term2": terms.term2,
        "term3": terms.term3,
        "term4": terms.term4,
        "term5": terms.term5,
        "total": terms.total,
        "nesterov": terms.nesterov,
    }
    if terms.term6 is not None:
        d["term6"] = terms.term6
    return d


def _constants_dict(c: BoundConstants) -> dict:
    return {k: float(v) for k, v in asdict(c).items()}


def applicable_closed_forms(
    c: BoundConstants,
    lr: LrSchedule,
    bs: BsSchedule,
    beta: float,
    steps: int,
    nesterov: bool,
) -> dict:
    """Closed-form values matching the configured schedule pairing.

    The simple diminishing form requires a = 1/2; for other powers only
    the derived-bracket form is reported.  Closed forms always assume the
    mathematical (uncapped) batch schedule.
    """
    kwargs = dict(eta=lr.eta, b=float(bs.b), delta=bs.delta, p=lr.p)
    out: dict = {"simple": None, "derived": None}
    if lr.kind != "diminishing" or math.isclose(lr.a, 0.5, rel_tol=0.0, abs_tol=1e-12):
        cf = closed_form_bound(c, lr.kind, bs.kind, beta, steps, nesterov, a=lr.a, **kwargs)
        out["simple"] = {
            "lr_kind": cf.lr_kind,
            "bs_kind": cf.bs_kind,
            "value": cf.value,
            "d_constants": cf.d_constants,
        }
    if lr.kind == "diminishing" and steps >= 2:
        cf = closed_form_bound(
            c, lr.kind, bs.kind, beta, steps, nesterov, a=lr.a, derived_form=True, **kwargs
        )
        out["derived"] = {
            "lr_kind": cf.lr_kind,
            "bs_kind": cf.bs_kind,
            "value": cf.value,
            "d_constants": cf.d_constants,
        }
    if bs.kind == "exponential" and bs.cap is not None:
        out["assumes_uncapped"] = True
    return out


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentReport:
    """Run the configured replicas, aggregate, and (optionally) write
    ``trace_###.csv`` and ``report.json`` under ``cfg.output_dir``."""
    problem = cfg.problem.build()
    pc = constants(problem)
    w0 = initial_iterate(cfg, pc)
    opt = cfg.optimizer
    n = problem.n

    tasks = [
        (problem, opt, cfg.lr, cfg.bs, cfg.steps, w0, cfg.base_seed + r)
        for r in range(cfg.replicas)
    ]
    workers = _worker_count()
    if workers > 1 and cfg.replicas > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_replica_task, tasks))
    else:
        traces = [_replica_task(t) for t in tasks]

    grad = np.stack([tr.grad_norm for tr in traces])  # (replicas, steps)
    mean_curve = grad.mean(axis=0)
    min_of_mean = float(mean_curve.min())
    argmin_of_mean = int(mean_curve.argmin())
    per_min = grad.min(axis=1)
    per_argmin = grad.argmin(axis=1)

    f_w0 = loss(problem, w0)
    grad0_norm = float(np.linalg.norm(full_gradient(problem, w0), "fro"))
    sigma = math.sqrt(pc.sigma2)
    m0_realized = float(np.mean([tr.momentum_gap[0] for tr in traces]))
    m0_apriori = apriori_momentum_gap(grad0_norm, sigma, opt.beta, bs_at(cfg.bs, 0))

    c_realized = bound_constants(pc, f_w0, m0_realized, opt.beta, n)
    c_apriori = bound_constants(pc, f_w0, m0_apriori, opt.beta, n)
    etas = lr_sequence(cfg.lr, cfg.steps)
    inv_sqrt_b = 1.0 / np.sqrt(traces[0].b.astype(np.float64))
    terms_realized = bound_terms(c_realized, etas, inv_sqrt_b, opt.beta, opt.nesterov)
    terms_apriori = bound_terms(c_apriori, etas, inv_sqrt_b, opt.beta, opt.nesterov)

    closed = applicable_closed_forms(c_realized, cfg.lr, cfg.bs, opt.beta, cfg.steps, opt.nesterov)

    update_norm_ok = None
    if opt.ortho.kind == "exact_polar":
        update_norm_ok = True
        for tr in traces:
            expected = tr.eta * math.sqrt(n)
            live = ~tr.skipped
            if np.any(np.abs(tr.step_norm[live] - expected[live]) > 1e-9 * expected[live] + 1e-15):
                update_norm_ok = False
                break

    max_var = max(tr.max_sample_variance for tr in traces)
    skipped_total = int(sum(tr.skipped.sum() for tr in traces))
    flags = {
        "empirical_min_le_bound": bool(min_of_mean <= terms_realized.total),
        "visited_variance_le_sigma2": bool(max_var <= pc.sigma2 + 1e-9),
    }
    if update_norm_ok is not None:
        flags["update_norm_identity"] = update_norm_ok

    report = ExperimentReport(
        config=_config_dict(cfg),
        constants_used={
            "L": pc.L,
            "sigma2": pc.sigma2,
            "f_star": pc.f_star,
            "f_w0": f_w0,
            "grad0_norm": grad0_norm,
            "m0_gap_realized": m0_realized,
            "m0_gap_apriori": m0_apriori,
            "coefficients_realized": _constants_dict(c_realized),
            "coefficients_apriori": _constants_dict(c_apriori),
        },
        per_replica_min=[float(x) for x in per_min],
        per_replica_argmin=[int(x) for x in per_argmin],
        mean_curve=[float(x) for x in mean_curve],
        min_of_mean=min_of_mean,
        argmin_of_mean=argmin_of_mean,
        mean_of_min=float(per_min.mean()),
        bound_realized=terms_realized,
        bound_apriori=terms_apriori,
        closed_form=closed,
        flags=flags,
        diagnostics={
            "zero_direction_steps": skipped_total,
            "max_sample_variance": max_var,
            "max_ortho_defect": float(max(tr.ortho_defect.max() for tr in traces)),
        },
    )
    if write:
        write_artifacts(cfg.output_dir, traces, report)
    return report


def _config_dict(cfg: ExperimentConfig) -> dict:
    return {
        "problem": {k: v for k, v in asdict(cfg.problem).items()},
        "optimizer": {
            "beta": cfg.optimizer.beta,
            "nesterov": cfg.optimizer.nesterov,
            "ortho": cfg.optimizer.ortho.kind,
            "ns_iterations": cfg.optimizer.ortho.ns_iterations,
        },
        "lr": asdict(cfg.lr),
        "bs": asdict(cfg.bs),
        "steps": cfg.steps,
        "replicas": cfg.replicas,
        "base_seed": cfg.base_seed,
        "w0_kind": cfg.w0_kind,
        "w0_scale": cfg.w0_scale,
        "w0_seed": cfg.w0_seed,
    }


def write_artifacts(output_dir: str, traces: list[Trace], report: ExperimentReport) -> None:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    # drop artifacts of earlier runs so a smaller rerun cannot leave a mix
    for stale in out.glob("trace_*.csv"):
        stale.unlink()
    for r, tr in enumerate(traces):
        write_trace_csv(out / f"trace_{r:03d}.csv", tr)
    payload = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    (out / "report.json").write_text(payload)


def write_trace_csv(path, trace: Trace) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for i in range(len(trace)):
            writer.writerow(
                [
                    int(trace.t[i]),
                    repr(float(trace.eta[i])),
                    int(trace.b[i]),
                    repr(float(trace.loss[i])),
                    repr(float(trace.grad_norm[i])),
                    repr(float(trace.momentum_gap[i])),
                    repr(float(trace.nesterov_gap[i])),
                    repr(float(trace.ortho_defect[i])),
                ]
            )


@dataclass(frozen=True)
class SweepSpec:
    """Coupling constants for a bound sweep; None fields fall back to the
    per-coupling defaults.  ``c1`` and ``m0_gap`` default to 0 (start at the
    minimizer with an exact first momentum), which isolates the
    schedule-driven asymptotics the couplings are meant to exhibit."""

    eta0: float | None = None
    b0: float | None = None
    delta: float | None = None
    c1: float = 0.0
    m0_gap: float = 0.0


@dataclass
class SweepResult:
    coupling: str
    rows: list[tuple[int, float]]
    slope: float
    flatness_slope: float | None  # slope of bound * sqrt(T) / log(T); diminishing rows only

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("T", "bound"))
            for t, v in self.rows:
                writer.writerow([int(t), repr(float(v))])


def _coupling_point(coupling: str, spec: SweepSpec, steps: int):
    """(lr_kind, bs_kind, eta, b, delta) for one grid point."""
    if coupling not in COUPLINGS:
        raise ValueError(f"coupling must be one of {COUPLINGS}, got {coupling!r}")
    defaults = SWEEP_DEFAULTS[coupling]
    eta0 = spec.eta0 if spec.eta0 is not None else defaults["eta0"]
    b0 = spec.b0 if spec.b0 is not None else defaults["b0"]
    delta = spec.delta if spec.delta is not None else defaults["delta"]
    if coupling == "R1":
        return "constant", "constant", eta0 / steps, b0 * steps, None
    if coupling == "R2":
        return "constant", "constant", eta0 / steps, b0 * steps**2, None
    if coupling == "R3":
        return "constant", "exponential", eta0 / steps, b0, delta
    if coupling == "R4":
        return "diminishing", "constant", eta0, b0 * steps, None
    if coupling == "R5":
        return "diminishing", "exponential", eta0, b0, delta
    raise ValueError(f"coupling must be one of {COUPLINGS}, got {coupling!r}")


def run_sweep(
    problem_spec: ProblemSpec,
    opt: MuonConfig,
    coupling: str,
    t_grid,
    spec: SweepSpec = SweepSpec(),
) -> SweepResult:
    """Evaluate the coupling's closed-form bound over ``t_grid``."""
    t_grid = [int(t) for t in t_grid]
    if not t_grid or any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("t_grid must be non-empty and strictly increasing")
    problem = problem_spec.build()
    pc = constants(problem)
    c = bound_constants(pc, pc.f_star + spec.c1, spec.m0_gap, opt.beta, problem.n)

    rows = []
    for steps in t_grid:
        lr_kind, bs_kind, eta, b, delta = _coupling_point(coupling, spec, steps)
        cf = closed_form_bound(
            c, lr_kind, bs_kind, opt.beta, steps, opt.nesterov, eta=eta, b=b, delta=delta
        )
        rows.append((steps, cf.value))

    slope = slope_estimate(rows)
    flatness = None
    if coupling in ("R4", "R5"):
        normalized = [(t, v * math.sqrt(t) / math.log(t)) for t, v in rows]
        flatness = slope_estimate(normalized)
    return SweepResult(coupling=coupling, rows=rows, slope=slope, flatness_slope=flatness)
