"""Muon optimizer with orthogonalized momentum, plus exact evaluation and
Monte Carlo verification of its convergence bounds on synthetic finite-sum
problems with certified constants."""

from .bounds import (
    BoundConstants,
    BoundTerms,
    ClosedFormBound,
    apriori_momentum_gap,
    bound_constants,
    bound_terms,
    bound_terms_reference,
    closed_form_bound,
    evaluate_bound,
    slope_estimate,
)
from .errors import (
    ConfigError,
    DegenerateInputError,
    DimensionError,
    InconsistencyError,
    MuonBoundError,
    NumericalError,
    ScheduleIndexError,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    ProblemSpec,
    SweepResult,
    SweepSpec,
    run_experiment,
    run_sweep,
)
from .linalg import (
    SvdFactors,
    frobenius_inner,
    frobenius_norm,
    matrix_rank,
    nuclear_norm,
    spectral_norm,
    svd,
)
from .muon import MuonConfig, MuonState, Trace, init_state, muon_step, run
from .orthogonal import (
    OrthoMethod,
    newton_schulz,
    orthogonality_defect,
    orthogonalize,
    polar_factor_exact,
)
from .problems import (
    ProblemConstants,
    ProblemInstance,
    constants,
    full_gradient,
    loss,
    make_problem,
    minibatch_gradient,
    sample_batch,
    single_sample_variance,
)
from .schedules import (
    BsSchedule,
    LrSchedule,
    bs_at,
    bs_real_at,
    bs_real_sequence,
    bs_sequence,
    lr_at,
    lr_sequence,
)
from .verify import VerifyReport, verify_suite

__version__ = "0.1.0"

__all__ = [
    "BoundConstants",
    "BoundTerms",
    "BsSchedule",
    "ClosedFormBound",
    "ConfigError",
    "DegenerateInputError",
    "DimensionError",
    "ExperimentConfig",
    "ExperimentReport",
    "InconsistencyError",
    "LrSchedule",
    "MuonBoundError",
    "MuonConfig",
    "MuonState",
    "NumericalError",
    "OrthoMethod",
    "ProblemConstants",
    "ProblemInstance",
    "ProblemSpec",
    "ScheduleIndexError",
    "SvdFactors",
    "SweepResult",
    "SweepSpec",
    "Trace",
    "VerifyReport",
    "apriori_momentum_gap",
    "bound_constants",
    "bound_terms",
    "bound_terms_reference",
    "bs_at",
    "bs_real_at",
    "bs_real_sequence",
    "bs_sequence",
    "closed_form_bound",
    "constants",
    "evaluate_bound",
    "frobenius_inner",
    "frobenius_norm",
    "full_gradient",
    "init_state",
    "loss",
    "lr_at",
    "lr_sequence",
    "make_problem",
    "matrix_rank",
    "minibatch_gradient",
    "muon_step",
    "newton_schulz",
    "nuclear_norm",
    "orthogonality_defect",
    "orthogonalize",
    "polar_factor_exact",
    "run",
    "run_experiment",
    "run_sweep",
    "sample_batch",
    "single_sample_variance",
    "slope_estimate",
    "spectral_norm",
    "svd",
    "verify_suite",
]
