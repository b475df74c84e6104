"""Command-line front end.

Subcommands:

* ``run <config>``    -- Monte Carlo replicas, CSV traces + JSON report.
* ``verify``          -- built-in check suite (``--fast`` default, ``--full``).
* ``bounds <config>`` -- bound evaluation only, no simulation; JSON to stdout.
* ``sweep <config> --coupling R1..R5 [--tmin --tmax]`` -- closed-form bound
  over a doubling grid of horizons, CSV + fitted slope.

Exit codes: 0 success, 1 check failure, 2 configuration error.  The
``MUONBOUND_WORKERS`` environment variable caps concurrent replicas.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .bounds import apriori_momentum_gap, bound_constants, bound_terms
from .config import load_config, load_sweep_spec
from .errors import ConfigError, MuonBoundError
from .experiment import (
    COUPLINGS,
    applicable_closed_forms,
    initial_iterate,
    run_experiment,
    run_sweep,
    terms_dict,
)
from .problems import constants, full_gradient, loss
from .schedules import bs_at, lr_sequence, bs_sequence
from .verify import verify_suite


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    report = run_experiment(cfg, write=True)
    out = Path(cfg.output_dir)
    print(f"wrote {cfg.replicas} trace file(s) and report.json to {out}")
    print(f"min over t of replica-mean grad norm: {report.min_of_mean:.6e} "
          f"at t={report.argmin_of_mean}")
    print(f"bound total (realized m0 gap): {report.bound_realized.total:.6e}")
    failures = 0
    for name, ok in sorted(report.flags.items()):
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1
    return 1 if failures else 0


def _cmd_verify(args) -> int:
    level = "full" if args.full else "fast"
    report = verify_suite(level)
    for line in report.summary_lines():
        print(line)
    return 0 if report.passed else 1


def _cmd_bounds(args) -> int:
    cfg = load_config(args.config)
    problem = cfg.problem.build()
    pc = constants(problem)
    w0 = initial_iterate(cfg, pc)
    f_w0 = loss(problem, w0)
    grad0 = float(np.linalg.norm(full_gradient(problem, w0), "fro"))
    m0 = apriori_momentum_gap(grad0, math.sqrt(pc.sigma2), cfg.optimizer.beta,
                              bs_at(cfg.bs, 0))
    c = bound_constants(pc, f_w0, m0, cfg.optimizer.beta, problem.n)
    etas = lr_sequence(cfg.lr, cfg.steps)
    inv_sqrt_b = 1.0 / np.sqrt(bs_sequence(cfg.bs, cfg.steps).astype(float))
    terms = bound_terms(c, etas, inv_sqrt_b, cfg.optimizer.beta, cfg.optimizer.nesterov)
    closed = applicable_closed_forms(
        c, cfg.lr, cfg.bs, cfg.optimizer.beta, cfg.steps, cfg.optimizer.nesterov
    )
    doc = {
        "constants": {
            "L": pc.L,
            "sigma2": pc.sigma2,
            "f_star": pc.f_star,
            "f_w0": f_w0,
            "grad0_norm": grad0,
            "m0_gap_apriori": m0,
        },
        "bound": terms_dict(terms),
        "closed_form": closed,
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    spec = load_sweep_spec(args.config)
    if args.tmin < 2 or args.tmax < args.tmin:
        raise ConfigError("need 2 <= tmin <= tmax")
    grid = []
    t = args.tmin
    while t <= args.tmax:
        grid.append(t)
        t *= 2
    result = run_sweep(cfg.problem, cfg.optimizer, args.coupling, grid, spec)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"sweep_{args.coupling}.csv"
    result.write_csv(csv_path)
    print(f"wrote {csv_path}")
    for t, v in result.rows:
        print(f"T={t:>6d}  bound={v:.6e}")
    print(f"log-log slope: {result.slope:.4f}")
    if result.flatness_slope is not None:
        print(f"slope of bound*sqrt(T)/log(T): {result.flatness_slope:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muonbound",
        description="Muon optimizer experiments and convergence-bound checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run Monte Carlo replicas from a config file")
    p_run.add_argument("config", help="path to a TOML experiment config")
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="run the built-in verification suite")
    mode = p_verify.add_mutually_exclusive_group()
    mode.add_argument("--fast", action="store_true", help="reduced grids (default)")
    mode.add_argument("--full", action="store_true", help="acceptance-criteria grids")
    p_verify.set_defaults(func=_cmd_verify)

    p_bounds = sub.add_parser("bounds", help="evaluate bounds only, no simulation")
    p_bounds.add_argument("config")
    p_bounds.set_defaults(func=_cmd_bounds)

    p_sweep = sub.add_parser("sweep", help="closed-form bound over a grid of horizons")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--coupling", required=True, choices=COUPLINGS)
    p_sweep.add_argument("--tmin", type=int, default=16)
    p_sweep.add_argument("--tmax", type=int, default=4096)
    p_sweep.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        code = 2
    except (MuonBoundError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 1
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()
