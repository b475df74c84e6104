"""Declarative experiment configuration (TOML).

The file has five required sections -- [problem], [optimizer], [lr], [bs],
[run] -- plus an optional [sweep] section.  Unknown sections or keys are
errors so that a typoed hyperparameter name cannot silently fall back to a
default.  The full schema is documented in the README.
"""

from __future__ import annotations

from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigError
from .experiment import ExperimentConfig, ProblemSpec, SweepSpec
from .muon import MuonConfig
from .orthogonal import OrthoMethod
from .schedules import BsSchedule, LrSchedule

_SCHEMA = {
    "problem": {"kind", "n_components", "m", "n", "seed", "spread", "k_rows"},
    "optimizer": {"beta", "nesterov", "ortho", "ns_iterations"},
    "lr": {"kind", "eta", "p", "a", "horizon", "granularity", "steps_per_epoch"},
    "bs": {"kind", "b", "delta", "cap", "granularity", "steps_per_epoch"},
    "run": {"steps", "replicas", "base_seed", "output_dir", "w0", "w0_scale", "w0_seed"},
    "sweep": {"eta0", "b0", "delta", "c1", "m0_gap"},
}
_REQUIRED_SECTIONS = ("problem", "optimizer", "lr", "bs", "run")


def _check_keys(section: str, table: dict) -> None:
    unknown = set(table) - _SCHEMA[section]
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")


def _require(section: str, table: dict, key: str):
    if key not in table:
        raise ConfigError(f"missing required key {key!r} in [{section}]")
    return table[key]


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML experiment config."""
    raw = Path(path).read_bytes()
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc

    unknown_sections = set(doc) - set(_SCHEMA)
    if unknown_sections:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown_sections))}")
    for section in _REQUIRED_SECTIONS:
        if section not in doc:
            raise ConfigError(f"missing required section [{section}]")
        if not isinstance(doc[section], dict):
            raise ConfigError(f"[{section}] must be a table")
        _check_keys(section, doc[section])
    if "sweep" in doc:
        _check_keys("sweep", doc["sweep"])

    try:
        return _build(doc)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _build(doc: dict) -> ExperimentConfig:
    prob = doc["problem"]
    problem = ProblemSpec(
        kind=str(_require("problem", prob, "kind")),
        n_components=int(_require("problem", prob, "n_components")),
        m=int(_require("problem", prob, "m")),
        n=int(_require("problem", prob, "n")),
        seed=int(_require("problem", prob, "seed")),
        spread=float(prob.get("spread", 1.0)),
        k_rows=int(prob["k_rows"]) if "k_rows" in prob else None,
    )

    opt = doc["optimizer"]
    ortho = OrthoMethod(
        kind=str(opt.get("ortho", "exact_polar")),
        ns_iterations=int(opt.get("ns_iterations", 30)),
    )
    optimizer = MuonConfig(
        beta=float(_require("optimizer", opt, "beta")),
        nesterov=bool(opt.get("nesterov", False)),
        ortho=ortho,
    )

    run_tbl = doc["run"]
    steps = int(_require("run", run_tbl, "steps"))

    lr_tbl = doc["lr"]
    lr_kind = str(_require("lr", lr_tbl, "kind"))
    horizon = int(lr_tbl["horizon"]) if "horizon" in lr_tbl else None
    if horizon is None and lr_kind in ("cosine", "polynomial"):
        horizon = steps  # anneal over the whole run unless told otherwise
    lr = LrSchedule(
        kind=lr_kind,
        eta=float(_require("lr", lr_tbl, "eta")),
        p=float(lr_tbl["p"]) if "p" in lr_tbl else None,
        a=float(lr_tbl.get("a", 0.5)),
        horizon=horizon,
        granularity=str(lr_tbl.get("granularity", "step")),
        steps_per_epoch=int(lr_tbl.get("steps_per_epoch", 1)),
    )

    bs_tbl = doc["bs"]
    bs_kind = str(_require("bs", bs_tbl, "kind"))
    cap = int(bs_tbl["cap"]) if "cap" in bs_tbl else None
    if cap is None and bs_kind == "exponential":
        cap = problem.n_components  # growth beyond the dataset size is wasted
    bs = BsSchedule(
        kind=bs_kind,
        b=int(_require("bs", bs_tbl, "b")),
        delta=float(bs_tbl["delta"]) if "delta" in bs_tbl else None,
        cap=cap,
        granularity=str(bs_tbl.get("granularity", "step")),
        steps_per_epoch=int(bs_tbl.get("steps_per_epoch", 1)),
    )

    return ExperimentConfig(
        problem=problem,
        optimizer=optimizer,
        lr=lr,
        bs=bs,
        steps=steps,
        replicas=int(run_tbl.get("replicas", 1)),
        base_seed=int(run_tbl.get("base_seed", 0)),
        output_dir=str(run_tbl.get("output_dir", "out")),
        w0_kind=str(run_tbl.get("w0", "zeros")),
        w0_scale=float(run_tbl.get("w0_scale", 1.0)),
        w0_seed=int(run_tbl.get("w0_seed", 0)),
    )


def load_sweep_spec(path) -> SweepSpec:
    """Read the optional [sweep] overrides from a config file."""
    raw = Path(path).read_bytes()
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    tbl = doc.get("sweep", {})
    if not isinstance(tbl, dict):
        raise ConfigError("[sweep] must be a table")
    _check_keys("sweep", tbl)
    try:
        return SweepSpec(
            eta0=float(tbl["eta0"]) if "eta0" in tbl else None,
            b0=float(tbl["b0"]) if "b0" in tbl else None,
            delta=float(tbl["delta"]) if "delta" in tbl else None,
            c1=float(tbl.get("c1", 0.0)),
            m0_gap=float(tbl.get("m0_gap", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
