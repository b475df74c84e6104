"""Step-indexed learning-rate and batch-size schedules.

Four learning-rate shapes (constant, cosine-annealing, polynomial decay,
diminishing) and two batch-size shapes (constant, exponentially growing).
Every schedule can tick per step or per epoch; under epoch granularity the
step index is floored to the epoch index and the horizon counts epochs.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from .errors import ScheduleIndexError

LR_KINDS = ("constant", "cosine", "polynomial", "diminishing")
BS_KINDS = ("constant", "exponential")
GRANULARITIES = ("step", "epoch")

_LOG_FLOAT_MAX = math.log(sys.float_info.max)


def _validate_granularity(granularity: str, steps_per_epoch: int) -> None:
    if granularity not in GRANULARITIES:
        raise ValueError(f"granularity must be one of {GRANULARITIES}, got {granularity!r}")
    if steps_per_epoch < 1:
        raise ValueError("steps_per_epoch must be >= 1")


def _tick(granularity: str, steps_per_epoch: int, t: int) -> int:
    if t < 0:
        raise ScheduleIndexError(f"step index must be >= 0, got {t}")
    return t if granularity == "step" else t // steps_per_epoch


@dataclass(frozen=True)
class LrSchedule:
    """Declarative learning-rate schedule.

    ``eta`` is the peak rate; every emitted rate lies in [0, eta].
    ``horizon`` is required for the cosine and polynomial kinds and counts
    steps (or epochs, under epoch granularity).
    """

    kind: str
    eta: float
    p: float | None = None  # polynomial decay power
    a: float = 0.5  # diminishing power, in (0, 1]
    horizon: int | None = None
    granularity: str = "step"
    steps_per_epoch: int = 1

    def __post_init__(self):
        if self.kind not in LR_KINDS:
            raise ValueError(f"lr kind must be one of {LR_KINDS}, got {self.kind!r}")
        if not self.eta > 0.0:
            raise ValueError("eta must be positive")
        if self.kind == "polynomial" and (self.p is None or self.p <= 0.0):
            raise ValueError("polynomial decay requires p > 0")
        if self.kind == "diminishing" and not (0.0 < self.a <= 1.0):
            raise ValueError("diminishing power a must lie in (0, 1]")
        if self.kind in ("cosine", "polynomial") and (self.horizon is None or self.horizon < 1):
            raise ValueError(f"{self.kind} schedule requires horizon >= 1")
        _validate_granularity(self.granularity, self.steps_per_epoch)


def lr_at(s: LrSchedule, t: int) -> float:
    """Learning rate at step ``t``.

    Horizon-bound kinds accept 0 <= tick <= horizon (the boundary value is
    the annealed floor, 0 for polynomial) and raise beyond it.
    """
    tau = _tick(s.granularity, s.steps_per_epoch, t)
    if s.kind == "constant":
        return s.eta
    if s.kind == "diminishing":
        return s.eta / (tau + 1) ** s.a
    if tau > s.horizon:
        raise ScheduleIndexError(f"step {t} (tick {tau}) is past the horizon {s.horizon}")
    if s.kind == "cosine":
        return 0.5 * s.eta * (1.0 + math.cos(tau * math.pi / s.horizon))
    return s.eta * (1.0 - tau / s.horizon) ** s.p


@dataclass(frozen=True)
class BsSchedule:
    """Declarative batch-size schedule.

    Exponential growth is ``b * delta**tick`` rounded to the nearest
    integer; an optional ``cap`` (typically the dataset size) clips it.
    """

    kind: str
    b: int
    delta: float | None = None  # growth factor, > 1 (exponential only)
    cap: int | None = None
    granularity: str = "step"
    steps_per_epoch: int = 1

    def __post_init__(self):
        if self.kind not in BS_KINDS:
            raise ValueError(f"bs kind must be one of {BS_KINDS}, got {self.kind!r}")
        if self.b < 1:
            raise ValueError("base batch size b must be >= 1")
        if self.kind == "exponential" and (self.delta is None or self.delta <= 1.0):
            raise ValueError("exponential growth requires delta > 1")
        if self.cap is not None and self.cap < 1:
            raise ValueError("cap must be >= 1")
        _validate_granularity(self.granularity, self.steps_per_epoch)


def bs_real_at(s: BsSchedule, t: int) -> float:
    """Batch size at step ``t`` as the mathematical real value (no rounding).

    This is what the bound evaluators consume.  Growth past the float range
    returns ``inf`` (its inverse square root is exactly 0).
    """
    tau = _tick(s.granularity, s.steps_per_epoch, t)
    if s.kind == "constant":
        value = float(s.b)
    else:
        log_value = math.log(s.b) + tau * math.log(s.delta)
        value = math.inf if log_value > _LOG_FLOAT_MAX else s.b * s.delta**tau
    if s.cap is not None:
        value = min(value, float(s.cap))
    return value


def bs_at(s: BsSchedule, t: int) -> int:
    """Integer batch size at step ``t``: nearest-rounded and capped.

    Sizes past 2**62 cannot be sampled and raise; evaluate such schedules
    through ``bs_real_at`` instead (or set a cap).
    """
    value = bs_real_at(s, t)
    if value > 2**62:
        raise OverflowError(
            "exponential batch size exceeds the supported integer range; "
            "set a cap to sample it"
        )
    return int(round(value))


def lr_sequence(s: LrSchedule, steps: int) -> np.ndarray:
    """Rates for t = 0 .. steps-1 as a float64 array."""
    return np.array([lr_at(s, t) for t in range(steps)], dtype=np.float64)


def bs_real_sequence(s: BsSchedule, steps: int) -> np.ndarray:
    """Real-valued sizes for t = 0 .. steps-1."""
    return np.array([bs_real_at(s, t) for t in range(steps)], dtype=np.float64)


def bs_sequence(s: BsSchedule, steps: int) -> np.ndarray:
    """Integer sizes for t = 0 .. steps-1."""
    return np.array([bs_at(s, t) for t in range(steps)], dtype=np.int64)
