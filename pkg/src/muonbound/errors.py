"""Exception types shared across the package."""


class MuonBoundError(Exception):
    """Base class for all muonbound errors."""


class DimensionError(MuonBoundError):
    """Matrix shapes are incompatible with the requested operation."""


class DegenerateInputError(MuonBoundError):
    """Input has no well-defined result (e.g. orthogonalizing a zero matrix)."""


class NumericalError(MuonBoundError):
    """An iterative numerical routine failed to converge."""


class ScheduleIndexError(MuonBoundError, IndexError):
    """Step index lies outside a horizon-bound schedule."""


class InconsistencyError(MuonBoundError):
    """Supplied values contradict a certified constant (e.g. f(w0) < f*)."""


class ConfigError(MuonBoundError):
    """Experiment configuration is malformed or contains unknown keys."""
