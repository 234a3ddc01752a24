"""Exception types shared across the package."""


class PostschedError(Exception):
    """Base class for all package-specific errors."""


class NoSignalError(PostschedError):
    """An aggregate that must carry mass is everywhere zero.

    Raised when normalizing an all-zero profile or deriving a schedule from
    an empty or inactive audience; callers fall back to a baseline schedule.
    """


class InsufficientDataError(PostschedError):
    """No in-window observations to estimate a delay distribution from."""


class EmptyHistoryError(PostschedError):
    """A user has never received a reaction, so no weights can be computed."""


class UndefinedMetricError(PostschedError):
    """A similarity metric is undefined for the given inputs
    (zero variance, zero vector, or an empty cohort)."""


class IngestError(PostschedError):
    """Input files violate the canonical format beyond tolerated limits."""


class ConfigError(PostschedError):
    """A run configuration failed validation; the message names the field."""
