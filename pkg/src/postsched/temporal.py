"""Weekly time grid, action profiles, and posting schedules.

Everything in the pipeline is aggregated onto a fixed weekly grid of
equal-width buckets: by default 672 buckets of 15 minutes, running from
Monday 00:00 through Sunday 23:45 in the *user's local time*. Action
profiles are count vectors on that grid; schedules are probability mass
functions over the same buckets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoSignalError

WEEK_SECONDS = 7 * 24 * 3600
DAY_SECONDS = 24 * 3600

# Seconds from the Unix epoch (Thu 1970-01-01 00:00 UTC) back to the
# preceding Monday 00:00 (1969-12-29). Used to anchor week arithmetic.
EPOCH_TO_MONDAY = 3 * DAY_SECONDS

# Timezone offsets are bounded by the real-world UTC-14..UTC+14 range.
MAX_TZ_OFFSET_MIN = 14 * 60

# Tolerance on every unit-sum check (schedules, delay kernels).
UNIT_SUM_TOL = 1e-9

# Action profile kinds.
KIND_CREATED = "created_posts"
KIND_VISIBLE = "visible_posts"
KIND_REACTIONS = "self_reactions"
KIND_DELAYED = "delayed_self_reactions"
KIND_AUDIENCE = "audience_reactions"

DAY_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")

DAY_FILTERS = ("all", "weekday", "weekend")


def _check_tz_offset(tz_offset_min: int) -> int:
    if not -MAX_TZ_OFFSET_MIN <= tz_offset_min <= MAX_TZ_OFFSET_MIN:
        raise ValueError(
            f"tz_offset_min {tz_offset_min} outside "
            f"[-{MAX_TZ_OFFSET_MIN}, {MAX_TZ_OFFSET_MIN}]"
        )
    return int(tz_offset_min)


@dataclass(frozen=True)
class WeeklyGrid:
    """Equal-width bucketization of the local week, starting Monday 00:00.

    ``buckets_per_week`` must divide a 7-day week exactly; the default 672
    gives 15-minute buckets. Buckets are half-open intervals
    ``[start, start + width)`` so boundaries are unambiguous.
    """

    buckets_per_week: int = 672

    def __post_init__(self) -> None:
        if self.buckets_per_week <= 0:
            raise ValueError("buckets_per_week must be positive")
        if WEEK_SECONDS % self.buckets_per_week != 0:
            raise ValueError("buckets_per_week must divide a 7-day week exactly")

    @property
    def bucket_width_s(self) -> int:
        return WEEK_SECONDS // self.buckets_per_week

    def bucket_index(self, timestamp: int, tz_offset_min: int = 0) -> int:
        """Map an epoch timestamp to its local weekly bucket.

        Local time is UTC shifted by ``tz_offset_min`` minutes; weeks start
        Monday 00:00 local. Total over all valid inputs.
        """
        _check_tz_offset(tz_offset_min)
        local = int(timestamp) + tz_offset_min * 60
        into_week = (local + EPOCH_TO_MONDAY) % WEEK_SECONDS
        return int(into_week // self.bucket_width_s)

    def bucket_indices(self, timestamps, tz_offset_min: int = 0) -> np.ndarray:
        """Vectorized :meth:`bucket_index` over an array of timestamps."""
        _check_tz_offset(tz_offset_min)
        ts = np.asarray(timestamps, dtype=np.int64)
        local = ts + tz_offset_min * 60
        into_week = (local + EPOCH_TO_MONDAY) % WEEK_SECONDS
        return into_week // self.bucket_width_s

    def bucket_day(self, bucket: int) -> int:
        """Day-of-week index (0 = Monday) of the bucket's start."""
        return (bucket * self.bucket_width_s) // DAY_SECONDS

    def day_mask(self, day_filter: str = "all") -> np.ndarray:
        """Boolean mask over buckets for a weekday/weekend/all filter.

        A bucket counts as weekday when its start falls on Monday-Friday;
        on the default grid that is exactly indices 0-479.
        """
        if day_filter not in DAY_FILTERS:
            raise ValueError(f"day_filter must be one of {DAY_FILTERS}")
        days = (np.arange(self.buckets_per_week) * self.bucket_width_s) // DAY_SECONDS
        if day_filter == "weekday":
            return days < 5
        if day_filter == "weekend":
            return days >= 5
        return np.ones(self.buckets_per_week, dtype=bool)

    def bucket_label(self, bucket: int) -> str:
        """Human-readable local start time of a bucket, e.g. ``'Tue 09:15'``."""
        if not 0 <= bucket < self.buckets_per_week:
            raise ValueError(f"bucket {bucket} out of range")
        start = bucket * self.bucket_width_s
        day = start // DAY_SECONDS
        rem = start % DAY_SECONDS
        return f"{DAY_NAMES[day]} {rem // 3600:02d}:{(rem % 3600) // 60:02d}"


@dataclass(frozen=True)
class ActionProfile:
    """Non-negative event counts per weekly bucket.

    Values are stored as a read-only float64 vector so that weighted
    aggregation reuses the same type as raw counts.
    """

    values: np.ndarray
    kind: str = KIND_CREATED

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("profile values must be a non-empty 1-D vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite")
        if np.any(v < 0):
            raise ValueError("profile values must be non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def total(self) -> float:
        return float(self.values.sum())

    @classmethod
    def zeros(cls, n_buckets: int, kind: str = KIND_CREATED) -> "ActionProfile":
        return cls(np.zeros(n_buckets), kind)


@dataclass(frozen=True)
class Schedule:
    """Probability mass function over weekly buckets; peaks are the
    recommended posting times."""

    probabilities: np.ndarray
    provenance: str

    def __post_init__(self) -> None:
        p = np.array(self.probabilities, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("schedule must be a non-empty 1-D vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("schedule probabilities must be finite and >= 0")
        if abs(p.sum() - 1.0) > UNIT_SUM_TOL:
            raise ValueError(f"schedule must sum to 1 within {UNIT_SUM_TOL}")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def __len__(self) -> int:
        return int(self.probabilities.size)


@dataclass(frozen=True)
class TimeWindow:
    """Closed interval of epoch seconds: contains t iff start <= t <= end."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.end < self.start:
            raise ValueError("window end precedes start")

    @classmethod
    def from_days(cls, start: int, days: int) -> "TimeWindow":
        if days <= 0:
            raise ValueError("window length must be positive")
        return cls(int(start), int(start) + days * DAY_SECONDS - 1)

    def contains(self, timestamp: int) -> bool:
        return self.start <= timestamp <= self.end

    def mask(self, timestamps) -> np.ndarray:
        ts = np.asarray(timestamps, dtype=np.int64)
        return (ts >= self.start) & (ts <= self.end)

    def overlaps(self, other: "TimeWindow") -> bool:
        return self.start <= other.end and other.start <= self.end

    @property
    def n_days(self) -> float:
        return (self.end - self.start + 1) / DAY_SECONDS


def aggregate_profile(timestamps, tz_offset_min: int, grid: WeeklyGrid,
                      kind: str = KIND_CREATED) -> ActionProfile:
    """Count events per local weekly bucket, folding all weeks together.

    Empty input yields the zero profile; the profile total always equals the
    number of input timestamps.
    """
    n = grid.buckets_per_week
    ts = np.asarray(list(timestamps) if not isinstance(timestamps, np.ndarray)
                    else timestamps, dtype=np.int64)
    if ts.size == 0:
        return ActionProfile.zeros(n, kind)
    counts = np.bincount(grid.bucket_indices(ts, tz_offset_min), minlength=n)
    return ActionProfile(counts.astype(np.float64), kind)


def delayed_profile(profile: ActionProfile, kernel) -> ActionProfile:
    """Transform a reaction profile to anticipate where delayed reactions land.

    Element k of the result estimates the reactions the user would produce
    within the delay window *after* bucket k:

        out[k] = sum_m kernel[m] * profile[(k + m) mod N]

    i.e. a forward-looking circular cross-correlation with the delay kernel.
    The week wraps around: profiles are weekly-periodic aggregates, so mass
    spilling past Sunday 23:45 belongs to Monday's buckets. Total mass is
    conserved because the kernel sums to one.

    ``kernel`` may be a :class:`~postsched.delays.DelayKernel` or a bare
    probability vector over lags. A kernel that does not sum to 1 within
    ``UNIT_SUM_TOL`` is rejected.
    """
    mass = np.asarray(getattr(kernel, "mass", kernel), dtype=np.float64)
    if mass.ndim != 1 or mass.size == 0:
        raise ValueError("kernel must be a non-empty 1-D vector")
    if np.any(mass < 0) or not np.all(np.isfinite(mass)):
        raise ValueError("kernel mass must be finite and >= 0")
    if abs(mass.sum() - 1.0) > UNIT_SUM_TOL:
        raise ValueError(f"kernel must sum to 1 within {UNIT_SUM_TOL}")
    v = profile.values
    lags = np.nonzero(mass)[0]
    out = mass[lags[0]] * np.roll(v, -int(lags[0]))
    for m in lags[1:]:
        out += mass[m] * np.roll(v, -int(m))
    return ActionProfile(out, KIND_DELAYED)


def normalize_to_schedule(profile: ActionProfile, provenance: str) -> Schedule:
    """Normalize a non-negative profile into a schedule: s[i] = q[i] / sum(q).

    Raises :class:`NoSignalError` on an all-zero profile so the caller can
    fall back to a baseline schedule.
    """
    total = profile.values.sum()
    if total <= 0:
        raise NoSignalError(f"cannot normalize all-zero {profile.kind} profile")
    return Schedule(profile.values / total, provenance)
