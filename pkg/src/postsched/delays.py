"""Empirical post-to-reaction delay estimation.

A reaction always lags the post it answers. Within a short attribution
window (default 24 hours split into 15-minute lags) the delay distribution
is estimated per network as a plain histogram; no parametric fit. The
resulting kernel feeds the delayed-profile transform and the cumulative /
quantile summaries of reaction speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError
from .temporal import UNIT_SUM_TOL

DEFAULT_WINDOW_S = 24 * 3600
DEFAULT_LAG_WIDTH_S = 900

# Guards float jitter in p * n when locating the quantile index.
_QUANTILE_EPS = 1e-9


@dataclass(frozen=True)
class DelayPair:
    """One joined (post, reaction) observation; delay is never negative
    because negative-delay reactions are rejected at join time."""

    author: str
    reactor: str
    post_time: int
    reaction_time: int

    def __post_init__(self) -> None:
        if self.reaction_time < self.post_time:
            raise ValueError("reaction precedes post; negative delays are rejected")

    @property
    def delay(self) -> int:
        return self.reaction_time - self.post_time


@dataclass(frozen=True)
class DelayKernel:
    """Discrete probability distribution of post-to-reaction delay over
    equal-width lags covering ``n_lags * lag_width_s`` seconds."""

    mass: np.ndarray
    lag_width_s: int = DEFAULT_LAG_WIDTH_S

    def __post_init__(self) -> None:
        m = np.array(self.mass, dtype=np.float64)
        if m.ndim != 1 or m.size == 0:
            raise ValueError("kernel mass must be a non-empty 1-D vector")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("kernel mass must be finite and >= 0")
        if abs(m.sum() - 1.0) > UNIT_SUM_TOL:
            raise ValueError(f"kernel mass must sum to 1 within {UNIT_SUM_TOL}")
        if self.lag_width_s <= 0:
            raise ValueError("lag width must be positive")
        m.setflags(write=False)
        object.__setattr__(self, "mass", m)

    @property
    def n_lags(self) -> int:
        return int(self.mass.size)

    @property
    def window_s(self) -> int:
        return self.n_lags * self.lag_width_s

    def lag_starts(self) -> np.ndarray:
        return np.arange(self.n_lags, dtype=np.int64) * self.lag_width_s

    @classmethod
    def delta(cls, lag: int, n_lags: int = 96,
              lag_width_s: int = DEFAULT_LAG_WIDTH_S) -> "DelayKernel":
        """Point mass at a single lag; lag 0 is the identity kernel."""
        if not 0 <= lag < n_lags:
            raise ValueError("lag out of range")
        m = np.zeros(n_lags)
        m[lag] = 1.0
        return cls(m, lag_width_s)


def _delay_array(pairs) -> np.ndarray:
    """Accepts a sequence of DelayPair or a bare array of delays in seconds."""
    if isinstance(pairs, np.ndarray):
        return pairs.astype(np.int64, copy=False)
    return np.fromiter((getattr(p, "delay", p) for p in pairs), dtype=np.int64)


def _in_window(pairs, window_s: int) -> np.ndarray:
    d = _delay_array(pairs)
    return d[(d >= 0) & (d < window_s)]


def estimate_delay_kernel(pairs, window_s: int = DEFAULT_WINDOW_S,
                          lag_width_s: int = DEFAULT_LAG_WIDTH_S) -> DelayKernel:
    """Histogram in-window delays into lags and renormalize.

    Lag m collects delays in ``[m * lag_width_s, (m+1) * lag_width_s)``;
    delays at or beyond ``window_s`` are excluded. Raises
    :class:`InsufficientDataError` when no pair falls inside the window.
    """
    if window_s <= 0 or lag_width_s <= 0 or window_s % lag_width_s != 0:
        raise ValueError("window_s must be a positive multiple of lag_width_s")
    n_lags = window_s // lag_width_s
    d = _in_window(pairs, window_s)
    if d.size == 0:
        raise InsufficientDataError("no delays inside the attribution window")
    hist = np.bincount(d // lag_width_s, minlength=n_lags)
    return DelayKernel(hist / hist.sum(), lag_width_s)


def time_to_fraction(pairs, p: float, window_s: int = DEFAULT_WINDOW_S) -> int:
    """Smallest delay t (seconds) by which a fraction p of in-window
    reactions have occurred.

    Formally the smallest t with ``count(delay <= t) >= p * count``, reported
    at 1-second resolution. Non-decreasing in p for fixed pairs.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must be in (0, 1]")
    d = np.sort(_in_window(pairs, window_s))
    if d.size == 0:
        raise InsufficientDataError("no delays inside the attribution window")
    idx = math.ceil(p * d.size - _QUANTILE_EPS) - 1
    return int(d[min(max(idx, 0), d.size - 1)])


def cumulative_curve(pairs, window_s: int = DEFAULT_WINDOW_S,
                     lag_width_s: int = DEFAULT_LAG_WIDTH_S) -> np.ndarray:
    """Cumulative fraction of in-window reactions per lag.

    Computed as the running prefix-sum of the estimated kernel mass, so the
    two aggregations agree exactly on the same pairs and lags. The curve is
    monotone non-decreasing and ends at 1 (up to float rounding).
    """
    return np.cumsum(estimate_delay_kernel(pairs, window_s, lag_width_s).mass)


def write_kernel_table(kernel: DelayKernel, path) -> None:
    """Persist a kernel as a two-column text table (lag_start_seconds, probability)."""
    lines = [f"# lag_width_s={kernel.lag_width_s}"]
    for start, prob in zip(kernel.lag_starts(), kernel.mass):
        lines.append(f"{int(start)}\t{prob:.17g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_kernel_table(path) -> DelayKernel:
    starts: list[int] = []
    probs: list[float] = []
    lag_width = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                if "lag_width_s=" in line:
                    lag_width = int(line.split("lag_width_s=")[1])
                continue
            a, b = line.split("\t")
            starts.append(int(a))
            probs.append(float(b))
    if not probs:
        raise InsufficientDataError(f"{path}: empty kernel table")
    if lag_width is None:
        lag_width = starts[1] - starts[0] if len(starts) > 1 else DEFAULT_LAG_WIDTH_S
    return DelayKernel(np.array(probs), lag_width)
