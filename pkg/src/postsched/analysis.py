"""Cohort comparison of audience reaction behavior.

Per-user behavior series (first-degree schedules) are compared with Pearson
correlation and cosine similarity, aggregated into city or network cohorts
shifted to a common local time, and summarized as metric histograms over
seeded samples of user pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import UndefinedMetricError
from .temporal import WeeklyGrid

METRICS = ("correlation", "cosine")


def correlation(s1, s2) -> float:
    """Pearson correlation between two equal-length series.

    Undefined (raises) when either series has zero variance.
    """
    a = np.asarray(s1, dtype=np.float64)
    b = np.asarray(s2, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("series must be 1-D and equal length")
    da = a - a.mean()
    db = b - b.mean()
    va = float(da @ da)
    vb = float(db @ db)
    if va == 0.0 or vb == 0.0:
        raise UndefinedMetricError("correlation undefined for constant series")
    return float((da @ db) / np.sqrt(va * vb))


def cosine_similarity(s1, s2) -> float:
    """Dot product over norms; in [0, 1] for non-negative series.

    Undefined (raises) when either vector is zero.
    """
    a = np.asarray(s1, dtype=np.float64)
    b = np.asarray(s2, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("series must be 1-D and equal length")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise UndefinedMetricError("cosine similarity undefined for zero vector")
    return float((a @ b) / (na * nb))


_METRIC_FNS = {"correlation": correlation, "cosine": cosine_similarity}


def shift_to_offset(values, from_offset_min: int, to_offset_min: int,
                    grid: WeeklyGrid) -> np.ndarray:
    """Re-express a local-time weekly series in another timezone's local time.

    The offset difference must be a whole number of buckets (true for the
    default grid, since real timezone offsets are multiples of 15 minutes).
    """
    diff_s = (from_offset_min - to_offset_min) * 60
    if diff_s % grid.bucket_width_s != 0:
        raise ValueError("offset difference is not a whole number of buckets")
    return np.roll(np.asarray(values, dtype=np.float64),
                   -(diff_s // grid.bucket_width_s))


@dataclass(frozen=True)
class Cohort:
    """A labelled user group with its normalized aggregate behavior series."""

    label: str
    members: tuple[str, ...]
    series: np.ndarray
    tz_offset_min: int

    def __post_init__(self) -> None:
        s = np.array(self.series, dtype=np.float64)
        s.setflags(write=False)
        object.__setattr__(self, "series", s)


def cohort_aggregate(series_by_user: Mapping[str, np.ndarray],
                     offsets: Mapping[str, int], cohort_offset_min: int,
                     grid: WeeklyGrid, label: str = "") -> Cohort:
    """Sum member series in the cohort's local time and renormalize.

    Each member's series is shifted from their own timezone to the cohort's
    before summing (an hour of offset difference is 4 buckets on the default
    grid). Undefined for an empty cohort or an all-zero aggregate.
    """
    if not series_by_user:
        raise UndefinedMetricError("empty cohort")
    acc = np.zeros(grid.buckets_per_week)
    for user in sorted(series_by_user):
        acc += shift_to_offset(series_by_user[user],
                               offsets.get(user, 0), cohort_offset_min, grid)
    total = acc.sum()
    if total <= 0:
        raise UndefinedMetricError(f"cohort {label!r} aggregate has no mass")
    return Cohort(label, tuple(sorted(series_by_user)), acc / total,
                  cohort_offset_min)


@dataclass(frozen=True)
class MetricDistribution:
    """Histogram of a pairwise metric over [-1, 1].

    ``counts`` sums to the number of valid sampled pairs; pairs where the
    metric was undefined are skipped and counted separately.
    """

    metric: str
    bin_edges: np.ndarray
    counts: np.ndarray
    n_sampled: int
    n_undefined: int

    @property
    def n_valid(self) -> int:
        return int(self.counts.sum())


def pairwise_distribution(series1: Sequence[np.ndarray],
                          series2: Sequence[np.ndarray], metric: str,
                          sample_budget: int, seed: int,
                          bin_width: float = 0.05) -> MetricDistribution:
    """Histogram a metric over seeded uniform pair samples from two cohorts.

    Pairs are drawn with replacement (one member from each cohort) so large
    cohorts can be summarized with a fixed budget; a fixed seed gives
    bit-identical histograms across runs. Undefined when either cohort is
    empty or no sampled pair yields a defined metric.
    """
    if metric not in _METRIC_FNS:
        raise ValueError(f"metric must be one of {METRICS}")
    if not series1 or not series2:
        raise UndefinedMetricError("both cohorts must be non-empty")
    if sample_budget < 1:
        raise ValueError("sample_budget must be >= 1")
    n_bins = round(2.0 / bin_width)
    if n_bins < 1 or abs(n_bins * bin_width - 2.0) > 1e-12:
        raise ValueError("bin_width must evenly divide [-1, 1]")
    fn = _METRIC_FNS[metric]
    rng = np.random.default_rng(seed)
    left = rng.integers(0, len(series1), size=sample_budget)
    right = rng.integers(0, len(series2), size=sample_budget)
    values = []
    undefined = 0
    for i, j in zip(left, right):
        try:
            values.append(fn(series1[i], series2[j]))
        except UndefinedMetricError:
            undefined += 1
    if not values:
        raise UndefinedMetricError("no sampled pair had a defined metric")
    edges = np.linspace(-1.0, 1.0, n_bins + 1)
    counts, _ = np.histogram(np.clip(values, -1.0, 1.0), bins=edges)
    return MetricDistribution(metric, edges, counts, sample_budget, undefined)
