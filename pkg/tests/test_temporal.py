"""Grid bucketization, profiles, delayed profiles, and normalization."""

import numpy as np
import pytest

from postsched import (
    ActionProfile,
    DelayKernel,
    NoSignalError,
    Schedule,
    TimeWindow,
    WeeklyGrid,
    aggregate_profile,
    delayed_profile,
    normalize_to_schedule,
)
from postsched.temporal import KIND_REACTIONS, WEEK_SECONDS


class TestWeeklyGrid:
    def test_default_geometry(self):
        g = WeeklyGrid()
        assert g.buckets_per_week == 672 == 4 * 24 * 7
        assert g.bucket_width_s == 900
        assert g.bucket_width_s * g.buckets_per_week == WEEK_SECONDS

    def test_rejects_nondivisible_bucket_count(self):
        with pytest.raises(ValueError):
            WeeklyGrid(671)
        with pytest.raises(ValueError):
            WeeklyGrid(0)

    def test_epoch_is_thursday_midnight(self):
        # Thu 1970-01-01 00:00 UTC is 3 full days past Monday: 3 * 96 = 288.
        assert WeeklyGrid().bucket_index(0, 0) == 288

    def test_offset_shifts_local_time(self):
        # Local Thu 01:00 under a +60 minute offset: 288 + 4.
        assert WeeklyGrid().bucket_index(0, 60) == 292

    def test_last_bucket_of_week(self):
        # Sun 1970-01-04 23:45 UTC is the final 15-minute bucket.
        assert WeeklyGrid().bucket_index(345600 - 900, 0) == 671

    def test_half_open_boundary(self):
        g = WeeklyGrid()
        assert g.bucket_index(345600, 0) == 0  # next Monday 00:00 wraps
        assert g.bucket_index(899, 0) == g.bucket_index(0, 0)
        assert g.bucket_index(900, 0) == g.bucket_index(0, 0) + 1

    def test_fifteen_minute_offset_shift_property(self):
        g = WeeklyGrid()
        rng = np.random.default_rng(7)
        ts = rng.integers(0, 10 * WEEK_SECONDS, size=1000)
        offs = rng.integers(-820, 821, size=1000)
        base = np.array([g.bucket_index(int(t), int(o)) for t, o in zip(ts, offs)])
        shifted = np.array([g.bucket_index(int(t), int(o) + 15)
                            for t, o in zip(ts, offs)])
        assert np.array_equal(shifted, (base + 1) % 672)

    def test_vectorized_matches_scalar(self):
        g = WeeklyGrid()
        rng = np.random.default_rng(3)
        ts = rng.integers(-5 * WEEK_SECONDS, 5 * WEEK_SECONDS, size=500)
        vec = g.bucket_indices(ts, -330)
        assert np.array_equal(vec, [g.bucket_index(int(t), -330) for t in ts])

    def test_tz_offset_bounds(self):
        g = WeeklyGrid()
        with pytest.raises(ValueError):
            g.bucket_index(0, 841)
        with pytest.raises(ValueError):
            g.bucket_index(0, -841)

    def test_day_mask(self):
        g = WeeklyGrid()
        weekday = g.day_mask("weekday")
        assert weekday[:480].all() and not weekday[480:].any()
        weekend = g.day_mask("weekend")
        assert np.array_equal(weekend, ~weekday)
        assert g.day_mask("all").all()

    def test_bucket_labels(self):
        g = WeeklyGrid()
        assert g.bucket_label(0) == "Mon 00:00"
        assert g.bucket_label(292) == "Thu 01:00"
        assert g.bucket_label(671) == "Sun 23:45"


class TestAggregateProfile:
    def test_empty_input_is_zero_profile(self):
        prof = aggregate_profile([], 0, WeeklyGrid())
        assert prof.total == 0.0
        assert len(prof) == 672

    def test_counts_per_bucket(self):
        g = WeeklyGrid()
        prof = aggregate_profile([0, 10, 901], 0, g)
        assert prof.values[288] == 2.0
        assert prof.values[289] == 1.0
        assert prof.total == 3.0

    def test_weekly_periodicity_of_offset(self):
        # An offset shifted by exactly 7 days of minutes changes nothing...
        # except it exceeds the legal range, so shift the timestamps instead.
        g = WeeklyGrid()
        ts = [0, 4000, 86400 * 2 + 77]
        base = aggregate_profile(ts, 120, g)
        shifted = aggregate_profile([t + WEEK_SECONDS for t in ts], 120, g)
        assert np.array_equal(base.values, shifted.values)


class TestActionProfile:
    def test_rejects_negative_values(self):
        with pytest.raises(ValueError):
            ActionProfile(np.array([1.0, -0.5]))

    def test_values_are_read_only(self):
        prof = ActionProfile(np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            prof.values[0] = 5.0


class TestDelayedProfile:
    def test_delta_kernel_is_identity(self):
        g = WeeklyGrid()
        rng = np.random.default_rng(11)
        prof = ActionProfile(rng.integers(0, 9, size=672).astype(float),
                             KIND_REACTIONS)
        out = delayed_profile(prof, DelayKernel.delta(0))
        assert np.array_equal(out.values, prof.values)

    def test_impulse_split_lands_before(self):
        g8 = WeeklyGrid(8)
        imp = ActionProfile(np.eye(8)[5], KIND_REACTIONS)
        kernel = DelayKernel(np.array([0.5, 0.5]), g8.bucket_width_s)
        out = delayed_profile(imp, kernel)
        expected = np.zeros(8)
        expected[4] = expected[5] = 0.5
        assert np.allclose(out.values, expected)

    def test_wraps_at_week_boundary(self):
        g8 = WeeklyGrid(8)
        imp = ActionProfile(np.eye(8)[0], KIND_REACTIONS)
        kernel = DelayKernel(np.array([0.0, 1.0]), g8.bucket_width_s)
        out = delayed_profile(imp, kernel)
        assert out.values[7] == 1.0
        assert out.total == 1.0

    def test_mass_conservation_property(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n = int(rng.integers(2, 64))
            prof = ActionProfile(rng.random(n) * 50, KIND_REACTIONS)
            mass = rng.random(int(rng.integers(1, n + 1)))
            mass /= mass.sum()
            out = delayed_profile(prof, mass)
            assert abs(out.total - prof.total) <= 1e-9 * max(1.0, prof.total)

    def test_rejects_unnormalized_kernel(self):
        prof = ActionProfile(np.ones(8), KIND_REACTIONS)
        with pytest.raises(ValueError):
            delayed_profile(prof, np.array([0.5, 0.4]))


class TestNormalizeToSchedule:
    def test_single_mass(self):
        prof = ActionProfile(np.array([2.0, 0.0, 0.0]))
        s = normalize_to_schedule(prof, "S1")
        assert np.array_equal(s.probabilities, [1.0, 0.0, 0.0])

    def test_two_bucket_toy(self):
        s = normalize_to_schedule(ActionProfile(np.array([1.0, 3.0])), "S1")
        assert np.allclose(s.probabilities, [0.25, 0.75])

    def test_all_zero_raises_no_signal(self):
        with pytest.raises(NoSignalError):
            normalize_to_schedule(ActionProfile(np.zeros(4)), "S1")

    def test_scale_invariance_property(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            q = rng.random(24) * rng.choice([0.01, 1.0, 1e6])
            q[rng.integers(0, 24)] += 1.0  # ensure signal
            c = float(rng.uniform(0.1, 100))
            a = normalize_to_schedule(ActionProfile(q), "S1").probabilities
            b = normalize_to_schedule(ActionProfile(c * q), "S1").probabilities
            assert np.all(np.abs(a - b) <= 1e-9)

    def test_argmax_preserved(self):
        rng = np.random.default_rng(23)
        for _ in range(300):
            q = rng.integers(0, 5, size=30).astype(float)
            q[rng.integers(0, 30)] += 1.0
            s = normalize_to_schedule(ActionProfile(q), "S1")
            assert int(np.argmax(s.probabilities)) == int(np.argmax(q))


class TestSchedule:
    def test_must_sum_to_one(self):
        with pytest.raises(ValueError):
            Schedule(np.array([0.5, 0.4]), "S1")

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Schedule(np.array([1.5, -0.5]), "S1")


class TestTimeWindow:
    def test_closed_bounds(self):
        w = TimeWindow.from_days(1000, 63)
        assert w.contains(1000)
        assert w.contains(w.end)
        assert not w.contains(w.end + 1)
        assert not w.contains(999)
        assert w.n_days == 63

    def test_overlap(self):
        a = TimeWindow.from_days(0, 63)
        b = TimeWindow.from_days(63 * 86400, 56)
        assert not a.overlaps(b)
        assert a.overlaps(TimeWindow(a.end, a.end + 5))
