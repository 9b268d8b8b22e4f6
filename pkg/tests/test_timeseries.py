"""Series construction, hourly resampling, windowing, alignment."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ozonet import Observation, TimeSeries, align, resample_hourly, window
from ozonet.timeseries import format_iso_hour, parse_iso_hour


def hourly(site, start, values):
    return TimeSeries(site, np.arange(start, start + len(values), dtype=np.int64),
                      np.asarray(values, dtype=float))


class TestConstruction:
    def test_rejects_duplicate_timestamps(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            TimeSeries("x", np.array([1, 1]), np.array([1.0, 2.0]))

    def test_rejects_decreasing_timestamps(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            TimeSeries("x", np.array([2, 1]), np.array([1.0, 2.0]))

    def test_rejects_nonfinite_values(self):
        with pytest.raises(ValueError, match="finite"):
            TimeSeries("x", np.array([1]), np.array([np.nan]))

    def test_rejects_out_of_range_values(self):
        with pytest.raises(ValueError, match="range"):
            TimeSeries("x", np.array([1]), np.array([900.0]))

    def test_observation_validation(self):
        Observation(5, -3.0)
        with pytest.raises(ValueError):
            Observation(5, -40.0)
        with pytest.raises(ValueError):
            Observation(5, float("inf"))

    def test_from_pairs_accepts_datetimes(self):
        from datetime import datetime, timezone

        ts = TimeSeries.from_pairs("x", [(datetime(2018, 1, 1, 5, tzinfo=timezone.utc), 12.0)])
        assert ts.hours[0] * 3600 == datetime(2018, 1, 1, 5, tzinfo=timezone.utc).timestamp()

    def test_value_at(self):
        ts = hourly("x", 10, [1.0, 2.0, 3.0])
        assert ts.value_at(11) == 2.0
        assert ts.value_at(99) is None


class TestResample:
    def test_constant_minutes_average_to_constant(self):
        secs = np.arange(60) * 60        # one value per minute in hour 0
        out = resample_hourly(secs, np.full(60, 40.0), "s")
        assert len(out) == 1
        assert out.hours[0] == 0
        assert out.values[0] == 40.0

    def test_arithmetic_mean(self):
        out = resample_hourly([0, 600, 1200], [10.0, 20.0, 30.0], "s")
        assert out.values[0] == 20.0

    def test_empty_hours_stay_gaps(self):
        # values in hours 0 and 2, nothing in hour 1
        out = resample_hourly([100, 2 * 3600 + 100], [5.0, 7.0], "s")
        assert out.hours.tolist() == [0, 2]

    def test_empty_input(self):
        out = resample_hourly([], [], "s")
        assert len(out) == 0

    def test_bucket_rule_start_labelled(self):
        # a value exactly on the hour boundary belongs to the hour it starts
        out = resample_hourly([3600], [9.0], "s")
        assert out.hours.tolist() == [1]

    def test_idempotent_on_hourly_data(self):
        ts = hourly("x", 100, [3.0, 4.0, 5.0])
        again = resample_hourly(ts.hours * 3600, ts.values, "x")
        assert np.array_equal(again.hours, ts.hours)
        assert np.array_equal(again.values, ts.values)


class TestWindow:
    def test_full_window_completeness(self):
        ts = hourly("x", 1, [1.0] * 72)
        w = window(ts, 72, 72)
        assert w.completeness == 1.0
        assert w.samples.size == 72

    def test_half_window_completeness(self):
        ts = hourly("x", 1, [1.0] * 36)
        w = window(ts, 72, 72)
        assert w.completeness == 0.5

    def test_series_before_window(self):
        ts = hourly("x", 1, [1.0] * 10)
        w = window(ts, 200, 72)
        assert w.completeness == 0.0
        assert w.samples.size == 0

    def test_interval_is_half_open(self):
        ts = hourly("x", 0, [1.0, 2.0, 3.0, 4.0])   # hours 0..3
        w = window(ts, 3, 3)                         # (0, 3]
        assert w.hours.tolist() == [1, 2, 3]

    def test_nonpositive_length_rejected(self):
        ts = hourly("x", 0, [1.0])
        with pytest.raises(ValueError):
            window(ts, 3, 0)

    @settings(deadline=None, max_examples=60)
    @given(st.lists(st.integers(0, 300), min_size=1, max_size=60, unique=True),
           st.integers(0, 320), st.integers(1, 100))
    def test_window_contains_exactly_in_range_hours(self, hours, end, td):
        hours = sorted(hours)
        ts = TimeSeries("x", np.array(hours, dtype=np.int64),
                        np.arange(len(hours), dtype=float))
        w = window(ts, end, td)
        expected = [h for h in hours if end - td < h <= end]
        assert w.hours.tolist() == expected
        assert w.completeness == len(expected) / td


class TestAlign:
    def test_disjoint(self):
        a = hourly("a", 0, [1.0, 2.0])
        b = hourly("b", 10, [3.0, 4.0])
        hours, av, bv = align(a, b)
        assert hours.size == 0 and av.size == 0 and bv.size == 0

    def test_partial_overlap(self):
        a = hourly("a", 1, [1.0, 2.0, 3.0])     # hours 1,2,3
        b = hourly("b", 2, [9.0, 8.0, 7.0])     # hours 2,3,4
        hours, av, bv = align(a, b)
        assert hours.tolist() == [2, 3]
        assert av.tolist() == [2.0, 3.0]
        assert bv.tolist() == [9.0, 8.0]

    def test_range_limits(self):
        a = hourly("a", 0, [1.0, 2.0, 3.0, 4.0])
        hours, av, bv = align(a, a, start=1, end=2)
        assert hours.tolist() == [1, 2]

    @settings(deadline=None, max_examples=50)
    @given(st.lists(st.integers(0, 200), min_size=1, max_size=50, unique=True))
    def test_self_alignment_pairs_everything(self, hours):
        hours = sorted(hours)
        ts = TimeSeries("x", np.array(hours, dtype=np.int64),
                        np.arange(len(hours), dtype=float))
        got, av, bv = align(ts, ts)
        assert got.tolist() == hours
        assert np.array_equal(av, bv)
        assert np.array_equal(av, ts.values)


class TestIsoHours:
    def test_round_trip(self):
        assert parse_iso_hour("2018-01-26T00:00:00Z") == 421368
        assert format_iso_hour(421368) == "2018-01-26T00:00:00Z"

    def test_rejects_non_utc(self):
        with pytest.raises(ValueError):
            parse_iso_hour("2018-01-26T00:00:00+02:00")

    def test_rejects_unaligned(self):
        with pytest.raises(ValueError, match="whole hour"):
            parse_iso_hour("2018-01-26T00:30:00Z")
