"""Hourly concentration series: construction, windowing, alignment.

Timestamps are integers counting whole hours since the Unix epoch (UTC).
A value recorded anywhere inside [H, H+1h) belongs to hour H, so an
hourly average labelled H summarises the hour that starts at H.
Series are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from ozonet.errors import InsufficientDataError

SECONDS_PER_HOUR = 3600
VALUE_MIN = -10.0   # slight negative allowed for instrument noise
VALUE_MAX = 500.0


def to_epoch_hour(stamp) -> int:
    """Convert an int epoch-hour or an hour-aligned UTC datetime to epoch hours."""
    if isinstance(stamp, (int, np.integer)):
        return int(stamp)
    if isinstance(stamp, datetime):
        if stamp.tzinfo is None:
            stamp = stamp.replace(tzinfo=timezone.utc)
        seconds = stamp.timestamp()
        if seconds % SECONDS_PER_HOUR:
            raise ValueError(f"timestamp {stamp!r} is not aligned to a whole hour")
        return int(seconds // SECONDS_PER_HOUR)
    raise TypeError(f"cannot interpret {type(stamp).__name__} as an epoch hour")


def epoch_hour_to_datetime(hour: int) -> datetime:
    return datetime.fromtimestamp(hour * SECONDS_PER_HOUR, tz=timezone.utc)


def parse_iso_hour(text: str) -> int:
    """Parse 'YYYY-MM-DDTHH:00:00Z' (UTC, hour-aligned) to an epoch hour."""
    try:
        stamp = datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ")
    except ValueError as exc:
        raise ValueError(f"bad timestamp {text!r}: expected YYYY-MM-DDTHH:00:00Z (UTC)") from exc
    if stamp.minute or stamp.second:
        raise ValueError(f"timestamp {text!r} is not aligned to a whole hour")
    return to_epoch_hour(stamp.replace(tzinfo=timezone.utc))


def format_iso_hour(hour: int) -> str:
    return epoch_hour_to_datetime(hour).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Observation:
    """One hourly concentration value at one site."""

    hour: int
    value: float

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError("observation value must be finite")
        if not VALUE_MIN <= self.value <= VALUE_MAX:
            raise ValueError(
                f"value {self.value} outside plausible range [{VALUE_MIN}, {VALUE_MAX}]"
            )


@dataclass(frozen=True)
class TimeSeries:
    """Ordered hourly observations for one site, gaps allowed."""

    site_id: str
    hours: np.ndarray    # int64, strictly increasing
    values: np.ndarray   # float64, finite
    units: str = "ppb"

    def __post_init__(self):
        hours = np.asarray(self.hours, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if hours.shape != values.shape or hours.ndim != 1:
            raise ValueError("hours and values must be 1-d arrays of equal length")
        if hours.size > 1 and not np.all(np.diff(hours) > 0):
            raise ValueError("timestamps must be strictly increasing with no duplicates")
        if values.size and not np.all(np.isfinite(values)):
            raise ValueError("all values must be finite")
        if values.size and (values.min() < VALUE_MIN or values.max() > VALUE_MAX):
            raise ValueError(f"values outside plausible range [{VALUE_MIN}, {VALUE_MAX}]")
        object.__setattr__(self, "hours", hours)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_pairs(cls, site_id: str, pairs, units: str = "ppb") -> "TimeSeries":
        """Build from an iterable of (timestamp, value); timestamps may be
        epoch-hour ints or hour-aligned UTC datetimes."""
        pairs = list(pairs)
        hours = np.array([to_epoch_hour(t) for t, _ in pairs], dtype=np.int64)
        values = np.array([v for _, v in pairs], dtype=np.float64)
        return cls(site_id, hours, values, units)

    def __len__(self) -> int:
        return int(self.hours.size)

    def observations(self):
        for h, v in zip(self.hours.tolist(), self.values.tolist()):
            yield Observation(h, v)

    def value_at(self, hour: int) -> float | None:
        i = np.searchsorted(self.hours, hour)
        if i < self.hours.size and self.hours[i] == hour:
            return float(self.values[i])
        return None

    def restrict(self, start: int | None = None, end: int | None = None) -> "TimeSeries":
        """Subseries with start <= hour <= end (inclusive bounds, either optional)."""
        lo = 0 if start is None else int(np.searchsorted(self.hours, start, side="left"))
        hi = self.hours.size if end is None else int(np.searchsorted(self.hours, end, side="right"))
        return TimeSeries(self.site_id, self.hours[lo:hi].copy(), self.values[lo:hi].copy(), self.units)


@dataclass(frozen=True)
class WindowSlice:
    """All observations of one series inside the half-open interval (start, end]."""

    site_id: str
    start: int
    end: int
    hours: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)

    @property
    def duration_hours(self) -> int:
        return int(self.end - self.start)

    @property
    def completeness(self) -> float:
        return self.samples.size / self.duration_hours

    def sufficient(self, completeness_min: float) -> bool:
        return self.completeness >= completeness_min


def window(series: TimeSeries, end, td_hours: int) -> WindowSlice:
    """Slice of `series` over (end - td_hours, end]. An empty window is valid."""
    if td_hours <= 0:
        raise ValueError("window length must be positive")
    end = to_epoch_hour(end)
    start = end - int(td_hours)
    lo = int(np.searchsorted(series.hours, start, side="right"))
    hi = int(np.searchsorted(series.hours, end, side="right"))
    return WindowSlice(series.site_id, start, end, series.hours[lo:hi], series.values[lo:hi])


def resample_hourly(timestamps_s, values, site_id: str, units: str = "ppb") -> TimeSeries:
    """Average raw values (epoch seconds, any cadence) into hourly bins.

    Each output hour is the arithmetic mean of raw values falling in
    [H, H+1h); hours with no raw values are left as gaps, never zero-filled.
    Idempotent on data that is already hourly.
    """
    ts = np.asarray(timestamps_s, dtype=np.int64)
    vals = np.asarray(values, dtype=np.float64)
    if ts.shape != vals.shape:
        raise ValueError("timestamps and values must have equal length")
    if ts.size == 0:
        return TimeSeries(site_id, np.array([], dtype=np.int64), np.array([], dtype=np.float64), units)
    if not np.all(np.diff(ts) >= 0):
        raise ValueError("raw timestamps must be nondecreasing")
    hours = ts // SECONDS_PER_HOUR
    uniq, inverse = np.unique(hours, return_inverse=True)
    sums = np.bincount(inverse, weights=vals)
    counts = np.bincount(inverse)
    return TimeSeries(site_id, uniq.astype(np.int64), sums / counts, units)


def align(a: TimeSeries, b: TimeSeries, start: int | None = None, end: int | None = None):
    """Pairs of co-timed values within [start, end].

    Returns (hours, a_values, b_values) for timestamps present in both
    series, in timestamp order. Disjoint series produce empty arrays.
    """
    common, ia, ib = np.intersect1d(a.hours, b.hours, assume_unique=True, return_indices=True)
    av, bv = a.values[ia], b.values[ib]
    if start is not None:
        keep = common >= to_epoch_hour(start)
        common, av, bv = common[keep], av[keep], bv[keep]
    if end is not None:
        keep = common <= to_epoch_hour(end)
        common, av, bv = common[keep], av[keep], bv[keep]
    return common, av, bv


def require_samples(values: np.ndarray, minimum: int = 1, what: str = "sample"):
    if np.asarray(values).size < minimum:
        raise InsufficientDataError(f"need at least {minimum} {what}(s), got {np.asarray(values).size}")
