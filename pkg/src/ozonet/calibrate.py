"""Gain/offset estimation by moment matching, and trend smoothing.

A sensor is recalibrated without co-location by matching the first two
moments of its windowed output to those of a proxy window:

    gain   = sqrt(var(proxy) / var(sensor))
    offset = mean(proxy) - gain * mean(sensor)
    corrected reading = offset + gain * reading

Variances are unbiased (n-1 divisor). The gain is taken as the positive
root always; an anti-correlated sensor is not representable and shows up
through the distribution-similarity alarms instead.

Raw hourly estimates are noisy, so corrections use a long-term trend:
an ordinary least squares quadratic over all raw estimates from the
start of monitoring up to now, refit as each estimate arrives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ozonet import kernels
from ozonet.errors import DegenerateWindowError, InsufficientDataError
from ozonet.timeseries import WindowSlice, to_epoch_hour

# Elapsed hours are rescaled before fitting so tau^4 sums stay well
# conditioned over multi-month histories; 2^-10 is exact in binary.
_TAU_SCALE = 1.0 / 1024.0

# A window whose variance sits below this (ppb^2) is flat-lined: live
# atmospheric windows are orders of magnitude above it, while a held
# constant can miss exact zero by summation rounding (~1e-28).
DEGENERATE_VAR_EPS = 1e-12

RAW = "raw"
TREND = "trend"


@dataclass(frozen=True)
class CalibrationEstimate:
    """One (offset, gain) estimate: corrected = offset + gain * reading."""

    stamp: int          # epoch hour the estimate applies to
    offset: float       # ppb
    gain: float         # unitless, >= 0
    source: str = RAW   # "raw" (window moments) or "trend" (smoothed)

    def __post_init__(self):
        if not (math.isfinite(self.offset) and math.isfinite(self.gain)):
            raise ValueError("calibration parameters must be finite")
        if self.gain < 0:
            raise ValueError("gain must be nonnegative")


def moment_match(sensor_win: WindowSlice, proxy_win: WindowSlice,
                 completeness_min: float = 0.75) -> CalibrationEstimate:
    """Raw gain/offset estimate from one pair of windows.

    Raises DegenerateWindowError when the sensor window has zero variance
    (flat-lined instrument); the alarm engine treats that as a gain breach
    rather than a crash.
    """
    for win in (sensor_win, proxy_win):
        if not win.sufficient(completeness_min):
            raise InsufficientDataError(
                f"insufficient data: window {win.site_id} completeness "
                f"{win.completeness:.2f} < {completeness_min}"
            )
    mean_y, var_y = kernels.window_moments(sensor_win.samples)
    mean_z, var_z = kernels.window_moments(proxy_win.samples)
    if var_y <= DEGENERATE_VAR_EPS:
        raise DegenerateWindowError(
            f"degenerate sensor window at {sensor_win.site_id}: zero variance"
        )
    gain = math.sqrt(var_z / var_y)
    return CalibrationEstimate(sensor_win.end, mean_z - gain * mean_y, gain, RAW)


def apply_correction(est: CalibrationEstimate, reading):
    """Best estimate of the true concentration given a sensor reading.

    Accepts a scalar or an array of readings.
    """
    return est.offset + est.gain * reading


class ExpandingQuadFit:
    """Incremental least-squares quadratic over an expanding window.

    Maintains the power sums needed for the 3x3 normal equations so a
    refit after each new point costs O(1). Taus must be nonnegative and
    nondecreasing relative to the anchor.
    """

    __slots__ = ("n", "s1", "s2", "s3", "s4", "t0", "t1", "t2")

    def __init__(self):
        self.n = 0
        self.s1 = self.s2 = self.s3 = self.s4 = 0.0
        self.t0 = self.t1 = self.t2 = 0.0

    def push(self, tau: float, value: float):
        u = tau * _TAU_SCALE
        u2 = u * u
        self.n += 1
        self.s1 += u
        self.s2 += u2
        self.s3 += u2 * u
        self.s4 += u2 * u2
        self.t0 += value
        self.t1 += value * u
        self.t2 += value * u2

    def coefficients(self):
        """(c0, c1, c2) in scaled tau, or None when underdetermined."""
        if self.n < 3:
            return None
        a, b, c = float(self.n), self.s1, self.s2
        d, e, f = self.s1, self.s2, self.s3
        g, h, i = self.s2, self.s3, self.s4
        det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
        if abs(det) < 1e-12 * max(1.0, a * e * i):
            return None
        c0 = (self.t0 * (e * i - f * h) - b * (self.t1 * i - f * self.t2)
              + c * (self.t1 * h - e * self.t2)) / det
        c1 = (a * (self.t1 * i - f * self.t2) - self.t0 * (d * i - f * g)
              + c * (d * self.t2 - self.t1 * g)) / det
        c2 = (a * (e * self.t2 - self.t1 * h) - b * (d * self.t2 - self.t1 * g)
              + self.t0 * (d * h - e * g)) / det
        return c0, c1, c2

    def predict(self, tau: float):
        coef = self.coefficients()
        if coef is None:
            return None
        u = tau * _TAU_SCALE
        return coef[0] + coef[1] * u + coef[2] * u * u


@dataclass
class EstimateHistory:
    """Raw estimates for one site plus the running trend fits.

    Single writer per site; the anchor (first estimate's stamp) is time
    zero for the quadratic fits.
    """

    site_id: str
    stamps: list = field(default_factory=list)
    offsets: list = field(default_factory=list)
    gains: list = field(default_factory=list)
    _offset_fit: ExpandingQuadFit = field(default_factory=ExpandingQuadFit)
    _gain_fit: ExpandingQuadFit = field(default_factory=ExpandingQuadFit)

    def __len__(self):
        return len(self.stamps)

    @property
    def anchor(self) -> int | None:
        return self.stamps[0] if self.stamps else None

    def append(self, est: CalibrationEstimate):
        if est.source != RAW:
            raise ValueError("history stores raw estimates only")
        if self.stamps and est.stamp <= self.stamps[-1]:
            raise ValueError("estimates must arrive in increasing time order")
        self.stamps.append(est.stamp)
        self.offsets.append(est.offset)
        self.gains.append(est.gain)
        tau = float(est.stamp - self.stamps[0])
        self._offset_fit.push(tau, est.offset)
        self._gain_fit.push(tau, est.gain)

    def latest_raw(self) -> CalibrationEstimate:
        if not self.stamps:
            raise InsufficientDataError("no raw estimates recorded")
        return CalibrationEstimate(self.stamps[-1], self.offsets[-1], self.gains[-1], RAW)

    def trend_coefficients(self, which: str = "gain"):
        """(c0, c1, c2) of the current fit in per-hour units, or None while
        the trend is underdetermined."""
        if which not in ("gain", "offset"):
            raise ValueError("which must be 'gain' or 'offset'")
        fit = self._gain_fit if which == "gain" else self._offset_fit
        coef = fit.coefficients()
        if coef is None:
            return None
        c0, c1, c2 = coef
        return (c0, c1 * _TAU_SCALE, c2 * _TAU_SCALE * _TAU_SCALE)

    def trend_at(self, stamp) -> CalibrationEstimate:
        """Trend-smoothed estimate at `stamp`; falls back to the most recent
        raw estimate (source stays "raw", which is the flag) below 3 points.

        Evaluation time is clamped to the last raw estimate: the quadratic
        is a smoother, not a forecaster, and must not extrapolate through
        periods where no estimates could be computed.
        """
        if not self.stamps:
            raise InsufficientDataError("no raw estimates recorded")
        stamp = to_epoch_hour(stamp)
        tau = float(min(stamp, self.stamps[-1]) - self.stamps[0])
        offset = self._offset_fit.predict(tau)
        gain = self._gain_fit.predict(tau)
        if offset is None or gain is None:
            return self.latest_raw()
        return CalibrationEstimate(stamp, offset, max(0.0, gain), TREND)


def quadratic_trend(history: EstimateHistory, stamp) -> CalibrationEstimate:
    """Trend estimate at `stamp` from the raw estimates up to that time.

    Unlike EstimateHistory.trend_at (incremental, always at the newest
    point) this refits from scratch over the subset with stamps <= stamp,
    so it can be asked about any past time.
    """
    stamp = to_epoch_hour(stamp)
    if not history.stamps:
        raise InsufficientDataError("no raw estimates recorded")
    stamps = np.asarray(history.stamps, dtype=np.int64)
    k = int(np.searchsorted(stamps, stamp, side="right"))
    if k < 3:
        if k == 0:
            raise InsufficientDataError("no raw estimates at or before the requested time")
        return CalibrationEstimate(history.stamps[k - 1], history.offsets[k - 1],
                                   history.gains[k - 1], RAW)
    fit_o, fit_g = ExpandingQuadFit(), ExpandingQuadFit()
    t0 = history.stamps[0]
    for i in range(k):
        tau = float(history.stamps[i] - t0)
        fit_o.push(tau, history.offsets[i])
        fit_g.push(tau, history.gains[i])
    tau_eval = float(min(stamp, history.stamps[k - 1]) - t0)
    offset = fit_o.predict(tau_eval)
    gain = fit_g.predict(tau_eval)
    if offset is None or gain is None:
        return CalibrationEstimate(history.stamps[k - 1], history.offsets[k - 1],
                                   history.gains[k - 1], RAW)
    return CalibrationEstimate(stamp, offset, max(0.0, gain), TREND)


def decompose(history: EstimateHistory, which: str = "gain"):
    """Split a raw estimate series into (trend, residual), residual = raw - trend.

    The trend at each point is the expanding fit through that point, i.e.
    what the control chart showed at that moment. Points before the fit is
    determined (< 3) use the raw value itself, giving zero residual there.
    """
    if which not in ("gain", "offset"):
        raise ValueError("which must be 'gain' or 'offset'")
    if not history.stamps:
        raise InsufficientDataError("no raw estimates recorded")
    raw = np.asarray(history.gains if which == "gain" else history.offsets, dtype=np.float64)
    stamps = np.asarray(history.stamps, dtype=np.int64)
    t0 = stamps[0]
    fit = ExpandingQuadFit()
    trend = np.empty_like(raw)
    for i, (s, v) in enumerate(zip(stamps, raw)):
        tau = float(s - t0)
        fit.push(tau, v)
        pred = fit.predict(tau)
        trend[i] = v if pred is None else pred
    return stamps, trend, raw - trend
