"""Numpy fallback for the hot kernels.

Mirrors ozonet.kernels._fast exactly: both backends count sample points
around each pooled breakpoint and divide by (n + 1), so results agree
bit-for-bit for the sup distance.
"""

from __future__ import annotations

import numpy as np


def ks_distance(a, b) -> float:
    """Sup distance between the two empirical CDFs, each normalised by 1/(n+1).

    F(x) counts points strictly below x, so the curve steps just after each
    sample value; the sup is attained at a pooled breakpoint or its right
    limit, and both are evaluated.
    """
    av = np.sort(np.asarray(a, dtype=np.float64))
    bv = np.sort(np.asarray(b, dtype=np.float64))
    m, n = av.size, bv.size
    if m == 0 or n == 0:
        raise ValueError("samples must be non-empty")
    pooled = np.concatenate((av, bv))
    fa_left = np.searchsorted(av, pooled, side="left") / (m + 1.0)
    fb_left = np.searchsorted(bv, pooled, side="left") / (n + 1.0)
    fa_right = np.searchsorted(av, pooled, side="right") / (m + 1.0)
    fb_right = np.searchsorted(bv, pooled, side="right") / (n + 1.0)
    d_left = np.abs(fa_left - fb_left).max()
    d_right = np.abs(fa_right - fb_right).max()
    return float(max(d_left, d_right))


def window_moments(x) -> tuple[float, float]:
    """(mean, unbiased variance) of a window sample; variance 0.0 when n < 2."""
    xv = np.asarray(x, dtype=np.float64)
    if xv.size == 0:
        raise ValueError("sample must be non-empty")
    mean = float(xv.mean())
    var = float(xv.var(ddof=1)) if xv.size > 1 else 0.0
    return mean, var
