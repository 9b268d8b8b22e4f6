"""Pairwise accuracy metrics, co-location checking, and spatial gridding."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ozonet.errors import InsufficientDataError
from ozonet.geo import haversine_km
from ozonet.timeseries import TimeSeries, align

BUDDY_MIN_HOURS = 48
BUDDY_PASS_QUANTILE = 0.95    # fraction of hours that must sit inside tolerance
IDW_EXACT_HIT_KM = 0.001      # treat a site within 1 m of a cell centre as exact


@dataclass(frozen=True)
class PairMetrics:
    """Agreement between two co-timed series."""

    n_pairs: int
    mab: float            # mean absolute bias, ppb
    rmsd: float           # root mean square deviation, ppb
    r2: float | None      # squared Pearson correlation; None if degenerate


def pair_metrics(a: TimeSeries, b: TimeSeries, start=None, end=None) -> PairMetrics:
    """MAB, RMSD, and R^2 over the hours present in both series."""
    _, av, bv = align(a, b, start, end)
    if av.size < 2:
        raise InsufficientDataError(f"need >= 2 aligned pairs, got {av.size}")
    diff = av - bv
    mab = float(np.abs(diff).mean())
    rmsd = float(np.sqrt((diff ** 2).mean()))
    sa, sb = av.std(), bv.std()
    if sa == 0.0 or sb == 0.0:
        r2 = None
    else:
        r = np.corrcoef(av, bv)[0, 1]
        r2 = float(r * r)
    return PairMetrics(int(av.size), mab, rmsd, r2)


@dataclass(frozen=True)
class BuddyCheck:
    """Result of comparing a transfer-calibrated mobile sensor against a
    fixed local sensor during co-location."""

    hours: np.ndarray = field(repr=False)
    diffs: np.ndarray = field(repr=False)   # local - buddy, ppb
    tolerance: float
    passed: bool

    @property
    def within_fraction(self) -> float:
        return float(np.mean(np.abs(self.diffs) <= self.tolerance))


def buddy_check(buddy: TimeSeries, local: TimeSeries, tolerance: float = 10.0) -> BuddyCheck:
    """Pass when at least 95% of co-located hours agree within tolerance.

    Requires 48 hours of overlap so both diurnal cycles are covered; the
    95% rule keeps isolated spikes from failing an otherwise sound sensor.
    """
    hours, bv, lv = align(buddy, local)
    if hours.size < BUDDY_MIN_HOURS:
        raise InsufficientDataError(
            f"need >= {BUDDY_MIN_HOURS} co-located hours, got {hours.size}"
        )
    diffs = lv - bv
    passed = bool(np.mean(np.abs(diffs) <= tolerance) >= BUDDY_PASS_QUANTILE)
    return BuddyCheck(hours, diffs, tolerance, passed)


@dataclass(frozen=True)
class GridField:
    """Interpolated concentration field over a lat/lon bounding box."""

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    cell_deg: float
    lats: np.ndarray = field(repr=False)    # cell-centre latitudes, ascending
    lons: np.ndarray = field(repr=False)    # cell-centre longitudes, ascending
    values: np.ndarray = field(repr=False)  # shape (len(lats), len(lons))

    def cells(self):
        """Yield (lat, lon, value) per cell, row-major."""
        for i, lat in enumerate(self.lats):
            for j, lon in enumerate(self.lons):
                yield float(lat), float(lon), float(self.values[i, j])


def idw_grid(sites, lat_min, lat_max, lon_min, lon_max, cell_deg, power: float = 2.0) -> GridField:
    """Inverse-distance-weighted field from point values.

    `sites` is a sequence of (lat, lon, value). Weights are distance to the
    -power; a cell whose centre falls within 1 m of a site takes that
    site's value exactly (also the division-by-zero guard). Every cell is a
    convex combination of the inputs, so the field is bounded by them.
    """
    sites = list(sites)
    if not sites:
        raise InsufficientDataError("no sites with values to interpolate")
    if cell_deg <= 0 or lat_max <= lat_min or lon_max <= lon_min:
        raise ValueError("bounding box must be non-empty and cell size positive")
    slat = np.array([s[0] for s in sites])
    slon = np.array([s[1] for s in sites])
    svals = np.array([s[2] for s in sites], dtype=np.float64)

    n_lat = max(1, int(np.ceil((lat_max - lat_min) / cell_deg)))
    n_lon = max(1, int(np.ceil((lon_max - lon_min) / cell_deg)))
    lats = lat_min + (np.arange(n_lat) + 0.5) * cell_deg
    lons = lon_min + (np.arange(n_lon) + 0.5) * cell_deg

    grid_lat = np.repeat(lats, n_lon)
    grid_lon = np.tile(lons, n_lat)
    # distance matrix: cells x sites
    dists = haversine_km(grid_lat[:, None], grid_lon[:, None], slat[None, :], slon[None, :])
    dists = np.atleast_2d(dists)
    exact = dists < IDW_EXACT_HIT_KM
    with np.errstate(divide="ignore", invalid="ignore"):
        weights = dists ** (-power)
        weights[exact] = 0.0
        flat = (weights * svals).sum(axis=1) / weights.sum(axis=1)
    hit_rows, hit_cols = np.nonzero(exact)
    if hit_rows.size:
        # nearest exact hit wins when several sites share a cell centre
        order = np.argsort(dists[hit_rows, hit_cols], kind="stable")
        for k in order[::-1]:
            flat[hit_rows[k]] = svals[hit_cols[k]]
    return GridField(lat_min, lat_max, lon_min, lon_max, cell_deg,
                     lats, lons, flat.reshape(n_lat, n_lon))
