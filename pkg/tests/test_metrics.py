"""Pair metrics, buddy co-location checks, and IDW gridding."""

import numpy as np
import pytest

from ozonet import InsufficientDataError, TimeSeries, buddy_check, idw_grid, pair_metrics
from ozonet.geo import haversine_km


def hourly(site, start, values):
    return TimeSeries(site, np.arange(start, start + len(values), dtype=np.int64),
                      np.asarray(values, dtype=float))


class TestHaversine:
    def test_zero_distance(self):
        assert haversine_km(34.0, -118.0, 34.0, -118.0) == 0.0

    def test_one_degree_latitude(self):
        # R * pi / 180 = 111.19 km on the reference sphere
        assert haversine_km(0.0, 0.0, 1.0, 0.0) == pytest.approx(111.19, abs=0.01)

    def test_broadcasts(self):
        d = haversine_km(0.0, 0.0, np.array([0.0, 1.0]), np.array([0.0, 0.0]))
        assert d.shape == (2,)
        assert d[0] == 0.0


class TestPairMetrics:
    def test_identical_series(self):
        a = hourly("a", 0, np.sin(np.arange(100.0)) * 10 + 30)
        m = pair_metrics(a, a)
        assert m.mab == 0.0
        assert m.rmsd == 0.0
        assert m.r2 == pytest.approx(1.0)

    def test_constant_offset(self):
        values = np.sin(np.arange(100.0)) * 10 + 30
        a = hourly("a", 0, values)
        b = hourly("b", 0, values + 5.0)
        m = pair_metrics(a, b)
        assert m.mab == pytest.approx(5.0)
        assert m.rmsd == pytest.approx(5.0)
        assert m.r2 == pytest.approx(1.0)

    def test_sign_flip_keeps_squared_correlation(self):
        centered = np.sin(np.arange(100.0)) * 10
        a = hourly("a", 0, centered)
        b = hourly("b", 0, -centered)
        m = pair_metrics(a, b)
        assert m.r2 == pytest.approx(1.0)
        assert m.mab == pytest.approx(np.abs(2 * centered).mean())

    def test_zero_variance_side_drops_r2(self):
        a = hourly("a", 0, [1.0, 2.0, 3.0])
        b = hourly("b", 0, [4.0, 4.0, 4.0])
        m = pair_metrics(a, b)
        assert m.r2 is None
        assert m.mab == pytest.approx(np.abs([3.0, 2.0, 1.0]).mean())

    def test_too_few_pairs(self):
        a = hourly("a", 0, [1.0])
        with pytest.raises(InsufficientDataError):
            pair_metrics(a, a)

    def test_symmetry(self):
        rng = np.random.default_rng(13)
        a = hourly("a", 0, rng.uniform(0, 60, 80))
        b = hourly("b", 0, rng.uniform(0, 60, 80))
        m1, m2 = pair_metrics(a, b), pair_metrics(b, a)
        assert m1.mab == m2.mab
        assert m1.rmsd == m2.rmsd
        assert m1.r2 == pytest.approx(m2.r2, rel=1e-12)


class TestBuddyCheck:
    def test_identical_series_pass(self):
        values = np.sin(np.arange(72.0)) * 10 + 30
        buddy = hourly("buddy", 0, values)
        local = hourly("local", 0, values)
        result = buddy_check(buddy, local)
        assert result.passed
        assert np.all(result.diffs == 0.0)

    def test_offset_beyond_tolerance_fails(self):
        values = np.sin(np.arange(72.0)) * 10 + 30
        result = buddy_check(hourly("b", 0, values), hourly("l", 0, values + 12.0))
        assert not result.passed

    def test_occasional_spikes_tolerated(self):
        values = np.full(100, 30.0)
        noisy = values.copy()
        noisy[[10, 40, 70, 90]] += 25.0          # 4% of hours outside
        result = buddy_check(hourly("b", 0, values), hourly("l", 0, noisy))
        assert result.passed
        assert result.within_fraction == pytest.approx(0.96)

    def test_insufficient_overlap(self):
        values = np.full(40, 30.0)
        with pytest.raises(InsufficientDataError):
            buddy_check(hourly("b", 0, values), hourly("l", 0, values))

    def test_self_check_always_passes(self):
        rng = np.random.default_rng(14)
        for _ in range(5):
            values = np.clip(rng.normal(30, 8, 60), -10, 500)
            ts = hourly("x", 0, values)
            assert buddy_check(ts, ts).passed


class TestIdwGrid:
    def test_single_site_uniform_field(self):
        grid = idw_grid([(34.0, -118.0, 42.0)], 33.9, 34.1, -118.1, -117.9, 0.05)
        assert np.all(grid.values == 42.0)

    def test_midpoint_between_two_sites(self):
        # cell centred exactly between equal-distance sites averages them
        grid = idw_grid([(0.0, -0.1, 20.0), (0.0, 0.1, 40.0)],
                        -0.05, 0.05, -0.05, 0.05, 0.1)
        assert grid.values.shape == (1, 1)
        assert grid.values[0, 0] == pytest.approx(30.0)

    def test_exact_hit_takes_site_value(self):
        # cell centre at (0.05, 0.05) coincides with a site
        grid = idw_grid([(0.05, 0.05, 77.0), (0.3, 0.3, 10.0)],
                        0.0, 0.1, 0.0, 0.1, 0.1)
        assert grid.values[0, 0] == 77.0

    def test_field_bounded_by_inputs(self):
        rng = np.random.default_rng(15)
        sites = [(float(lat), float(lon), float(v)) for lat, lon, v in
                 zip(rng.uniform(33, 35, 12), rng.uniform(-119, -117, 12),
                     rng.uniform(5, 80, 12))]
        grid = idw_grid(sites, 33.0, 35.0, -119.0, -117.0, 0.1)
        values = np.array([v for _, _, v in sites])
        assert grid.values.min() >= values.min() - 1e-9
        assert grid.values.max() <= values.max() + 1e-9

    def test_empty_sites_rejected(self):
        with pytest.raises(InsufficientDataError):
            idw_grid([], 0, 1, 0, 1, 0.1)

    def test_bad_bbox_rejected(self):
        with pytest.raises(ValueError):
            idw_grid([(0.0, 0.0, 1.0)], 1, 0, 0, 1, 0.1)

    def test_cells_iteration_matches_shape(self):
        grid = idw_grid([(0.5, 0.5, 10.0)], 0, 1, 0, 1, 0.25)
        cells = list(grid.cells())
        assert len(cells) == grid.values.size
