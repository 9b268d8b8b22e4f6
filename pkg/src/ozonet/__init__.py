"""Reliable data from low-cost sensor networks anchored by reference sites.

The toolkit monitors each low-cost sensor against a proxy (an independent
trusted series expected to share its concentration distribution), raises
alarms when rolling-window tests stay out of bounds, recalibrates gain and
offset by matching window moments, and ships a deterministic network
simulator that provides ground truth for verification.
"""

from ozonet.alarms import (
    AlarmLedger,
    BreachFlags,
    SiteEngine,
    SiteRunResult,
    Thresholds,
    decide_correction,
    evaluate_breaches,
    run_site,
    update_persistence,
)
from ozonet.calibrate import (
    CalibrationEstimate,
    EstimateHistory,
    apply_correction,
    decompose,
    moment_match,
    quadratic_trend,
)
from ozonet.errors import (
    ConfigError,
    DegenerateWindowError,
    InsufficientDataError,
    OzonetError,
)
from ozonet.kernels import BACKEND as KERNEL_BACKEND
from ozonet.kstest import Ecdf, KsResult, ecdf, ks_pvalue, ks_statistic, ks_test
from ozonet.metrics import (
    BuddyCheck,
    GridField,
    PairMetrics,
    buddy_check,
    idw_grid,
    pair_metrics,
)
from ozonet.proxy import (
    ProxyAssignment,
    ProxyScore,
    SiteRecord,
    evaluate_proxy,
    nearest_reference,
    network_median,
    network_median_series,
    similar_aadt,
)
from ozonet.simulate import (
    DriftSegment,
    Scenario,
    ScenarioResult,
    SensorModel,
    SiteSpec,
    TruthModel,
    apply_sensor_model,
    generate_truth,
    run_scenario,
)
from ozonet.timeseries import (
    Observation,
    TimeSeries,
    WindowSlice,
    align,
    resample_hourly,
    window,
)

__version__ = "0.1.0"

__all__ = [
    "AlarmLedger", "BreachFlags", "BuddyCheck", "CalibrationEstimate",
    "ConfigError", "DegenerateWindowError", "DriftSegment", "Ecdf",
    "EstimateHistory", "GridField", "InsufficientDataError", "KERNEL_BACKEND",
    "KsResult", "Observation", "OzonetError", "PairMetrics", "ProxyAssignment",
    "ProxyScore", "Scenario", "ScenarioResult", "SensorModel", "SiteEngine",
    "SiteRecord", "SiteRunResult", "SiteSpec", "Thresholds", "TimeSeries",
    "TruthModel", "WindowSlice", "align", "apply_correction",
    "apply_sensor_model", "buddy_check", "decide_correction", "decompose",
    "ecdf", "evaluate_breaches", "evaluate_proxy", "generate_truth",
    "idw_grid", "ks_pvalue", "ks_statistic", "ks_test", "moment_match",
    "nearest_reference", "network_median", "network_median_series",
    "pair_metrics", "quadratic_trend", "resample_hourly", "run_scenario",
    "run_site", "similar_aadt", "update_persistence", "window",
]
