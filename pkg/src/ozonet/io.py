"""File formats: series CSV, network configuration, result exports.

The series format is a plain CSV with header `timestamp,site_id,value_ppb`;
timestamps are ISO-8601 UTC on whole hours (YYYY-MM-DDTHH:00:00Z). Input
row order is free; outputs are always sorted by (site_id, timestamp).
Configuration is a single JSON document, documented in the README.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ozonet.alarms import Thresholds
from ozonet.errors import ConfigError
from ozonet.proxy import (
    STRATEGY_AADT,
    STRATEGY_EXPLICIT,
    STRATEGY_MEDIAN,
    STRATEGY_NEAREST,
    SiteRecord,
)
from ozonet.timeseries import (
    TimeSeries,
    VALUE_MAX,
    VALUE_MIN,
    format_iso_hour,
    parse_iso_hour,
)

SERIES_HEADER = ["timestamp", "site_id", "value_ppb"]
CHART_HEADER = [
    "timestamp", "p_ks", "a0_raw", "a1_raw", "a0_trend", "a1_trend",
    "breach_ks", "breach_a0", "breach_a1", "alarm_ks", "alarm_a0", "alarm_a1",
    "corrected_flag", "raw_value", "output_value",
]
CORRECTED_HEADER = ["timestamp", "raw", "output", "corrected_flag"]
PROXY_SCORE_HEADER = [
    "site_id", "strategy", "alarm_frac_ks", "alarm_frac_a0", "alarm_frac_a1",
    "corrected_frac", "mab", "r2", "monitored_hours",
]

_VALID_STRATEGIES = (STRATEGY_NEAREST, STRATEGY_MEDIAN, STRATEGY_AADT, STRATEGY_EXPLICIT)


def _fmt_value(v: float) -> str:
    return f"{v:.4f}"


def _fmt_stat(v) -> str:
    return "" if v is None else f"{v:.6g}"


def _fmt_flag(v) -> str:
    return "" if v is None else str(int(v))


# ---------------------------------------------------------------- series CSV

@dataclass
class SeriesIssue:
    path: str
    line: int          # 1-based, header is line 1
    column: str
    message: str

    def __str__(self):
        return f"{self.path}:{self.line} [{self.column}] {self.message}"


@dataclass
class CoverageRow:
    site_id: str
    n_hours: int
    first: int
    last: int

    @property
    def span_hours(self) -> int:
        return self.last - self.first + 1

    @property
    def completeness(self) -> float:
        return self.n_hours / self.span_hours


@dataclass
class ValidationReport:
    issues: list = field(default_factory=list)
    coverage: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def render(self) -> str:
        lines = []
        for issue in self.issues:
            lines.append(f"error: {issue}")
        lines.append(f"{'site':<16}{'hours':>8}{'first':>22}{'last':>22}{'complete':>10}")
        for row in sorted(self.coverage, key=lambda r: r.site_id):
            lines.append(
                f"{row.site_id:<16}{row.n_hours:>8}{format_iso_hour(row.first):>22}"
                f"{format_iso_hour(row.last):>22}{row.completeness:>10.3f}"
            )
        return "\n".join(lines)


def scan_series_csv(paths) -> tuple[dict, ValidationReport]:
    """Parse one or more series files, collecting every issue found.

    Returns ({site_id: TimeSeries}, report). The series dict contains only
    cleanly parsed data; callers that need strictness should check
    report.ok first.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    issues: list[SeriesIssue] = []
    seen: dict[tuple, tuple] = {}     # (site, hour) -> (path, line)
    per_site: dict[str, list] = {}

    for path in paths:
        path = str(path)
        try:
            handle = open(path, newline="")
        except OSError as exc:
            issues.append(SeriesIssue(path, 0, "-", f"cannot open: {exc}"))
            continue
        with handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                issues.append(SeriesIssue(path, 1, "-", "empty file"))
                continue
            if [h.strip() for h in header] != SERIES_HEADER:
                issues.append(SeriesIssue(
                    path, 1, "-",
                    f"bad header {header!r}, expected {','.join(SERIES_HEADER)}"))
                continue
            for lineno, row in enumerate(reader, start=2):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) != 3:
                    issues.append(SeriesIssue(path, lineno, "-",
                                              f"expected 3 fields, got {len(row)}"))
                    continue
                stamp_text, site_id, value_text = (f.strip() for f in row)
                try:
                    hour = parse_iso_hour(stamp_text)
                except ValueError as exc:
                    issues.append(SeriesIssue(path, lineno, "timestamp", str(exc)))
                    continue
                if not site_id:
                    issues.append(SeriesIssue(path, lineno, "site_id", "empty site id"))
                    continue
                try:
                    value = float(value_text)
                except ValueError:
                    issues.append(SeriesIssue(path, lineno, "value_ppb",
                                              f"not a number: {value_text!r}"))
                    continue
                if not np.isfinite(value) or not VALUE_MIN <= value <= VALUE_MAX:
                    issues.append(SeriesIssue(
                        path, lineno, "value_ppb",
                        f"value {value} outside [{VALUE_MIN}, {VALUE_MAX}]"))
                    continue
                key = (site_id, hour)
                if key in seen:
                    first_path, first_line = seen[key]
                    issues.append(SeriesIssue(
                        path, lineno, "timestamp",
                        f"duplicate of {first_path}:{first_line} "
                        f"(site {site_id} at {stamp_text})"))
                    continue
                seen[key] = (path, lineno)
                per_site.setdefault(site_id, []).append((hour, value))

    series = {}
    coverage = []
    for site_id, pairs in per_site.items():
        pairs.sort()
        hours = np.array([h for h, _ in pairs], dtype=np.int64)
        values = np.array([v for _, v in pairs], dtype=np.float64)
        series[site_id] = TimeSeries(site_id, hours, values)
        coverage.append(CoverageRow(site_id, len(pairs), int(hours[0]), int(hours[-1])))
    return series, ValidationReport(issues, coverage)


def read_series_csv(paths) -> dict:
    """Strict load: raises ConfigError naming the first problem found."""
    series, report = scan_series_csv(paths)
    if not report.ok:
        raise ConfigError(str(report.issues[0]))
    return series


def write_series_csv(path, series_map: dict):
    """Write all series sorted by (site_id, timestamp)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SERIES_HEADER)
        for site_id in sorted(series_map):
            ts = series_map[site_id]
            for hour, value in zip(ts.hours.tolist(), ts.values.tolist()):
                writer.writerow([format_iso_hour(hour), site_id, _fmt_value(value)])


# ------------------------------------------------------------ result exports

def write_chart_csv(path, rows):
    """Control-chart history export, one row per stepped hour."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CHART_HEADER)
        for r in rows:
            writer.writerow([
                format_iso_hour(r.stamp),
                _fmt_stat(r.p_ks),
                _fmt_stat(r.offset_raw), _fmt_stat(r.gain_raw),
                _fmt_stat(r.offset_trend), _fmt_stat(r.gain_trend),
                _fmt_flag(r.breach_ks), _fmt_flag(r.breach_offset), _fmt_flag(r.breach_gain),
                _fmt_flag(r.alarm_ks), _fmt_flag(r.alarm_offset), _fmt_flag(r.alarm_gain),
                _fmt_flag(r.corrected),
                _fmt_stat(r.raw_value), _fmt_stat(r.output_value),
            ])


def write_corrected_csv(path, rows):
    """Per-site corrected output; hours without a sensor reading are gaps."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CORRECTED_HEADER)
        for r in rows:
            if r.raw_value is None:
                continue
            writer.writerow([
                format_iso_hour(r.stamp),
                _fmt_value(r.raw_value),
                _fmt_value(r.output_value),
                str(int(r.corrected)),
            ])


def write_proxy_scores_csv(path, scores):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(PROXY_SCORE_HEADER)
        for s in scores:
            writer.writerow([
                s.site_id, s.strategy,
                f"{s.alarm_fraction_ks:.4f}", f"{s.alarm_fraction_offset:.4f}",
                f"{s.alarm_fraction_gain:.4f}", f"{s.corrected_fraction:.4f}",
                f"{s.mab:.4f}", "" if s.r2 is None else f"{s.r2:.4f}",
                s.monitored_hours,
            ])


def write_grid_csv(path, grid):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["lat", "lon", "value_ppb"])
        for lat, lon, value in grid.cells():
            writer.writerow([f"{lat:.6f}", f"{lon:.6f}", _fmt_value(value)])


def write_json(path, payload: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


# ------------------------------------------------------------- network config

@dataclass
class ProxyPolicy:
    strategy: str = STRATEGY_NEAREST
    overrides: dict = field(default_factory=dict)    # test site -> proxy site
    median_min_reporters: int = 3
    median_exclude_self: bool = False


@dataclass
class NetworkConfig:
    sites: list
    thresholds: Thresholds = field(default_factory=Thresholds)
    proxy: ProxyPolicy = field(default_factory=ProxyPolicy)
    series: list = field(default_factory=list)       # paths, relative to the config
    output_dir: str = "out"

    def __post_init__(self):
        ids = [s.site_id for s in self.sites]
        if len(ids) != len(set(ids)):
            raise ConfigError("site ids must be unique")
        known = set(ids)
        for test, prox in self.proxy.overrides.items():
            if test not in known or prox not in known:
                raise ConfigError(f"proxy override {test} -> {prox} names unknown sites")
            if test == prox:
                raise ConfigError(f"site {test} cannot be its own proxy")
        if self.proxy.strategy not in _VALID_STRATEGIES:
            raise ConfigError(f"unknown proxy strategy {self.proxy.strategy!r}")

    def site_map(self) -> dict:
        return {s.site_id: s for s in self.sites}

    def to_dict(self) -> dict:
        return {
            "sites": [dataclasses.asdict(s) for s in self.sites],
            "thresholds": dataclasses.asdict(self.thresholds),
            "proxy": dataclasses.asdict(self.proxy),
            "series": list(self.series),
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        try:
            sites = [SiteRecord(**raw) for raw in data["sites"]]
            thresholds = Thresholds(**data.get("thresholds", {}))
            proxy = ProxyPolicy(**data.get("proxy", {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad configuration: {exc}") from exc
        return cls(
            sites=sites,
            thresholds=thresholds,
            proxy=proxy,
            series=list(data.get("series", [])),
            output_dir=data.get("output_dir", "out"),
        )


def load_network_config(path) -> NetworkConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return NetworkConfig.from_dict(data)


def save_network_config(config: NetworkConfig, path):
    write_json(path, config.to_dict())
