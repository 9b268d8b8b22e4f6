"""Command-line surface: validate, run, proxy-eval, simulate, map.

Exit codes: 0 success, 1 input error, 2 runtime failure. Series paths on
the command line override the list in the configuration file; relative
paths in the config resolve against the config file's directory. The
output directory comes from --out, else the OZONET_OUT_DIR environment
variable, else the config.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from ozonet import io as ozio
from ozonet.alarms import SiteEngine, Thresholds
from ozonet.errors import ConfigError, InsufficientDataError, OzonetError
from ozonet.metrics import idw_grid
from ozonet.proxy import (
    ROLE_LOW_COST,
    ROLE_REFERENCE,
    STRATEGY_AADT,
    STRATEGY_MEDIAN,
    STRATEGY_NEAREST,
    evaluate_proxy,
    nearest_reference,
    network_median_series,
    similar_aadt,
)
from ozonet.simulate import Scenario, run_scenario
from ozonet.svgout import heatmap_svg, proxy_eval_svg
from ozonet.timeseries import parse_iso_hour

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_RUNTIME = 2


def _add_threshold_flags(sub):
    sub.add_argument("--td-hours", type=int, help="rolling window length, hours")
    sub.add_argument("--tf-hours", type=int, help="persistence before alarm, hours")
    sub.add_argument("--alarm-count", type=int,
                     help="latched alarms required before correcting (1 or 2)")
    sub.add_argument("--completeness-min", type=float,
                     help="minimum window completeness fraction")


def _apply_threshold_flags(th: Thresholds, args) -> Thresholds:
    updates = {}
    if args.td_hours is not None:
        updates["td_hours"] = args.td_hours
    if args.tf_hours is not None:
        updates["tf_hours"] = args.tf_hours
    if args.alarm_count is not None:
        updates["correction_alarm_count"] = args.alarm_count
    if args.completeness_min is not None:
        updates["completeness_min"] = args.completeness_min
    return dataclasses.replace(th, **updates) if updates else th


def _series_paths(config_path: Path, config, extra) -> list:
    if extra:
        return [Path(p) for p in extra]
    base = config_path.parent
    return [base / p for p in config.series]


def _out_dir(args, config) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    env = os.environ.get("OZONET_OUT_DIR")
    if env:
        return Path(env)
    return Path(config.output_dir)


def _resolve_proxy_series(site, config, series_map):
    """Returns (label, proxy TimeSeries or None)."""
    policy = config.proxy
    if site.site_id in policy.overrides:
        pid = policy.overrides[site.site_id]
        return pid, series_map.get(pid)
    if policy.strategy == STRATEGY_MEDIAN:
        exclude = (site.site_id,) if policy.median_exclude_self else ()
        med = network_median_series(list(series_map.values()),
                                    policy.median_min_reporters, exclude)
        return "network_median", med if len(med) else None
    if policy.strategy == STRATEGY_AADT:
        assignment = similar_aadt(site, config.sites)
    else:
        assignment = nearest_reference(site, config.sites)
    return assignment.proxy_site_id, series_map.get(assignment.proxy_site_id)


# ------------------------------------------------------------------ validate

def cmd_validate(args) -> int:
    config_path = Path(args.config)
    config = ozio.load_network_config(config_path)
    paths = _series_paths(config_path, config, args.series)
    if not paths:
        print("error: no series files configured", file=sys.stderr)
        return EXIT_INPUT
    series, report = ozio.scan_series_csv(paths)
    known = {s.site_id for s in config.sites}
    for sid in sorted(series):
        if sid not in known:
            report.issues.append(ozio.SeriesIssue(
                "-", 0, "site_id", f"series present for unconfigured site {sid}"))
    print(report.render())
    return EXIT_OK if report.ok else EXIT_INPUT


# ----------------------------------------------------------------------- run

def cmd_run(args) -> int:
    config_path = Path(args.config)
    config = ozio.load_network_config(config_path)
    th = _apply_threshold_flags(config.thresholds, args)
    series_map = ozio.read_series_csv(_series_paths(config_path, config, args.series))
    out = _out_dir(args, config)

    summary = []
    failures = 0
    ran = 0
    for site in config.sites:
        if site.role != ROLE_LOW_COST:
            continue
        sensor = series_map.get(site.site_id)
        if sensor is None or not len(sensor):
            summary.append((site.site_id, "-", 0, 0.0, 0.0, 0.0, 0.0, "no sensor data"))
            failures += 1
            continue
        try:
            proxy_label, proxy_series = _resolve_proxy_series(site, config, series_map)
        except InsufficientDataError as exc:
            summary.append((site.site_id, "-", 0, 0.0, 0.0, 0.0, 0.0, str(exc)))
            failures += 1
            continue
        if proxy_series is None or not len(proxy_series):
            summary.append((site.site_id, proxy_label, 0, 0.0, 0.0, 0.0, 0.0,
                            "no proxy data"))
            failures += 1
            continue
        result = SiteEngine(site.site_id, sensor, proxy_series, th).run()
        ozio.write_corrected_csv(out / "corrected" / f"{site.site_id}.csv", result.rows)
        ozio.write_chart_csv(out / "charts" / f"{site.site_id}.csv", result.rows)
        fr = result.alarm_fractions()
        note = "" if result.monitored else "no monitored hours"
        summary.append((site.site_id, proxy_label, len(result.monitored),
                        fr["ks"], fr["offset"], fr["gain"],
                        result.corrected_fraction(), note))
        ran += 1

    header = (f"{'site':<14}{'proxy':<18}{'hours':>7}{'ks%':>7}{'a0%':>7}"
              f"{'a1%':>7}{'corr%':>7}  note")
    lines = [header]
    for sid, proxy_label, hours, ks, a0, a1, corr, note in summary:
        lines.append(f"{sid:<14}{proxy_label:<18}{hours:>7}{100 * ks:>7.1f}"
                     f"{100 * a0:>7.1f}{100 * a1:>7.1f}{100 * corr:>7.1f}  {note}")
    print("\n".join(lines))
    (out / "summary.csv").parent.mkdir(parents=True, exist_ok=True)
    with open(out / "summary.csv", "w") as handle:
        handle.write("site_id,proxy,monitored_hours,alarm_frac_ks,alarm_frac_a0,"
                     "alarm_frac_a1,corrected_frac,note\n")
        for sid, proxy_label, hours, ks, a0, a1, corr, note in summary:
            handle.write(f"{sid},{proxy_label},{hours},{ks:.4f},{a0:.4f},"
                         f"{a1:.4f},{corr:.4f},{note}\n")
    if ran == 0:
        print("error: no site could be monitored", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


# ---------------------------------------------------------------- proxy-eval

def cmd_proxy_eval(args) -> int:
    config_path = Path(args.config)
    config = ozio.load_network_config(config_path)
    th = _apply_threshold_flags(config.thresholds, args)
    series_map = ozio.read_series_csv(_series_paths(config_path, config, args.series))
    out = _out_dir(args, config)

    refs = [s for s in config.sites if s.role == ROLE_REFERENCE]
    if len(refs) < 2:
        print("error: proxy evaluation needs at least two reference sites",
              file=sys.stderr)
        return EXIT_INPUT

    scores = []
    for site in refs:
        test_series = series_map.get(site.site_id)
        if test_series is None:
            print(f"warning: no data for reference {site.site_id}, skipped",
                  file=sys.stderr)
            continue
        candidates = []
        try:
            a = nearest_reference(site, config.sites)
            candidates.append((STRATEGY_NEAREST, series_map.get(a.proxy_site_id)))
        except InsufficientDataError:
            pass
        exclude = (site.site_id,) if config.proxy.median_exclude_self else ()
        med = network_median_series(list(series_map.values()),
                                    config.proxy.median_min_reporters, exclude)
        if len(med):
            candidates.append((STRATEGY_MEDIAN, med))
        try:
            a = similar_aadt(site, config.sites)
            candidates.append((STRATEGY_AADT, series_map.get(a.proxy_site_id)))
        except InsufficientDataError:
            pass
        for strategy, proxy_series in candidates:
            if proxy_series is None or not len(proxy_series):
                print(f"warning: {strategy} proxy for {site.site_id} has no data",
                      file=sys.stderr)
                continue
            try:
                scores.append(evaluate_proxy(test_series, proxy_series, th, strategy))
            except InsufficientDataError as exc:
                print(f"warning: {site.site_id}/{strategy}: {exc}", file=sys.stderr)

    if not scores:
        print("error: no (site, strategy) pair could be evaluated", file=sys.stderr)
        return EXIT_RUNTIME
    ozio.write_proxy_scores_csv(out / "proxy_scores.csv", scores)
    proxy_eval_svg(scores, out / "proxy_eval.svg")
    print(f"{'site':<14}{'strategy':<18}{'ks%':>7}{'a0%':>7}{'a1%':>7}"
          f"{'corr%':>7}{'mab':>8}{'r2':>7}")
    for s in scores:
        r2 = "" if s.r2 is None else f"{s.r2:.3f}"
        print(f"{s.site_id:<14}{s.strategy:<18}{100 * s.alarm_fraction_ks:>7.1f}"
              f"{100 * s.alarm_fraction_offset:>7.1f}{100 * s.alarm_fraction_gain:>7.1f}"
              f"{100 * s.corrected_fraction:>7.1f}{s.mab:>8.2f}{r2:>7}")
    return EXIT_OK


# ------------------------------------------------------------------ simulate

def cmd_simulate(args) -> int:
    scenario_path = Path(args.scenario)
    try:
        data = json.loads(scenario_path.read_text())
        scenario = Scenario.from_dict(data)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {scenario_path}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario {scenario_path}: {exc}") from exc

    out = Path(args.out) if args.out else Path(os.environ.get("OZONET_OUT_DIR", "sim_out"))
    result = run_scenario(scenario)
    ozio.write_series_csv(out / "observed.csv", result.observed)
    ozio.write_series_csv(out / "truth.csv", result.truth)
    ozio.write_json(out / "manifest.json", result.manifest)
    network = ozio.NetworkConfig(sites=result.records, series=["observed.csv"],
                                 output_dir="run_out")
    ozio.save_network_config(network, out / "network.json")
    print(f"wrote {len(result.observed)} observed and {len(result.truth)} truth "
          f"series to {out} (seed {scenario.seed}, "
          f"config {result.manifest['config_sha256'][:12]})")
    return EXIT_OK


# ----------------------------------------------------------------------- map

def _parse_bbox(text: str):
    try:
        lat_min, lat_max, lon_min, lon_max = (float(p) for p in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad bbox {text!r}: expected latmin,latmax,lonmin,lonmax") from exc
    return lat_min, lat_max, lon_min, lon_max


def cmd_map(args) -> int:
    config_path = Path(args.config)
    config = ozio.load_network_config(config_path)
    series_map = ozio.read_series_csv(_series_paths(config_path, config, args.series))
    out = _out_dir(args, config)
    try:
        hour = parse_iso_hour(args.hour)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    site_map = config.site_map()
    points = []
    for sid, series in series_map.items():
        record = site_map.get(sid)
        value = series.value_at(hour)
        if record is not None and value is not None:
            points.append((record, value))
    if not points:
        print(f"error: no site reported at {args.hour}", file=sys.stderr)
        return EXIT_INPUT

    if args.bbox:
        bbox = _parse_bbox(args.bbox)
    else:
        lats = [r.latitude for r, _ in points]
        lons = [r.longitude for r, _ in points]
        pad = max(args.cell, 0.02)
        bbox = (min(lats) - pad, max(lats) + pad, min(lons) - pad, max(lons) + pad)

    full = idw_grid([(r.latitude, r.longitude, v) for r, v in points],
                    *bbox, cell_deg=args.cell, power=args.power)
    ozio.write_grid_csv(out / "grid.csv", full)
    panels = [("all sites", full)]
    if args.split:
        ref_points = [(r, v) for r, v in points if r.role == ROLE_REFERENCE]
        if not ref_points:
            print("error: --split needs at least one reporting reference site",
                  file=sys.stderr)
            return EXIT_INPUT
        ref = idw_grid([(r.latitude, r.longitude, v) for r, v in ref_points],
                       *bbox, cell_deg=args.cell, power=args.power)
        ozio.write_grid_csv(out / "grid_reference.csv", ref)
        panels.insert(0, ("reference only", ref))
    heatmap_svg(panels, out / "map.svg",
                sites=[(r.latitude, r.longitude) for r, _ in points])
    print(f"wrote {out / 'grid.csv'} and {out / 'map.svg'} "
          f"({len(points)} sites at {args.hour})")
    return EXIT_OK


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ozonet",
        description="Proxy-based monitoring and semi-blind recalibration "
                    "for hierarchical ozone sensor networks.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("validate", help="check series files against the schema")
    p.add_argument("config")
    p.add_argument("series", nargs="*")
    p.set_defaults(func=cmd_validate)

    p = subs.add_parser("run", help="monitor and correct every low-cost site")
    p.add_argument("config")
    p.add_argument("series", nargs="*")
    p.add_argument("--out", help="output directory")
    _add_threshold_flags(p)
    p.set_defaults(func=cmd_run)

    p = subs.add_parser("proxy-eval",
                        help="score proxy strategies against reference sites")
    p.add_argument("config")
    p.add_argument("series", nargs="*")
    p.add_argument("--out", help="output directory")
    _add_threshold_flags(p)
    p.set_defaults(func=cmd_proxy_eval)

    p = subs.add_parser("simulate", help="generate a synthetic network dataset")
    p.add_argument("scenario")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("map", help="grid one hour of the network by IDW")
    p.add_argument("config")
    p.add_argument("series", nargs="*")
    p.add_argument("--hour", required=True, help="ISO hour, e.g. 2018-03-05T14:00:00Z")
    p.add_argument("--bbox", help="latmin,latmax,lonmin,lonmax (default: site extent)")
    p.add_argument("--cell", type=float, default=0.02, help="cell size, degrees")
    p.add_argument("--power", type=float, default=2.0, help="IDW distance power")
    p.add_argument("--split", action="store_true",
                   help="also grid the reference network alone, side by side")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_map)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OzonetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
