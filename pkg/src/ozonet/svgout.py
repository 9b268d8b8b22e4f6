"""Minimal SVG output for report embedding: heat maps and score charts.

Hand-rolled on purpose: outputs are simple vector files any browser or
office tool can open, with no plotting-stack dependency.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

# blue -> pale yellow -> red
_STOPS = ((0.0, (44, 123, 182)), (0.5, (255, 255, 191)), (1.0, (215, 25, 28)))


def _ramp(t: float) -> str:
    t = min(1.0, max(0.0, t))
    for (t0, c0), (t1, c1) in zip(_STOPS, _STOPS[1:]):
        if t <= t1:
            f = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            rgb = tuple(round(a + (b - a) * f) for a, b in zip(c0, c1))
            return f"rgb({rgb[0]},{rgb[1]},{rgb[2]})"
    return "rgb(215,25,28)"


def heatmap_svg(panels, path, sites=None, panel_px: int = 360):
    """Write one or more gridded fields side by side.

    `panels` is a sequence of (label, GridField); `sites` an optional list
    of (lat, lon) drawn as markers on every panel. All panels share one
    colour scale so they are directly comparable.
    """
    panels = list(panels)
    if not panels:
        raise ValueError("no panels to draw")
    vmin = min(float(np.min(g.values)) for _, g in panels)
    vmax = max(float(np.max(g.values)) for _, g in panels)
    span = (vmax - vmin) or 1.0

    margin, title_h = 10, 18
    width = margin + len(panels) * (panel_px + margin)
    height = title_h + panel_px + 28
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">'
    ]
    for p, (label, grid) in enumerate(panels):
        x0 = margin + p * (panel_px + margin)
        y0 = title_h
        n_lat, n_lon = grid.values.shape
        cw = panel_px / n_lon
        ch = panel_px / n_lat
        parts.append(f'<text x="{x0}" y="{title_h - 5}">{label}</text>')
        for i in range(n_lat):
            # latitude increases upward
            y = y0 + (n_lat - 1 - i) * ch
            for j in range(n_lon):
                color = _ramp((float(grid.values[i, j]) - vmin) / span)
                parts.append(
                    f'<rect x="{x0 + j * cw:.1f}" y="{y:.1f}" width="{cw + 0.5:.1f}" '
                    f'height="{ch + 0.5:.1f}" fill="{color}"/>'
                )
        if sites:
            for lat, lon in sites:
                if grid.lat_min <= lat <= grid.lat_max and grid.lon_min <= lon <= grid.lon_max:
                    fx = (lon - grid.lon_min) / (grid.lon_max - grid.lon_min)
                    fy = (lat - grid.lat_min) / (grid.lat_max - grid.lat_min)
                    parts.append(
                        f'<circle cx="{x0 + fx * panel_px:.1f}" '
                        f'cy="{y0 + (1 - fy) * panel_px:.1f}" r="3" fill="none" '
                        f'stroke="black" stroke-width="1.2"/>'
                    )
        parts.append(
            f'<text x="{x0}" y="{y0 + panel_px + 16}">'
            f'{vmin:.1f} - {vmax:.1f} ppb</text>'
        )
    parts.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n")


_BAR_COLORS = {"ks": "#1b9e77", "offset": "#d95f02", "gain": "#7570b3"}


def proxy_eval_svg(scores, path):
    """Per-strategy panels: alarm-time fraction bars per site, MAB labels."""
    scores = list(scores)
    if not scores:
        raise ValueError("no scores to draw")
    strategies = sorted({s.strategy for s in scores})
    sites = sorted({s.site_id for s in scores})
    bar_w, group_w, panel_h, left = 14, 70, 130, 50
    width = left + group_w * len(sites) + 20
    panel_total = panel_h + 58
    height = panel_total * len(strategies) + 10
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="10">'
    ]
    by_key = {(s.site_id, s.strategy): s for s in scores}
    for p, strategy in enumerate(strategies):
        top = 10 + p * panel_total
        base = top + 16 + panel_h
        parts.append(f'<text x="8" y="{top + 12}" font-size="12">{strategy}</text>')
        parts.append(f'<line x1="{left}" y1="{base}" x2="{width - 10}" y2="{base}" '
                     f'stroke="black" stroke-width="1"/>')
        for k, site in enumerate(sites):
            score = by_key.get((site, strategy))
            gx = left + k * group_w
            parts.append(f'<text x="{gx}" y="{base + 12}">{site}</text>')
            if score is None:
                parts.append(f'<text x="{gx}" y="{base + 24}">n/a</text>')
                continue
            fractions = (("ks", score.alarm_fraction_ks),
                         ("offset", score.alarm_fraction_offset),
                         ("gain", score.alarm_fraction_gain))
            for b, (name, frac) in enumerate(fractions):
                h = frac * panel_h
                parts.append(
                    f'<rect x="{gx + b * (bar_w + 2)}" y="{base - h:.1f}" '
                    f'width="{bar_w}" height="{h:.1f}" fill="{_BAR_COLORS[name]}"/>'
                )
            r2 = "" if score.r2 is None else f" r2={score.r2:.2f}"
            parts.append(f'<text x="{gx}" y="{base + 24}">mab={score.mab:.1f}{r2}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n")
