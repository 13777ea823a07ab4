"""Standalone SVG rendering of weekly schedules: prices, power, storage.

No plotting dependency: charts are assembled as plain XML with fixed float
formatting, so identical inputs produce byte-identical files (golden-file
friendly).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from flexsched.errors import IoError

GREY = "#8a8a8a"
BLUE = "#2060c8"
BLACK = "#101010"
RED = "#c82020"


@dataclass(frozen=True)
class ChartSpec:
    width: int = 960
    panel_height: int = 170
    gap: int = 36
    margin_left: int = 62
    margin_right: int = 14
    margin_top: int = 28
    panels: tuple = ("prices", "schedule", "storage")


def _fmt(v):
    return f"{v:.2f}"


class _Panel:
    def __init__(self, spec, index, n_slots, lo, hi, title):
        self.spec = spec
        self.top = spec.margin_top + index * (spec.panel_height + spec.gap)
        self.height = spec.panel_height
        self.left = spec.margin_left
        self.plot_w = spec.width - spec.margin_left - spec.margin_right
        self.n = n_slots
        pad = 0.06 * (hi - lo) if hi > lo else max(1.0, abs(hi)) * 0.1
        self.lo = lo - pad
        self.hi = hi + pad
        self.title = title

    def x(self, slot):
        return self.left + (slot - 1) / max(self.n - 1, 1) * self.plot_w

    def y(self, value):
        frac = (value - self.lo) / (self.hi - self.lo)
        return self.top + self.height * (1.0 - frac)

    def frame(self, out):
        s = self.spec
        out.append(
            f'<rect x="{self.left}" y="{self.top}" width="{self.plot_w}" '
            f'height="{self.height}" fill="none" stroke="#c0c0c0" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{self.left}" y="{self.top - 8}" font-size="13" '
            f'fill="{BLACK}">{self.title}</text>'
        )
        for val in (self.lo, self.hi):
            out.append(
                f'<text x="{self.left - 6}" y="{_fmt(self.y(val) + 4)}" font-size="10" '
                f'fill="#606060" text-anchor="end">{_fmt(val)}</text>'
            )
        for slot in range(1, self.n + 1, 24):
            out.append(
                f'<line x1="{_fmt(self.x(slot))}" y1="{self.top}" x2="{_fmt(self.x(slot))}" '
                f'y2="{self.top + self.height}" stroke="#ebebeb" stroke-width="1"/>'
            )
            out.append(
                f'<text x="{_fmt(self.x(slot))}" y="{self.top + self.height + 14}" '
                f'font-size="10" fill="#606060" text-anchor="middle">{slot}</text>'
            )

    def steps(self, out, series, color, first_slot=1, width=1.4):
        pts = []
        n = len(series)
        for i, v in enumerate(series):
            x0 = self.x(first_slot + i)
            x1 = self.x(min(first_slot + i + 1, self.n))
            y = self.y(v)
            pts.append(f"{_fmt(x0)},{_fmt(y)}")
            pts.append(f"{_fmt(x1)},{_fmt(y)}")
        out.append(
            f'<polyline points="{" ".join(pts)}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"/>'
        )

    def marker(self, out, slot, label):
        x = self.x(slot)
        out.append(
            f'<line x1="{_fmt(x)}" y1="{self.top}" x2="{_fmt(x)}" '
            f'y2="{self.top + self.height}" stroke="{BLUE}" stroke-width="1" '
            f'stroke-dasharray="4 3"/>'
        )
        out.append(
            f'<text x="{_fmt(x)}" y="{self.top + 14}" font-size="12" fill="{BLUE}" '
            f'text-anchor="middle">{label}</text>'
        )


def render_week(day, prices, out_path, spec: ChartSpec = None):
    """Three-panel weekly chart for one DayResult.

    Top: day-ahead prices (grey) with the intraday session prices (blue)
    between the open/close markers. Middle: committed supply, baseline in
    black, flexible in red. Bottom: total stored material, same colors.
    """
    spec = spec or ChartSpec()
    base = day.baseline
    flex = day.flexible
    n = base.n_slots
    if n < 2:
        raise IoError("need at least two slots to draw")
    window = day.window

    da = np.asarray(prices.day_ahead, dtype=np.float64)
    base_supply = base.grid_mw + base.trade_mw
    flex_supply = flex.grid_mw + flex.trade_mw
    store_b = base.storage_t.sum(axis=0)
    store_f = flex.storage_t.sum(axis=0)

    out = []
    height = spec.margin_top + 3 * spec.panel_height + 3 * spec.gap
    out.append(
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{spec.width}" height="{height}" '
        f'viewBox="0 0 {spec.width} {height}" font-family="sans-serif">'
    )
    out.append(f'<rect width="{spec.width}" height="{height}" fill="white"/>')

    sidc_vals = []
    if window is not None:
        sidc_vals = [v for v in prices.sidc[window.tau1 - 1 : window.tau2] if np.isfinite(v)]
    p_lo = min(float(da.min()), min(sidc_vals, default=float(da.min())))
    p_hi = max(float(da.max()), max(sidc_vals, default=float(da.max())))
    panel = _Panel(spec, 0, n, p_lo, p_hi, "prices EUR/MWh (grey: day-ahead, blue: intraday)")
    panel.frame(out)
    panel.steps(out, da, GREY)
    if window is not None and sidc_vals:
        panel.steps(out, prices.sidc[window.tau1 - 1 : window.tau2], BLUE,
                    first_slot=window.tau1, width=1.8)
        panel.marker(out, window.tau1, "O")
        panel.marker(out, window.tau2, "C")

    s_lo = min(float(base_supply.min()), float(flex_supply.min()))
    s_hi = max(float(base_supply.max()), float(flex_supply.max()))
    panel = _Panel(spec, 1, n, s_lo, s_hi, "supply MW (black: baseline, red: flexible)")
    panel.frame(out)
    panel.steps(out, base_supply, BLACK)
    panel.steps(out, flex_supply, RED)
    if window is not None:
        panel.marker(out, window.tau1, "O")
        panel.marker(out, window.tau2, "C")

    v_lo = min(float(store_b.min()), float(store_f.min()))
    v_hi = max(float(store_b.max()), float(store_f.max()))
    panel = _Panel(spec, 2, n, v_lo, v_hi, "stored material t (black: baseline, red: flexible)")
    panel.frame(out)
    panel.steps(out, store_b, BLACK)
    panel.steps(out, store_f, RED)

    out.append("</svg>")
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(out) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write chart: {exc}")


def render_sweep(result, out_path, spec: ChartSpec = None):
    """Two-panel line chart of a sweep: normalized cost and savings."""
    spec = spec or ChartSpec(panels=("cost", "savings"))
    pts = [p for p in result.points if p.feasible]
    if not pts:
        raise IoError("sweep has no feasible points to draw")
    values = [p.value for p in result.points]
    out = []
    height = spec.margin_top + 2 * spec.panel_height + 2 * spec.gap
    out.append(
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{spec.width}" height="{height}" '
        f'viewBox="0 0 {spec.width} {height}" font-family="sans-serif">'
    )
    out.append(f'<rect width="{spec.width}" height="{height}" fill="white"/>')
    for idx, (field_name, title) in enumerate(
        (("normalized_cost", f"normalized cost EUR/MWh vs {result.spec.parameter}"),
         ("normalized_savings", f"normalized savings EUR/MWh vs {result.spec.parameter}"))
    ):
        ys = [getattr(p, field_name) for p in pts]
        panel = _Panel(spec, idx, len(values), min(ys), max(ys), title)
        panel.frame(out)
        coords = []
        for p in pts:
            i = values.index(p.value) + 1
            coords.append(f"{_fmt(panel.x(i))},{_fmt(panel.y(getattr(p, field_name)))}")
        out.append(
            f'<polyline points="{" ".join(coords)}" fill="none" stroke="{BLUE}" '
            'stroke-width="1.8"/>'
        )
        for p in pts:
            i = values.index(p.value) + 1
            out.append(
                f'<circle cx="{_fmt(panel.x(i))}" cy="{_fmt(panel.y(getattr(p, field_name)))}" '
                f'r="3" fill="{BLUE}"/>'
            )
            out.append(
                f'<text x="{_fmt(panel.x(i))}" y="{panel.top + panel.height + 26}" '
                f'font-size="10" fill="#606060" text-anchor="middle">{p.value:g}</text>'
            )
    out.append("</svg>")
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(out) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write chart: {exc}")
