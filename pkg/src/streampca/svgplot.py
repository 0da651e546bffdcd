"""Minimal deterministic SVG line charts.

Produces one polyline per series plus a translucent +/- one-standard-
error band, with linear axes and a legend.  Output is a pure function of
the input series: coordinates are formatted with fixed precision and no
timestamps or random ids are embedded, so re-rendering the same data
yields identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidArgumentError

PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
)

WIDTH = 880
HEIGHT = 520
MARGIN_LEFT = 72
MARGIN_RIGHT = 180
MARGIN_TOP = 42
MARGIN_BOTTOM = 52


@dataclass(frozen=True)
class Series:
    label: str
    xs: tuple[float, ...]
    ys: tuple[float, ...]
    errs: tuple[float, ...]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 10000 or abs(v) < 0.001:
        return f"{v:.1e}"
    return f"{v:g}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    span = hi - lo
    return [lo + span * i / (n - 1) for i in range(n)]


def render_chart(series: list[Series], title: str, xlabel: str, ylabel: str) -> str:
    """Render series into an SVG document string."""
    if not series:
        raise InvalidArgumentError("render_chart: no series to plot")
    for s in series:
        if not (len(s.xs) == len(s.ys) == len(s.errs)) or not s.xs:
            raise InvalidArgumentError(f"render_chart: series {s.label!r} is empty or ragged")

    xs_all = [x for s in series for x in s.xs]
    lo_all = [y - e for s in series for y, e in zip(s.ys, s.errs)]
    hi_all = [y + e for s in series for y, e in zip(s.ys, s.errs)]
    x_min, x_max = min(xs_all), max(xs_all)
    y_min, y_max = min(lo_all), max(hi_all)
    if x_max == x_min:
        x_max = x_min + 1.0
    if y_max == y_min:
        y_max = y_min + 1.0
    pad = 0.04 * (y_max - y_min)
    y_min -= pad
    y_max += pad

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x: float) -> float:
        return MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w

    def py(y: float) -> float:
        return MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">'
    )
    out.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    out.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.0f}" y="24" font-family="sans-serif" '
        f'font-size="15" text-anchor="middle">{_escape(title)}</text>'
    )

    axis = f'stroke="#333333" stroke-width="1"'
    x0, y0 = MARGIN_LEFT, MARGIN_TOP + plot_h
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" {axis}/>')
    out.append(f'<line x1="{x0}" y1="{MARGIN_TOP}" x2="{x0}" y2="{y0}" {axis}/>')
    for tx in _ticks(x_min, x_max):
        X = px(tx)
        out.append(f'<line x1="{_fmt(X)}" y1="{y0}" x2="{_fmt(X)}" y2="{y0 + 5}" {axis}/>')
        out.append(
            f'<text x="{_fmt(X)}" y="{y0 + 20}" font-family="sans-serif" font-size="11" '
            f'text-anchor="middle">{_tick_label(tx)}</text>'
        )
    for ty in _ticks(y_min, y_max):
        Y = py(ty)
        out.append(f'<line x1="{x0 - 5}" y1="{_fmt(Y)}" x2="{x0}" y2="{_fmt(Y)}" {axis}/>')
        out.append(
            f'<text x="{x0 - 9}" y="{_fmt(Y + 4)}" font-family="sans-serif" font-size="11" '
            f'text-anchor="end">{_tick_label(ty)}</text>'
        )
    out.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.0f}" y="{HEIGHT - 14}" font-family="sans-serif" '
        f'font-size="12" text-anchor="middle">{_escape(xlabel)}</text>'
    )
    out.append(
        f'<text x="18" y="{MARGIN_TOP + plot_h / 2:.0f}" font-family="sans-serif" font-size="12" '
        f'text-anchor="middle" transform="rotate(-90 18 {MARGIN_TOP + plot_h / 2:.0f})">'
        f"{_escape(ylabel)}</text>"
    )

    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        upper = [(px(x), py(y + e)) for x, y, e in zip(s.xs, s.ys, s.errs)]
        lower = [(px(x), py(y - e)) for x, y, e in zip(s.xs, s.ys, s.errs)]
        band = " ".join(f"{_fmt(X)},{_fmt(Y)}" for X, Y in upper + lower[::-1])
        out.append(f'<polygon points="{band}" fill="{color}" fill-opacity="0.15" stroke="none"/>')
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(s.xs, s.ys))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.8"/>'
        )

    lx = MARGIN_LEFT + plot_w + 16
    ly = MARGIN_TOP + 8
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        Y = ly + 18 * i
        out.append(f'<line x1="{lx}" y1="{Y}" x2="{lx + 22}" y2="{Y}" stroke="{color}" stroke-width="2.5"/>')
        out.append(
            f'<text x="{lx + 28}" y="{Y + 4}" font-family="sans-serif" font-size="11">'
            f"{_escape(s.label)}</text>"
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
