"""Tiny dependency-free SVG line plots for the experiment runner."""

from __future__ import annotations

import math

__all__ = ["line_plot"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 40, 55


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (n - 1)
    mag = 10.0 ** math.floor(math.log10(step))
    for mult in (1, 2, 2.5, 5, 10):
        if mag * mult >= step:
            step = mag * mult
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * abs(hi):
        out.append(round(t, 12))
        t += step
    return out or [lo, hi]


def _fmt(v):
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:.4g}"


def line_plot(series, path, title="", x_label="", y_label="", log_y=False):
    """Write a multi-series line plot as a standalone SVG file.

    ``series`` is a list of ``(label, xs, ys)`` triples. Axes are linear
    (``log_y`` switches the y axis to log10); each series gets a color
    from a fixed cycle and a legend entry.
    """
    pts = [(x, y) for _, xs, ys in series for x, y in zip(xs, ys)]
    if not pts:
        raise ValueError("nothing to plot")
    if log_y:
        pts = [(x, y) for x, y in pts if y > 0]
        if not pts:
            raise ValueError("log_y requires positive values")
    xs_all = [p[0] for p in pts]
    ys_all = [math.log10(p[1]) if log_y else p[1] for p in pts]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    px = lambda x: _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)
    py = lambda y: _H - _MB - (y - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    axis = f'stroke="black" stroke-width="1"'
    out.append(f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" {axis}/>')
    out.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" {axis}/>')

    for t in _ticks(x_lo, x_hi):
        x = px(t)
        out.append(f'<line x1="{x}" y1="{_H - _MB}" x2="{x}" y2="{_H - _MB + 5}" {axis}/>')
        out.append(f'<text x="{x}" y="{_H - _MB + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(y_lo, y_hi):
        y = py(t)
        label = _fmt(10.0 ** t) if log_y else _fmt(t)
        out.append(f'<line x1="{_ML - 5}" y1="{y}" x2="{_ML}" y2="{y}" {axis}/>')
        out.append(f'<text x="{_ML - 8}" y="{y + 4}" text-anchor="end">{label}</text>')
    out.append(
        f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 12}" text-anchor="middle">{x_label}</text>'
    )
    out.append(
        f'<text x="18" y="{(_MT + _H - _MB) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(_MT + _H - _MB) / 2})">{y_label}</text>'
    )

    for i, (label, xs, ys) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        coords = [
            (px(x), py(math.log10(y) if log_y else y))
            for x, y in zip(xs, ys)
            if not log_y or y > 0
        ]
        if not coords:
            continue
        path_str = " ".join(f"{x:.2f},{y:.2f}" for x, y in coords)
        out.append(
            f'<polyline points="{path_str}" fill="none" stroke="{color}" stroke-width="1.8"/>'
        )
        for x, y in coords:
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{color}"/>')
        ly = _MT + 6 + 16 * i
        out.append(f'<line x1="{_W - _MR - 130}" y1="{ly}" x2="{_W - _MR - 105}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{_W - _MR - 100}" y="{ly + 4}">{label}</text>')

    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
