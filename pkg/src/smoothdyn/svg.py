"""Minimal SVG line plots (linear or log-log axes), no plotting dependency."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]

W, H = 640, 460
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 50


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, (b - a) // 8)
        return [float(k) for k in range(a, b + 1, step)]
    span = hi - lo
    raw = span / 6 if span > 0 else 1.0
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return list(np.arange(start, hi + 0.5 * step, step))


def line_plot(series, path, title="", xlabel="", ylabel="", log=False, extra_segments=()):
    """Write ``series`` (a list of ``(x, y, label)``) to ``path`` as SVG.

    With ``log=True`` both axes are logarithmic and nonpositive values are
    dropped.
    """
    prepared = []
    for x, y, label in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if log:
            keep = (x > 0) & (y > 0) & np.isfinite(y)
            x, y = np.log10(x[keep]), np.log10(y[keep])
        else:
            keep = np.isfinite(x) & np.isfinite(y)
            x, y = x[keep], y[keep]
        if len(x):
            prepared.append((x, y, label))
    segs = [(np.asarray(a, float), np.asarray(b, float)) for a, b in extra_segments]
    xs = [p[0] for p in prepared] + [np.array([a[0], b[0]]) for a, b in segs]
    ys = [p[1] for p in prepared] + [np.array([a[1], b[1]]) for a, b in segs]
    if not xs:
        xs, ys = [np.array([0.0, 1.0])], [np.array([0.0, 1.0])]
    xlo, xhi = min(float(v.min()) for v in xs), max(float(v.max()) for v in xs)
    ylo, yhi = min(float(v.min()) for v in ys), max(float(v.max()) for v in ys)
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        yhi = ylo + 1.0
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def sx(v):
        return LEFT + (v - xlo) / (xhi - xlo) * pw

    def sy(v):
        return TOP + ph - (v - ylo) / (yhi - ylo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for tv in _ticks(xlo, xhi, log):
        if xlo <= tv <= xhi:
            X = sx(tv)
            lab = f"1e{int(tv)}" if log else f"{tv:g}"
            out.append(f'<line x1="{X:.1f}" y1="{TOP + ph}" x2="{X:.1f}" y2="{TOP + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{X:.1f}" y="{TOP + ph + 18}" text-anchor="middle">{lab}</text>')
    for tv in _ticks(ylo, yhi, log):
        if ylo <= tv <= yhi:
            Y = sy(tv)
            lab = f"1e{int(tv)}" if log else f"{tv:g}"
            out.append(f'<line x1="{LEFT - 5}" y1="{Y:.1f}" x2="{LEFT}" y2="{Y:.1f}" stroke="black"/>')
            out.append(f'<text x="{LEFT - 8}" y="{Y + 4:.1f}" text-anchor="end">{lab}</text>')
    for a, b in segs:
        out.append(f'<line x1="{sx(a[0]):.1f}" y1="{sy(a[1]):.1f}" x2="{sx(b[0]):.1f}" '
                   f'y2="{sy(b[1]):.1f}" stroke="black" stroke-width="3" stroke-opacity="0.5"/>')
    for i, (x, y, label) in enumerate(prepared):
        color = _COLORS[i % len(_COLORS)]
        # thin long series so files stay small
        step = max(1, len(x) // 2000)
        pts = " ".join(f"{sx(a):.1f},{sy(b):.1f}" for a, b in zip(x[::step], y[::step]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}">'
                   f'<title>{escape(str(label))}</title></polyline>')
    out.append(f'<text x="{W / 2}" y="{TOP - 15}" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<text x="{LEFT + pw / 2}" y="{H - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{TOP + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 15 {TOP + ph / 2})">{escape(ylabel)}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out))
