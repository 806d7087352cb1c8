"""Minimal self-contained SVG log-log charts (no plotting dependency)."""

from __future__ import annotations

import math

_PALETTE = ("#1f6fb4", "#d1495b", "#3a8c5c", "#8c6bb1", "#b3820f", "#4d4d4d")

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 36, 52


def _decades(lo, hi):
    return range(int(math.floor(lo)), int(math.ceil(hi)) + 1)


def loglog_svg(series, guides=(), title="", xlabel="n", ylabel="error"):
    """Render series of (label, xs, ys) as a log-log SVG chart string.

    ``guides`` are (slope, label) reference lines anchored at the first
    point of the first series, drawn dashed.  Non-positive values are
    dropped (they have no logarithm to plot).
    """
    pts = []
    for _, xs, ys in series:
        pts.extend((x, y) for x, y in zip(xs, ys) if x > 0 and y > 0)
    if not pts:
        raise ValueError("nothing to plot: no positive data")
    lx = [math.log10(x) for x, _ in pts]
    ly = [math.log10(y) for _, y in pts]
    x_lo, x_hi = min(lx), max(lx)
    y_lo, y_hi = min(ly), max(ly)
    x_pad = 0.05 * max(x_hi - x_lo, 0.1)
    y_pad = 0.05 * max(y_hi - y_lo, 0.1)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def sx(x):
        return _ML + (math.log10(x) - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def sy(y):
        return _H - _MB - (math.log10(y) - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="Helvetica, Arial, sans-serif">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="#333"/>',
    ]
    if title:
        out.append(
            f'<text x="{_W / 2:.1f}" y="22" text-anchor="middle" '
            f'font-size="15">{title}</text>'
        )
    for k in _decades(x_lo, x_hi):
        if not x_lo <= k <= x_hi:
            continue
        px = _ML + (k - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)
        out.append(
            f'<line x1="{px:.1f}" y1="{_MT}" x2="{px:.1f}" y2="{_H - _MB}" '
            f'stroke="#ddd"/>'
        )
        out.append(
            f'<text x="{px:.1f}" y="{_H - _MB + 18}" text-anchor="middle" '
            f'font-size="12">1e{k}</text>'
        )
    for k in _decades(y_lo, y_hi):
        if not y_lo <= k <= y_hi:
            continue
        py = _H - _MB - (k - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)
        out.append(
            f'<line x1="{_ML}" y1="{py:.1f}" x2="{_W - _MR}" y2="{py:.1f}" '
            f'stroke="#ddd"/>'
        )
        out.append(
            f'<text x="{_ML - 6}" y="{py + 4:.1f}" text-anchor="end" '
            f'font-size="12">1e{k}</text>'
        )
    out.append(
        f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 12}" '
        f'text-anchor="middle" font-size="13">{xlabel}</text>'
    )
    out.append(
        f'<text x="16" y="{(_MT + _H - _MB) / 2:.1f}" text-anchor="middle" '
        f'font-size="13" transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.1f})">'
        f"{ylabel}</text>"
    )

    legend_y = _MT + 16
    for i, (label, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(
            f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys) if x > 0 and y > 0
        )
        out.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.6"/>'
        )
        out.append(
            f'<text x="{_W - _MR - 8}" y="{legend_y}" text-anchor="end" '
            f'font-size="12" fill="{color}">{label}</text>'
        )
        legend_y += 16

    if guides and series:
        _, xs0, ys0 = series[0]
        anchors = [(x, y) for x, y in zip(xs0, ys0) if x > 0 and y > 0]
        if anchors:
            ax, ay = anchors[len(anchors) // 3]
            x_end = anchors[-1][0]
            for slope, label in guides:
                y_end = ay * (x_end / ax) ** slope
                out.append(
                    f'<line x1="{sx(ax):.2f}" y1="{sy(ay):.2f}" '
                    f'x2="{sx(x_end):.2f}" y2="{sy(y_end):.2f}" stroke="#888" '
                    f'stroke-dasharray="6 4" stroke-width="1.2"/>'
                )
                out.append(
                    f'<text x="{sx(x_end) - 4:.1f}" y="{sy(y_end) - 6:.1f}" '
                    f'text-anchor="end" font-size="11" fill="#666">{label}</text>'
                )
    out.append("</svg>")
    return "\n".join(out) + "\n"
