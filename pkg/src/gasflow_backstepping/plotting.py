"""Minimal static SVG line charts (no plotting dependency)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
WIDTH = 720
PANEL_HEIGHT = 200
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 28, 36
MAX_POINTS = 2000


def _nice_ticks(lo, hi, count=5):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    k = 0
    while first + k * step <= hi + 1e-9 * step:
        ticks.append(first + k * step)
        k += 1
    return ticks


def _fmt(v):
    return f"{v:.6g}"


def _thin(x, y):
    # keep the envelope roughly intact while bounding file size
    if x.size <= MAX_POINTS:
        return x, y
    idx = np.linspace(0, x.size - 1, MAX_POINTS).round().astype(int)
    return x[idx], y[idx]


def _panel(top, x, series, title, ylabel, xlabel):
    out = []
    h = PANEL_HEIGHT
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = top + MARGIN_T, top + h - MARGIN_B
    finite = [s[np.isfinite(s)] for _, s in series]
    finite = [f for f in finite if f.size]
    lo = min(float(f.min()) for f in finite) if finite else 0.0
    hi = max(float(f.max()) for f in finite) if finite else 1.0
    if hi - lo < 1e-12 * max(1.0, abs(hi)):
        pad = max(abs(hi) * 1e-3, 1e-9)
        lo, hi = lo - pad, hi + pad
    xlo, xhi = float(x[0]), float(x[-1]) if x[-1] > x[0] else float(x[0]) + 1.0

    def sx(v):
        return x0 + (v - xlo) / (xhi - xlo) * (x1 - x0)

    def sy(v):
        return y1 - (v - lo) / (hi - lo) * (y1 - y0)

    out.append(f'<text x="{x0}" y="{top + 18}" font-size="13" font-weight="bold">{escape(title)}</text>')
    out.append(f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" fill="none" stroke="#444"/>')
    for tv in _nice_ticks(lo, hi):
        py = sy(tv)
        out.append(f'<line x1="{x0}" x2="{x1}" y1="{py:.2f}" y2="{py:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{x0 - 6}" y="{py + 4:.2f}" font-size="10" text-anchor="end">{_fmt(tv)}</text>')
    for tv in _nice_ticks(xlo, xhi):
        px = sx(tv)
        out.append(f'<line x1="{px:.2f}" x2="{px:.2f}" y1="{y1}" y2="{y1 + 4}" stroke="#444"/>')
        out.append(f'<text x="{px:.2f}" y="{y1 + 16}" font-size="10" text-anchor="middle">{_fmt(tv)}</text>')
    out.append(f'<text x="{(x0 + x1) / 2}" y="{y1 + 30}" font-size="11" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="14" y="{(y0 + y1) / 2}" font-size="11" text-anchor="middle" '
        f'transform="rotate(-90 14 {(y0 + y1) / 2})">{escape(ylabel)}</text>'
    )
    for k, (label, y) in enumerate(series):
        xs, ys = _thin(np.asarray(x, float), np.asarray(y, float))
        ok = np.isfinite(ys)
        if not ok.any():
            continue
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(xs[ok], ys[ok]))
        color = PALETTE[k % len(PALETTE)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.4" points="{pts}"/>')
        lx = x1 - 150
        ly = y0 + 14 + 14 * k
        out.append(f'<line x1="{lx}" x2="{lx + 18}" y1="{ly - 4}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 22}" y="{ly}" font-size="10">{escape(label)}</text>')
    return out


def write_panels(path, x, panels, xlabel="time [h]"):
    """Write stacked line charts to ``path``.

    ``panels`` is a list of ``(title, ylabel, [(label, y), ...])``.
    """
    x = np.asarray(x, dtype=float)
    height = PANEL_HEIGHT * len(panels)
    body = []
    for i, (title, ylabel, series) in enumerate(panels):
        body.extend(_panel(i * PANEL_HEIGHT, x, series, title, ylabel, xlabel))
    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">\n'
        f'<rect width="{WIDTH}" height="{height}" fill="white"/>\n' + "\n".join(body) + "\n</svg>\n"
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)
    return path
