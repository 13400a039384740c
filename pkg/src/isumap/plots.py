"""Self-contained SVG figures: labelled scatter plots and medoid paths."""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["PALETTE", "scatter_svg", "paths_svg"]

PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a",
]
SIZE = 800
MARGIN = 40


def _frame(points):
    p = np.asarray(points, dtype=np.float64)
    lo, hi = p.min(axis=0), p.max(axis=0)
    span = float((hi - lo).max()) or 1.0
    scale = (SIZE - 2 * MARGIN) / span
    center = (lo + hi) / 2

    def to_px(q):
        q = np.atleast_2d(q)
        x = SIZE / 2 + (q[:, 0] - center[0]) * scale
        y = SIZE / 2 - (q[:, 1] - center[1]) * scale
        return np.column_stack([x, y])

    return to_px


def _colors(color, n):
    if color is None:
        return [PALETTE[0]] * n
    color = np.asarray(color)
    if np.issubdtype(color.dtype, np.integer):
        return [PALETTE[int(c) % len(PALETTE)] for c in color]
    # Continuous values: map onto a blue-to-red ramp.
    c = color.astype(np.float64)
    lo, hi = c.min(), c.max()
    t = (c - lo) / (hi - lo) if hi > lo else np.zeros_like(c)
    return [f"rgb({int(255 * v)},{int(80 + 60 * (1 - abs(2 * v - 1)))},{int(255 * (1 - v))})" for v in t]


def _header():
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SIZE} {SIZE}" width="{SIZE}" height="{SIZE}">',
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]


def scatter_svg(path, coords, color=None, hulls=None, title=None):
    """Scatter plot of the first two coordinates, optionally with hull outlines."""
    y = np.asarray(coords, dtype=np.float64)[:, :2]
    if y.shape[1] == 1:
        y = np.column_stack([y[:, 0], np.zeros(len(y))])
    to_px = _frame(y)
    px = to_px(y)
    cols = _colors(color, len(y))
    out = _header()
    if title:
        out.append(f'<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="16">{title}</text>')
    for (x0, y0), c in zip(px, cols):
        out.append(f'<circle cx="{x0:.2f}" cy="{y0:.2f}" r="2.5" fill="{c}" fill-opacity="0.8"/>')
    for j, h in enumerate(hulls or []):
        hp = to_px(h)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in hp)
        out.append(
            f'<polygon points="{pts}" fill="none" stroke="{PALETTE[j % len(PALETTE)]}" stroke-width="1.5"/>'
        )
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def paths_svg(path, coords, labels, trace, hulls=None, title=None):
    """Final embedding with the medoid paths recorded during separation.

    Round markers show the starting medoids, stars the final ones.
    """
    y = np.asarray(coords, dtype=np.float64)
    med = np.array([rec["medoids"] for rec in trace]) if trace else np.zeros((0, 0, 2))
    allpts = y if med.size == 0 else np.vstack([y, med.reshape(-1, 2)])
    to_px = _frame(allpts)
    out = _header()
    if title:
        out.append(f'<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="16">{title}</text>')
    cols = _colors(np.asarray(labels, dtype=np.int64), len(y))
    for (x0, y0), c in zip(to_px(y), cols):
        out.append(f'<circle cx="{x0:.2f}" cy="{y0:.2f}" r="2" fill="{c}" fill-opacity="0.35"/>')
    for j, h in enumerate(hulls or []):
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in to_px(h))
        out.append(
            f'<polygon points="{pts}" fill="none" stroke="{PALETTE[j % len(PALETTE)]}" stroke-width="1"/>'
        )
    if med.size:
        for j in range(med.shape[1]):
            c = PALETTE[j % len(PALETTE)]
            track = to_px(med[:, j, :])
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in track)
            out.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="2"/>')
            sx, sy = track[0]
            out.append(f'<circle cx="{sx:.2f}" cy="{sy:.2f}" r="6" fill="{c}" stroke="black"/>')
            ex, ey = track[-1]
            star = _star(ex, ey, 9)
            out.append(f'<polygon points="{star}" fill="{c}" stroke="black"/>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def _star(cx, cy, r):
    ang = np.pi / 2 + np.arange(10) * np.pi / 5
    rad = np.where(np.arange(10) % 2 == 0, r, r * 0.45)
    return " ".join(f"{cx + a * np.cos(t):.2f},{cy - a * np.sin(t):.2f}" for a, t in zip(rad, ang))
