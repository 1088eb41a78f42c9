"""Minimal SVG scatter plots of 2-D embeddings (800x800, always with a legend)."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

SIZE = 800
MARGIN = 60
LEGEND_W = 150

# Okabe-Ito, then a few extra distinguishable colours
PALETTE = ["#E69F00", "#56B4E9", "#009E73", "#F0E442", "#0072B2", "#D55E00", "#CC79A7", "#000000",
           "#999999", "#882255"]
# viridis anchors for the sequential time ramp
RAMP = ["#440154", "#3b528b", "#21918c", "#5ec962", "#fde725"]


def _hex(c: str) -> np.ndarray:
    return np.array([int(c[i:i + 2], 16) for i in (1, 3, 5)], dtype=float)


def ramp_color(u: float) -> str:
    u = min(max(float(u), 0.0), 1.0) * (len(RAMP) - 1)
    i = min(int(u), len(RAMP) - 2)
    rgb = (1 - (u - i)) * _hex(RAMP[i]) + (u - i) * _hex(RAMP[i + 1])
    return "#%02x%02x%02x" % tuple(int(round(v)) for v in rgb)


def _project(coords: np.ndarray) -> np.ndarray:
    xy = np.asarray(coords, dtype=float)
    if xy.shape[1] == 1:
        xy = np.column_stack([xy[:, 0], np.zeros(len(xy))])
    xy = xy[:, :2]
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0).max()
    plot = SIZE - 2 * MARGIN - LEGEND_W
    centre = (lo + hi) / 2
    px = MARGIN + plot / 2 + (xy[:, 0] - centre[0]) / span * plot
    py = MARGIN + plot / 2 - (xy[:, 1] - centre[1]) / span * plot
    return np.column_stack([px, py])


def scatter_svg(coords: np.ndarray, path, labels: Optional[Sequence] = None,
                times: Optional[Sequence] = None, title: str = "") -> Path:
    """Scatter coloured by categorical ``labels`` if given, otherwise by ``times``."""
    pts = _project(coords)
    n = len(pts)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
             f'viewBox="0 0 {SIZE} {SIZE}">',
             f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
             f'<text x="{MARGIN}" y="{MARGIN / 2:.0f}" font-family="sans-serif" font-size="18">'
             f'{escape(title)}</text>']
    legend_x = SIZE - MARGIN - LEGEND_W + 20
    if labels is not None:
        labels = [str(v) for v in labels]
        classes = sorted(set(labels), key=lambda s: (len(s), s))
        colour = {c: PALETTE[i % len(PALETTE)] for i, c in enumerate(classes)}
        fills = [colour[v] for v in labels]
        parts.append(f'<g font-family="sans-serif" font-size="14"><text x="{legend_x}" y="{MARGIN}">label</text>')
        for i, c in enumerate(classes):
            y = MARGIN + 22 * (i + 1)
            parts.append(f'<circle cx="{legend_x + 6}" cy="{y - 5}" r="6" fill="{colour[c]}"/>'
                         f'<text x="{legend_x + 18}" y="{y}">{escape(c)}</text>')
        parts.append("</g>")
    else:
        t = np.arange(n, dtype=float) if times is None else np.asarray(times, dtype=float)
        lo, hi = float(t.min()), float(t.max())
        u = (t - lo) / (hi - lo) if hi > lo else np.zeros(n)
        fills = [ramp_color(v) for v in u]
        parts.append(f'<g font-family="sans-serif" font-size="14"><text x="{legend_x}" y="{MARGIN}">time</text>')
        steps = 20
        for i in range(steps):
            parts.append(f'<rect x="{legend_x}" y="{MARGIN + 10 + i * 10}" width="20" height="10" '
                         f'fill="{ramp_color(i / (steps - 1))}"/>')
        parts.append(f'<text x="{legend_x + 26}" y="{MARGIN + 22}">{lo:.6g}</text>'
                     f'<text x="{legend_x + 26}" y="{MARGIN + 10 + steps * 10}">{hi:.6g}</text></g>')
    for (x, y), f in zip(pts, fills):
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="{f}" fill-opacity="0.85"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
    return Path(path)
