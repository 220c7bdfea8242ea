"""Minimal deterministic SVG emitter for p=2 scatter + fit-line figures.

Hand-rolled so the byte output is a pure function of the inputs (no
timestamps, ids or library version strings).
"""

from __future__ import annotations

import numpy as np

from .core import Dataset

_PALETTE = ("#000000", "#d62728", "#2ca02c", "#1f77b4", "#9467bd", "#8c564b")
_DASHES = ("none", "8,4", "2,3", "6,2,2,2", "4,4", "1,2")


def _fmt(v: float) -> str:
    return f"{v:.4f}"


def scatter_svg(data: Dataset, fits, width: int = 640, height: int = 480) -> str:
    """Scatter of (x, y) plus one line per (label, beta) pair in ``fits``."""
    if data.p != 2:
        raise ValueError("scatter plot requires p = 2")
    x = data.carriers[:, 0]
    y = data.response

    margin = 50.0
    xmin, xmax = float(x.min()), float(x.max())
    ymin, ymax = float(y.min()), float(y.max())
    for label, beta in fits:
        for xe in (xmin, xmax):
            ye = float(beta[0] + beta[1] * xe)
            ymin, ymax = min(ymin, ye), max(ymax, ye)
    xpad = 0.05 * (xmax - xmin or 1.0)
    ypad = 0.05 * (ymax - ymin or 1.0)
    xmin, xmax = xmin - xpad, xmax + xpad
    ymin, ymax = ymin - ypad, ymax + ypad

    def sx(v):
        return margin + (v - xmin) / (xmax - xmin) * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - ymin) / (ymax - ymin) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{_fmt(margin)}" y="{_fmt(margin)}" width="{_fmt(width - 2 * margin)}" '
        f'height="{_fmt(height - 2 * margin)}" fill="none" stroke="#888888"/>',
    ]
    for i, (label, beta) in enumerate(fits):
        color = _PALETTE[i % len(_PALETTE)]
        dash = _DASHES[i % len(_DASHES)]
        x0, x1 = xmin, xmax
        y0 = float(beta[0] + beta[1] * x0)
        y1 = float(beta[0] + beta[1] * x1)
        parts.append(
            f'<line x1="{_fmt(sx(x0))}" y1="{_fmt(sy(y0))}" x2="{_fmt(sx(x1))}" '
            f'y2="{_fmt(sy(y1))}" stroke="{color}" stroke-width="1.5" '
            f'stroke-dasharray="{dash}"/>'
        )
    for xi, yi in zip(x, y):
        parts.append(
            f'<circle cx="{_fmt(sx(float(xi)))}" cy="{_fmt(sy(float(yi)))}" r="3" '
            f'fill="#333333" fill-opacity="0.8"/>'
        )
    for i, (label, beta) in enumerate(fits):
        color = _PALETTE[i % len(_PALETTE)]
        ly = margin + 16.0 * (i + 1)
        parts.append(
            f'<line x1="{_fmt(margin + 8)}" y1="{_fmt(ly - 4)}" x2="{_fmt(margin + 40)}" '
            f'y2="{_fmt(ly - 4)}" stroke="{color}" stroke-width="1.5" '
            f'stroke-dasharray="{_DASHES[i % len(_DASHES)]}"/>'
        )
        parts.append(
            f'<text x="{_fmt(margin + 46)}" y="{_fmt(ly)}" font-family="monospace" '
            f'font-size="12" fill="#000000">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
