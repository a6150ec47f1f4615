"""Minimal hand-written SVG line plots."""
from __future__ import annotations

from pathlib import Path

import numpy as np

WIDTH, HEIGHT, PAD = 640, 360, 40


def line_plot(path, x, y, title: str = "", marks_x=None, marks_y=None) -> None:
    """Write ``y`` against ``x`` (sorted by x) with optional red circle marks."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    marks_x = np.asarray(marks_x if marks_x is not None else [], dtype=float)
    marks_y = np.asarray(marks_y if marks_y is not None else [], dtype=float)

    all_y = np.concatenate([y, marks_y])
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(all_y.min()), float(all_y.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(v):
        return PAD + (v - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def sy(v):
        return HEIGHT - PAD - (v - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" '
        'fill="none" stroke="#888"/>',
        f'<text x="{WIDTH / 2:.0f}" y="{PAD * 0.6:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<text x="{PAD}" y="{HEIGHT - PAD * 0.3:.0f}" font-family="sans-serif" font-size="10">{x0:g}</text>',
        f'<text x="{WIDTH - PAD}" y="{HEIGHT - PAD * 0.3:.0f}" text-anchor="end" '
        f'font-family="sans-serif" font-size="10">{x1:g}</text>',
        f'<text x="{PAD * 0.9:.0f}" y="{sy(y0):.0f}" text-anchor="end" font-family="sans-serif" '
        f'font-size="10">{y0:.3g}</text>',
        f'<text x="{PAD * 0.9:.0f}" y="{sy(y1):.0f}" text-anchor="end" font-family="sans-serif" '
        f'font-size="10">{y1:.3g}</text>',
        f'<polyline fill="none" stroke="#1f4e9c" stroke-width="1.5" points="{pts}"/>',
    ]
    parts += [f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="4" fill="none" stroke="red" stroke-width="1.5"/>'
              for a, b in zip(marks_x, marks_y)]
    parts.append("</svg>\n")
    Path(path).write_text("\n".join(parts), encoding="utf-8")
