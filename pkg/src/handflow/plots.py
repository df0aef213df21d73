"""Static report artifacts: SVG line plots and PNG trajectory previews.

Hand-rolled SVG keeps the output byte-deterministic; no plotting stack in
the pipeline's dependency set.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _scale(values: np.ndarray, lo: float, hi: float, out_lo: float, out_hi: float) -> np.ndarray:
    span = hi - lo
    if span == 0:
        span = 1.0
    return out_lo + (values - lo) / span * (out_hi - out_lo)


def line_plot_svg(
    x: np.ndarray,
    series: dict[str, np.ndarray],
    path: str | Path,
    title: str,
    y_label: str = "",
    width: int = 640,
    height: int = 360,
) -> None:
    """Multi-series line plot written as a standalone SVG file."""
    x = np.asarray(x, dtype=np.float64)
    margin = 50
    all_y = np.concatenate([np.asarray(v, dtype=np.float64) for v in series.values()])
    y_lo, y_hi = float(all_y.min()), float(all_y.max())
    if y_lo == y_hi:
        y_lo -= 0.5
        y_hi += 0.5
    x_lo, x_hi = float(x.min()), float(x.max())

    px = _scale(x, x_lo, x_hi, margin, width - margin)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" font-size="16" '
        f'font-family="sans-serif">{title}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="#333"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="#333"/>',
        f'<text x="{margin - 8}" y="{margin}" text-anchor="end" font-size="11" '
        f'font-family="sans-serif">{y_hi:.4g}</text>',
        f'<text x="{margin - 8}" y="{height - margin}" text-anchor="end" font-size="11" '
        f'font-family="sans-serif">{y_lo:.4g}</text>',
        f'<text x="{width - margin}" y="{height - margin + 18}" text-anchor="end" '
        f'font-size="11" font-family="sans-serif">t = {x_hi:.3g} s</text>',
    ]
    if y_label:
        parts.append(
            f'<text x="14" y="{height / 2:.0f}" font-size="12" font-family="sans-serif" '
            f'transform="rotate(-90 14 {height / 2:.0f})" text-anchor="middle">{y_label}</text>'
        )
    for i, (name, values) in enumerate(series.items()):
        py = _scale(np.asarray(values, dtype=np.float64), y_lo, y_hi, height - margin, margin)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        color = _COLORS[i % len(_COLORS)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{width - margin + 4}" y="{py[-1]:.0f}" font-size="11" '
            f'fill="{color}" font-family="sans-serif">{name}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def _draw_line(img: np.ndarray, p0, p1, color) -> None:
    """Integer Bresenham segment, clipped to the canvas."""
    h, w = img.shape[:2]
    x0, y0 = int(round(p0[0])), int(round(p0[1]))
    x1, y1 = int(round(p1[0])), int(round(p1[1]))
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        if 0 <= x0 < w and 0 <= y0 < h:
            img[y0, x0] = color
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def trajectory_preview_png(
    canvas: np.ndarray,
    positions: np.ndarray,
    path: str | Path,
    color=(255, 64, 32),
) -> None:
    """Schematic top-down (x, y) trace of base-frame positions drawn over a
    camera frame (or a blank canvas for zero-padded views)."""
    from .images import save_image

    img = canvas.copy()
    h, w = img.shape[:2]
    xy = np.asarray(positions, dtype=np.float64)[:, :2]
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    span = np.where(hi - lo == 0, 1.0, hi - lo)
    margin = 4
    px = margin + (xy[:, 0] - lo[0]) / span[0] * (w - 1 - 2 * margin)
    py = margin + (xy[:, 1] - lo[1]) / span[1] * (h - 1 - 2 * margin)
    for i in range(len(px) - 1):
        _draw_line(img, (px[i], py[i]), (px[i + 1], py[i + 1]), color)
    # start and end markers
    for cx, cy, c in ((px[0], py[0], (32, 255, 64)), (px[-1], py[-1], (32, 64, 255))):
        x, y = int(round(cx)), int(round(cy))
        img[max(0, y - 1) : y + 2, max(0, x - 1) : x + 2] = c
    save_image(img, path)
