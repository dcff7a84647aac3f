"""Minimal standalone SVG renderer for convergence bands.

No plotting dependency: the affine data-to-pixel transform is computed here,
each method contributes a median polyline plus a translucent min-max band
polygon, and the error axis is logarithmic by default.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

WIDTH, HEIGHT = 720, 480
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 80, 170, 30, 55
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
DASHES = ("", "8,4", "2,3", "8,4,2,4", "12,3", "1,3")
LOG_FLOOR = 1e-16


def _mapper(lo: float, hi: float, px_lo: float, px_hi: float):
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    scale = (px_hi - px_lo) / (hi - lo)
    return lambda v: px_lo + (v - lo) * scale


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    return list(np.linspace(lo, hi, count))


def write_svg_plot(bands: dict, path, x_axis: str = "epoch", log_y: bool = True, title: str = "") -> None:
    """Render band plots to a standalone SVG file.

    Parameters
    ----------
    bands : dict of method name -> Bands
    x_axis : "epoch" or "cpu_seconds"
        Horizontal coordinate: the epoch index or the per-epoch median
        cumulative CPU time.
    log_y : bool
        Plot log10 of the error; nonpositive values are clipped to a floor.
    """
    if not bands:
        raise ValueError("no bands to plot")
    if x_axis not in ("epoch", "cpu_seconds"):
        raise ValueError(f"x_axis must be 'epoch' or 'cpu_seconds', got {x_axis!r}")

    series = []
    for name in bands:
        b = bands[name]
        xs = np.asarray(b.epochs, dtype=float) if x_axis == "epoch" else np.asarray(b.cpu_median, dtype=float)
        series.append((name, xs, np.asarray(b.median, dtype=float), np.asarray(b.lo, dtype=float), np.asarray(b.hi, dtype=float)))

    def transform_y(values: np.ndarray) -> np.ndarray:
        if log_y:
            return np.log10(np.maximum(values, LOG_FLOOR))
        return values

    all_x = np.concatenate([s[1] for s in series])
    all_y = np.concatenate([transform_y(np.concatenate([s[2], s[3], s[4]])) for s in series])
    x_map = _mapper(float(all_x.min()), float(all_x.max()), MARGIN_LEFT, WIDTH - MARGIN_RIGHT)
    # SVG y grows downward, so map data-high to pixel-top
    y_map = _mapper(float(all_y.min()), float(all_y.max()), HEIGHT - MARGIN_BOTTOM, MARGIN_TOP)

    def pts(xs, ys) -> str:
        return " ".join(f"{x_map(x):.3f},{y_map(y):.3f}" for x, y in zip(xs, ys))

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{WIDTH / 2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>')

    # axes frame
    x0, x1 = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    y0, y1 = HEIGHT - MARGIN_BOTTOM, MARGIN_TOP
    parts.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>')
    for tv in _ticks(float(all_x.min()), float(all_x.max())):
        px = x_map(tv)
        parts.append(f'<line x1="{px:.3f}" y1="{y0}" x2="{px:.3f}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(f'<text x="{px:.3f}" y="{y0 + 20}" text-anchor="middle" font-size="11">{tv:.3g}</text>')
    for tv in _ticks(float(all_y.min()), float(all_y.max())):
        py = y_map(tv)
        label = f"1e{tv:.1f}" if log_y else f"{tv:.3g}"
        parts.append(f'<line x1="{x0 - 5}" y1="{py:.3f}" x2="{x0}" y2="{py:.3f}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 8}" y="{py + 4:.3f}" text-anchor="end" font-size="11">{label}</text>')
    x_label = "epoch" if x_axis == "epoch" else "cpu seconds"
    y_label = "log10 error" if log_y else "error"
    parts.append(f'<text x="{(x0 + x1) / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">{x_label}</text>')
    parts.append(
        f'<text x="18" y="{(y0 + y1) / 2:.0f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 18 {(y0 + y1) / 2:.0f})">{y_label}</text>'
    )

    for k, (name, xs, med, lo, hi) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        dash = DASHES[k % len(DASHES)]
        band_x = np.concatenate([xs, xs[::-1]])
        band_y = np.concatenate([transform_y(hi), transform_y(lo)[::-1]])
        parts.append(f'<polygon points="{pts(band_x, band_y)}" fill="{color}" fill-opacity="0.22" stroke="none"/>')
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        parts.append(
            f'<polyline points="{pts(xs, transform_y(med))}" fill="none" stroke="{color}" stroke-width="2"{dash_attr}/>'
        )
        ly = MARGIN_TOP + 16 + 18 * k
        parts.append(f'<line x1="{x1 + 12}" y1="{ly}" x2="{x1 + 42}" y2="{ly}" stroke="{color}" stroke-width="2"{dash_attr}/>')
        parts.append(f'<text x="{x1 + 48}" y="{ly + 4}" font-size="12">{name}</text>')

    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
