"""Minimal static SVG line plots and heatmaps for batch figure previews."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 20, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _range(v: np.ndarray) -> tuple[float, float]:
    v = v[np.isfinite(v)]
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        pad = 0.5 if lo == 0 else 0.05 * abs(lo)
        return lo - pad, hi + pad
    return lo, hi


def _axes(x0, x1, y0, y1, xlabel, ylabel) -> list[str]:
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM
    out = [f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for k in range(5):
        fx = LEFT + pw * k / 4
        fy = TOP + ph * (1 - k / 4)
        out.append(f'<text x="{fx:.1f}" y="{H - BOTTOM + 16}" font-size="11" text-anchor="middle">'
                   f"{x0 + (x1 - x0) * k / 4:.4g}</text>")
        out.append(f'<text x="{LEFT - 6}" y="{fy + 4:.1f}" font-size="11" text-anchor="end">'
                   f"{y0 + (y1 - y0) * k / 4:.4g}</text>")
    out.append(f'<text x="{LEFT + pw / 2}" y="{H - 10}" font-size="13" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2})">{escape(ylabel)}</text>')
    return out


def _write(path: Path, body: list[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">'
    path.write_text("\n".join([head, f'<rect width="{W}" height="{H}" fill="white"/>', *body, "</svg>"]) + "\n")
    return path


def line_plot(path, x: Sequence[float], series: Mapping[str, Sequence[float]], xlabel: str, ylabel: str) -> Path:
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    x0, x1 = _range(x)
    y0, y1 = _range(np.concatenate([v for v in ys.values()]) if ys else np.zeros(1))
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM
    body = _axes(x0, x1, y0, y1, xlabel, ylabel)
    for i, (name, y) in enumerate(ys.items()):
        color = COLORS[i % len(COLORS)]
        pts = [f"{LEFT + pw * (a - x0) / (x1 - x0):.2f},{TOP + ph * (1 - (b - y0) / (y1 - y0)):.2f}"
               for a, b in zip(x, y) if math.isfinite(b)]
        body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(pts)}"/>')
        ly = TOP + 16 * (i + 1)
        body.append(f'<line x1="{W - RIGHT + 10}" y1="{ly}" x2="{W - RIGHT + 30}" y2="{ly}" stroke="{color}"/>')
        body.append(f'<text x="{W - RIGHT + 34}" y="{ly + 4}" font-size="11">{escape(name)}</text>')
    return _write(path, body)


def _color(f: float) -> str:
    if not math.isfinite(f):
        return "#cccccc"
    # blue -> yellow ramp
    r, g, b = int(40 + 215 * f), int(40 + 190 * f), int(160 - 130 * f)
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(path, x: Sequence[float], y: Sequence[float], z: np.ndarray, xlabel: str, ylabel: str,
            zlabel: str) -> Path:
    """``z[i, j]`` is drawn at ``(x[j], y[i])``; non-finite cells are grey."""
    x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
    if z.shape != (len(y), len(x)):
        raise ValueError(f"z has shape {z.shape}, expected {(len(y), len(x))}")
    z0, z1 = _range(z.ravel())
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM
    cw, ch = pw / len(x), ph / len(y)
    body = []
    for i in range(len(y)):
        for j in range(len(x)):
            f = (z[i, j] - z0) / (z1 - z0)
            body.append(f'<rect x="{LEFT + j * cw:.2f}" y="{TOP + ph - (i + 1) * ch:.2f}" width="{cw + 0.3:.2f}" '
                        f'height="{ch + 0.3:.2f}" fill="{_color(f)}"/>')
    body += _axes(*_range(x), *_range(y), xlabel, ylabel)
    for k in range(11):
        body.append(f'<rect x="{W - RIGHT + 20}" y="{TOP + ph * (1 - (k + 1) / 11):.2f}" width="16" '
                    f'height="{ph / 11 + 0.3:.2f}" fill="{_color(k / 10)}"/>')
    body.append(f'<text x="{W - RIGHT + 40}" y="{TOP + 10}" font-size="11">{z1:.4g}</text>')
    body.append(f'<text x="{W - RIGHT + 40}" y="{TOP + ph}" font-size="11">{z0:.4g}</text>')
    body.append(f'<text x="{W - RIGHT + 20}" y="{TOP + ph + 30}" font-size="11">{escape(zlabel)}</text>')
    return _write(path, body)
