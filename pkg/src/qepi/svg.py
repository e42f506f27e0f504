"""Self-contained SVG line plots and heat maps (no plotting dependency)."""

from __future__ import annotations

import html
import math
from typing import Mapping, Sequence

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def _metadata(meta: str | None) -> str:
    return f"<metadata>{html.escape(meta)}</metadata>\n" if meta else ""


def line_plot(x: Sequence[float], series: Mapping[str, Sequence[float]], title: str = "",
              xlabel: str = "", ylabel: str = "", meta: str | None = None,
              dashed: Sequence[str] = (), width: int = 640, height: int = 420) -> str:
    left, right, top, bottom = 70, 170, 40, 50
    pw, ph = width - left - right, height - top - bottom
    xs = np.asarray(x, float)
    finite = [v for vals in series.values() for v in vals if math.isfinite(v)]
    ymin, ymax = (min(finite), max(finite)) if finite else (0.0, 1.0)
    if ymax == ymin:
        ymax = ymin + 1.0
    xmin, xmax = float(xs.min()), float(xs.max())
    if xmax == xmin:
        xmax = xmin + 1.0

    def sx(v):
        return left + (v - xmin) / (xmax - xmin) * pw

    def sy(v):
        return top + ph - (v - ymin) / (ymax - ymin) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">\n', _metadata(meta),
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>\n',
           f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{html.escape(title)}</text>\n',
           f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">{html.escape(xlabel)}</text>\n',
           f'<text x="15" y="{top + ph / 2}" text-anchor="middle" transform="rotate(-90 15 {top + ph / 2})">'
           f'{html.escape(ylabel)}</text>\n']
    for k in range(5):
        xv = xmin + k * (xmax - xmin) / 4
        yv = ymin + k * (ymax - ymin) / 4
        out.append(f'<text x="{sx(xv):.1f}" y="{top + ph + 16}" text-anchor="middle">{_fmt(xv)}</text>\n')
        out.append(f'<text x="{left - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end">{_fmt(yv)}</text>\n')
    for idx, (name, vals) in enumerate(series.items()):
        color = PALETTE[idx % len(PALETTE)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(xs, vals) if math.isfinite(b))
        dash = ' stroke-dasharray="6 3"' if name in dashed else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>\n')
        ly = top + 14 + 18 * idx
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 30}" y2="{ly}" stroke="{color}"'
                   f' stroke-width="2"{dash}/>\n')
        out.append(f'<text x="{left + pw + 35}" y="{ly + 4}">{html.escape(name)}</text>\n')
    out.append("</svg>\n")
    return "".join(out)


def _diverging(v: float, scale: float) -> str:
    a = max(-1.0, min(1.0, v / scale)) if scale > 0 else 0.0
    if a >= 0:
        r, g, b = 255, int(255 * (1 - a)), int(255 * (1 - a))
    else:
        r, g, b = int(255 * (1 + a)), int(255 * (1 + a)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def heat_map(values: np.ndarray, q_axis: Sequence[float], p_axis: Sequence[float], title: str = "",
             meta: str | None = None, size: int = 360, max_cells: int = 121) -> str:
    """Diverging red/blue map, ``values[i_q, j_p]`` with ``q`` horizontal; downsampled to ``max_cells``."""
    vals = np.asarray(values, float)
    sq = max(1, math.ceil(vals.shape[0] / max_cells))
    sp = max(1, math.ceil(vals.shape[1] / max_cells))
    sub = vals[::sq, ::sp]
    nq, np_ = sub.shape
    scale = float(np.max(np.abs(vals))) or 1.0
    cw, ch = size / nq, size / np_
    pad = 40
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2 * pad}" height="{size + 2 * pad}" '
           f'font-family="sans-serif" font-size="12">\n', _metadata(meta),
           f'<text x="{pad + size / 2}" y="24" text-anchor="middle">{html.escape(title)}</text>\n']
    for i in range(nq):
        for j in range(np_):
            x = pad + i * cw
            y = pad + (np_ - 1 - j) * ch
            out.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.05:.2f}" height="{ch + 0.05:.2f}" '
                       f'fill="{_diverging(sub[i, j], scale)}"/>\n')
    q0, q1 = float(q_axis[0]), float(q_axis[-1])
    out.append(f'<text x="{pad}" y="{pad + size + 16}">q={_fmt(q0)}</text>\n')
    out.append(f'<text x="{pad + size}" y="{pad + size + 16}" text-anchor="end">q={_fmt(q1)}</text>\n')
    out.append(f'<text x="{pad + size / 2}" y="{pad + size + 32}" text-anchor="middle">'
               f'range [{_fmt(float(vals.min()))}, {_fmt(float(vals.max()))}]</text>\n')
    out.append("</svg>\n")
    return "".join(out)
