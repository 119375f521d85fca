"""Deterministic SVG drawings of ray-bundle diagrams."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .voronoi import BisectorSample, Diagram

PALETTE = (
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3",
    "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd",
    "#ccebc5", "#ffed6f",
)


@dataclass(frozen=True)
class Style:
    width: int = 600
    margin: int = 10
    stroke: str = "#333333"
    stroke_width: float = 0.6
    fill_opacity: float = 0.8
    dot_radius: float = 2.5
    dot_color: str = "#000000"
    bisector_color: str = "#d62728"
    bisector_radius: float = 0.6
    decimals: int = 3


def _num(x: float, decimals: int) -> str:
    if not math.isfinite(x):
        raise ValueError("refusing to serialize a non-finite coordinate")
    s = f"{x:.{decimals}f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(
    diagram: Diagram,
    style: Style | Mapping | None = None,
    bisectors: Sequence[BisectorSample] = (),
) -> str:
    """One filled star polygon per site point (ray endpoints by angle), the
    site points as dots and optional bisector samples on top."""
    if style is None:
        style = Style()
    elif not isinstance(style, Style):
        style = Style(**dict(style))
    box = diagram.scene.box
    (ax, ay), (bx, by) = box.lo, box.hi
    scale = (style.width - 2 * style.margin) / (bx - ax)
    height = int(round((by - ay) * scale)) + 2 * style.margin
    d = style.decimals

    def px(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        out = np.empty_like(pts)
        out[:, 0] = style.margin + (pts[:, 0] - ax) * scale
        out[:, 1] = style.margin + (by - pts[:, 1]) * scale
        return out

    def finite(pts: np.ndarray) -> np.ndarray:
        return pts[np.all(np.isfinite(pts), axis=1)]

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{style.width}" '
        f'height="{height}" viewBox="0 0 {style.width} {height}">',
    ]
    if diagram.scene.label:
        lines.append(f"<title>{escape(diagram.scene.label)}</title>")
    x0, y0 = px([[ax, by]])[0]
    lines.append(
        f'<rect x="{_num(x0, d)}" y="{_num(y0, d)}" width="{_num((bx - ax) * scale, d)}" '
        f'height="{_num((by - ay) * scale, d)}" fill="#ffffff" stroke="{style.stroke}" '
        f'stroke-width="{_num(style.stroke_width, d)}"/>'
    )
    for cell in diagram.cells:
        color = PALETTE[cell.site_index % len(PALETTE)]
        lines.append(f'<g id="cell-{cell.site_index + 1}" fill="{color}" '
                     f'fill-opacity="{_num(style.fill_opacity, d)}" stroke="{style.stroke}" '
                     f'stroke-width="{_num(style.stroke_width, d)}" stroke-linejoin="round">')
        for b in cell.bundles:
            pts = finite(px(b.endpoints))
            if len(pts) < 3:
                continue
            coords = " ".join(f"{_num(x, d)},{_num(y, d)}" for x, y in pts)
            lines.append(f'<polygon points="{coords}"/>')
        lines.append("</g>")
    if bisectors:
        lines.append(f'<g id="bisectors" fill="{style.bisector_color}">')
        r = _num(style.bisector_radius, d)
        for sample in bisectors:
            for x, y in finite(px(sample.points)):
                lines.append(f'<circle cx="{_num(x, d)}" cy="{_num(y, d)}" r="{r}"/>')
        lines.append("</g>")
    lines.append(f'<g id="sites" fill="{style.dot_color}">')
    r = _num(style.dot_radius, d)
    for x, y in finite(px(diagram.scene.all_points)):
        lines.append(f'<circle cx="{_num(x, d)}" cy="{_num(y, d)}" r="{r}"/>')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
