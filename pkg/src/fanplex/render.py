"""Deterministic SVG rendering of fan and simplex stages.

Fans use the fixed plane embedding: apex at (1/2, 0), each spike drawn
toward (cantor_x(address), 1) and scaled by its level. Simplices draw the
2-D shadow spanned by the first two barycentric coordinates. Output bytes
depend only on the input data.
"""

from __future__ import annotations

from fractions import Fraction

from . import fans, simplices


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def _svg_header(width: int, height: int) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]


def fan_plane_point(
    address: str, level: Fraction, t: Fraction
) -> tuple[Fraction, Fraction]:
    """Unit-square coordinates of the point at parameter t on the spike."""
    cx = fans.cantor_x(address)
    scale = t * level
    half = Fraction(1, 2)
    return (half + scale * (cx - half), scale)


def fan_to_svg(
    fan: fans.FiniteFan,
    width: int = 640,
    height: int = 640,
    stroke: Fraction = Fraction(3, 2),
) -> str:
    margin = 0.06
    sw = _fmt(float(stroke))

    def place(u: Fraction, v: Fraction) -> tuple[float, float]:
        x = margin * width + float(u) * (1 - 2 * margin) * width
        y = height - (margin * height + float(v) * (1 - 2 * margin) * height)
        return x, y

    parts = _svg_header(width, height)
    apex = place(Fraction(1, 2), Fraction(0))
    for i, ep in enumerate(fan.endpoints):
        tip_u, tip_v = fan_plane_point(ep.address, ep.level, Fraction(1))
        tip = place(tip_u, tip_v)
        parts.append(
            f'<line x1="{_fmt(apex[0])}" y1="{_fmt(apex[1])}" '
            f'x2="{_fmt(tip[0])}" y2="{_fmt(tip[1])}" '
            f'stroke="black" stroke-width="{sw}"/>'
        )
        marker = "crimson" if fan.skeleton is not None and i in fan.skeleton else "black"
        parts.append(
            f'<circle cx="{_fmt(tip[0])}" cy="{_fmt(tip[1])}" r="3.000000" '
            f'fill="{marker}"/>'
        )
    parts.append(
        f'<circle cx="{_fmt(apex[0])}" cy="{_fmt(apex[1])}" r="2.500000" fill="black"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def simplex_to_svg(
    simp: simplices.Simplex,
    width: int = 640,
    height: int = 640,
    stroke: Fraction = Fraction(3, 2),
) -> str:
    margin = 0.1
    sw = _fmt(float(stroke))

    def shadow(i: int) -> tuple[Fraction, Fraction]:
        if i == 0:
            return (Fraction(1), Fraction(0))
        if i == 1:
            return (Fraction(0), Fraction(1))
        return (Fraction(0), Fraction(0))

    def place(u: Fraction, v: Fraction) -> tuple[float, float]:
        x = margin * width + float(u) * (1 - 2 * margin) * width
        y = height - (margin * height + float(v) * (1 - 2 * margin) * height)
        return x, y

    parts = _svg_header(width, height)
    shown = min(simp.n_vertices, 12)
    points = [place(*shadow(i)) for i in range(shown)]
    for a in range(shown):
        for b in range(a + 1, shown):
            parts.append(
                f'<line x1="{_fmt(points[a][0])}" y1="{_fmt(points[a][1])}" '
                f'x2="{_fmt(points[b][0])}" y2="{_fmt(points[b][1])}" '
                f'stroke="black" stroke-width="{sw}"/>'
            )
    for a in range(shown):
        parts.append(
            f'<circle cx="{_fmt(points[a][0])}" cy="{_fmt(points[a][1])}" '
            f'r="3.000000" fill="black"/>'
        )
    parts.append(
        f'<text x="{_fmt(0.04 * width)}" y="{_fmt(0.97 * height)}" '
        f'font-family="monospace" font-size="14">dim={simp.dim} '
        f"(2-D shadow of the first two coordinates)</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_stage(obj, width: int = 640, height: int = 640, stroke=Fraction(3, 2)) -> str:
    if isinstance(obj, fans.FiniteFan):
        return fan_to_svg(obj, width, height, Fraction(stroke))
    if isinstance(obj, simplices.Simplex):
        return simplex_to_svg(obj, width, height, Fraction(stroke))
    raise TypeError(f"cannot render {type(obj).__name__}")
