"""SVG picture of singular points, cuts and the base disk of convergence."""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET

from .cuts import RAY, CutSystem
from .odecore import SingularityReport

SIZE = 480
BRANCH_COLOR = "#b00020"
CUT_COLOR = "#1a1a1a"


def _frame(report: SingularityReport, system: CutSystem | None, base) -> tuple:
    pts = [complex(p.location) for p in report.finite_points]
    if base is not None:
        pts.append(complex(base))
    if not pts:
        pts = [0j]
    cx = sum(p.real for p in pts) / len(pts)
    cy = sum(p.imag for p in pts) / len(pts)
    half = max([abs(p - complex(cx, cy)) for p in pts] + [0.5]) * 1.6
    if system is not None and math.isfinite(system.rho0):
        half = max(half, 1.2 * (system.rho0 + abs(complex(base) - complex(cx, cy))))
    return complex(cx, cy), half


def render(report: SingularityReport, system: CutSystem | None = None, base=None,
           title: str = "") -> str:
    """SVG document as a string.  Branch points are crosses, apparent points open circles."""
    center, half = _frame(report, system, base)
    scale = SIZE / (2 * half)

    def xy(z: complex) -> tuple:
        return (round((z.real - center.real) * scale + SIZE / 2, 3),
                round(SIZE / 2 - (z.imag - center.imag) * scale, 3))

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(SIZE), height=str(SIZE),
                     viewBox=f"0 0 {SIZE} {SIZE}")
    if title:
        ET.SubElement(svg, "title").text = title
    defs = ET.SubElement(svg, "defs")
    marker = ET.SubElement(defs, "marker", id="arrow", viewBox="0 0 10 10", refX="9", refY="5",
                           markerWidth="6", markerHeight="6", orient="auto")
    ET.SubElement(marker, "path", d="M 0 0 L 10 5 L 0 10 z", fill=CUT_COLOR)
    ET.SubElement(svg, "rect", x="0", y="0", width=str(SIZE), height=str(SIZE), fill="white")

    # axes through 0 when visible
    x0, y0 = xy(0j)
    axis = {"stroke": "#bbbbbb", "stroke-width": "1"}
    if 0 <= x0 <= SIZE:
        ET.SubElement(svg, "line", x1=str(x0), y1="0", x2=str(x0), y2=str(SIZE), **axis)
    if 0 <= y0 <= SIZE:
        ET.SubElement(svg, "line", x1="0", y1=str(y0), x2=str(SIZE), y2=str(y0), **axis)

    if system is not None and base is not None and math.isfinite(system.rho0):
        bx, by = xy(complex(base))
        ET.SubElement(svg, "circle", cx=str(bx), cy=str(by), r=str(round(system.rho0 * scale, 3)),
                      fill="none", stroke="#3060c0", **{"stroke-dasharray": "6 4", "stroke-width": "1.5"})

    if system is not None:
        reach = 3 * half
        for cut in system.cuts:
            a, b = cut.segment(reach)
            (ax, ay), (bx_, by_) = xy(a), xy(b)
            if cut.kind == RAY:
                # stop just inside the margin so the arrow head shows
                t = _exit_param(ax, ay, bx_, by_)
                bx_, by_ = round(ax + t * (bx_ - ax), 3), round(ay + t * (by_ - ay), 3)
            attrs = {"stroke": CUT_COLOR, "stroke-width": "3", "stroke-linecap": "round"}
            if cut.kind == RAY:
                attrs["marker-end"] = "url(#arrow)"
            ET.SubElement(svg, "line", x1=str(ax), y1=str(ay), x2=str(bx_), y2=str(by_), **attrs)

    r = 6
    for p in report.finite_points:
        px, py = xy(complex(p.location))
        if p.is_apparent:
            ET.SubElement(svg, "circle", cx=str(px), cy=str(py), r=str(r), fill="white",
                          stroke=BRANCH_COLOR, **{"stroke-width": "2"})
        else:
            g = ET.SubElement(svg, "g", stroke=BRANCH_COLOR, **{"stroke-width": "2.5"})
            ET.SubElement(g, "line", x1=str(px - r), y1=str(py - r), x2=str(px + r), y2=str(py + r))
            ET.SubElement(g, "line", x1=str(px - r), y1=str(py + r), x2=str(px + r), y2=str(py - r))
    if base is not None:
        bx, by = xy(complex(base))
        ET.SubElement(svg, "circle", cx=str(bx), cy=str(by), r="3", fill="#3060c0")
    return ET.tostring(svg, encoding="unicode")


def _exit_param(ax, ay, bx, by, margin: float = 12) -> float:
    """Fraction of the segment that stays inside the picture minus ``margin``."""
    t = 1.0
    lo, hi = margin, SIZE - margin
    for a, b in ((ax, bx), (ay, by)):
        d = b - a
        if d > 0 and b > hi:
            t = min(t, (hi - a) / d)
        elif d < 0 and b < lo:
            t = min(t, (lo - a) / d)
    return max(t, 0.0)
