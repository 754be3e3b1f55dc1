"""Plane geometry on Python complex numbers for cuts and routing."""

from __future__ import annotations

import math

EPS = 1e-12


def cross(a: complex, b: complex) -> float:
    return a.real * b.imag - a.imag * b.real


def dot(a: complex, b: complex) -> float:
    return a.real * b.real + a.imag * b.imag


def segment_point_distance(a: complex, b: complex, p: complex) -> float:
    ab = b - a
    n2 = dot(ab, ab)
    if n2 == 0:
        return abs(p - a)
    t = min(1.0, max(0.0, dot(p - a, ab) / n2))
    return abs(p - (a + t * ab))


def ray_point_distance(o: complex, d: complex, p: complex) -> float:
    t = max(0.0, dot(p - o, d))
    return abs(p - (o + t * d))


def segment_segment_distance(a: complex, b: complex, c: complex, d: complex) -> float:
    if segments_intersect(a, b, c, d):
        return 0.0
    return min(
        segment_point_distance(c, d, a),
        segment_point_distance(c, d, b),
        segment_point_distance(a, b, c),
        segment_point_distance(a, b, d),
    )


def _orient(a: complex, b: complex, c: complex, tol: float) -> int:
    v = cross(b - a, c - a)
    if abs(v) <= tol:
        return 0
    return 1 if v > 0 else -1


def _on_segment(a: complex, b: complex, p: complex, tol: float) -> bool:
    return segment_point_distance(a, b, p) <= tol


def segments_intersect(a: complex, b: complex, c: complex, d: complex, tol: float | None = None) -> bool:
    """Closed-segment intersection test, touching included."""
    scale = max(1.0, abs(a), abs(b), abs(c), abs(d))
    tol = EPS * scale if tol is None else tol
    o1 = _orient(a, b, c, tol * scale)
    o2 = _orient(a, b, d, tol * scale)
    o3 = _orient(c, d, a, tol * scale)
    o4 = _orient(c, d, b, tol * scale)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return (
        _on_segment(a, b, c, tol)
        or _on_segment(a, b, d, tol)
        or _on_segment(c, d, a, tol)
        or _on_segment(c, d, b, tol)
    )


def angle(z: complex) -> float:
    return math.atan2(z.imag, z.real)
