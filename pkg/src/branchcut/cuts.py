"""Straight branch cuts: proposal, rule checking, germs and chord alternatives.

The default system puts one ray on every branch point, pointing radially
away from the base point.  ``check_rules`` grades any system against the
adapted Kahan rules R2'-R7'.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from . import geometry as geo
from .algebra import numeric_context
from .continuation import ContinuationError, Path, continue_along, make_jet
from .odecore import (
    IRREGULAR,
    DifferentialOperator,
    InitialConditions,
    IrregularSingularityError,
    SingularityReport,
)
from .symmetry import SymmetryProfile

log = logging.getLogger(__name__)

RAY = "ray"
CHORD = "chord"
CCW = "ccw"
CW = "cw"
RULES = ("R2'", "R3'", "R4'", "R5'", "R6'", "R7'")
# without these the cut plane may not carry a single-valued branch
STRUCTURAL = ("R5'", "R6'")
GEOM_TOL = 1e-9


@dataclass(frozen=True)
class BranchCut:
    """A ray ``origin + t*direction`` (t >= 0) or a chord from ``origin`` to ``endpoint``.

    ``origin_index``/``endpoint_index`` point into the report's
    ``finite_points``.
    """

    origin: complex
    origin_index: int
    kind: str = RAY
    direction: Optional[complex] = None
    endpoint: Optional[complex] = None
    endpoint_index: Optional[int] = None
    flags: tuple = ()

    def __post_init__(self):
        if self.kind == RAY:
            d = complex(self.direction)
            object.__setattr__(self, "direction", d / abs(d))
        elif self.kind == CHORD:
            if self.endpoint is None:
                raise ValueError("chord without endpoint")
            d = complex(self.endpoint) - complex(self.origin)
            object.__setattr__(self, "direction", d / abs(d))
        else:
            raise ValueError(f"unknown cut kind {self.kind!r}")

    @property
    def angle(self) -> float:
        return geo.angle(self.direction)

    def segment(self, extent: float) -> tuple:
        a = complex(self.origin)
        if self.kind == RAY:
            return a, a + self.direction * extent
        return a, complex(self.endpoint)

    def key(self, tol: float = GEOM_TOL) -> tuple:
        """Geometric identity of the point set, rounded at ``tol``."""
        def r(z):
            z = complex(z)
            return (round(z.real / tol), round(z.imag / tol))

        if self.kind == RAY:
            return (RAY, r(self.origin), r(self.direction))
        return (CHORD,) + tuple(sorted([r(self.origin), r(self.endpoint)]))

    def mapped(self, f) -> "BranchCut":
        """Image under the real-linear plane map ``f`` that fixes 0."""
        o = f(complex(self.origin))
        if self.kind == RAY:
            return BranchCut(o, self.origin_index, RAY, f(self.direction), flags=self.flags)
        return BranchCut(o, self.origin_index, CHORD, endpoint=f(complex(self.endpoint)),
                         endpoint_index=self.endpoint_index, flags=self.flags)


@dataclass(frozen=True)
class RuleVerdict:
    rule: str
    passed: bool
    diagnostic: str = ""


@dataclass(frozen=True)
class Germ:
    singularity: object
    approach_angle: float
    adherence: str
    exponents: tuple
    has_logs: Optional[bool]


@dataclass(frozen=True)
class CutSystem:
    cuts: tuple
    base_point: complex
    adherence: tuple
    rule_report: tuple = ()
    label: str = "radial"
    monodromy_validated: bool = False
    rho0: float = math.inf
    monodromy_deviation: Optional[float] = None

    @property
    def failed_rules(self) -> tuple:
        return tuple(v.rule for v in self.rule_report if not v.passed)

    @property
    def single_valued(self) -> bool:
        """R5', R6' and either R7' or trivial monodromy around every chord.

        R2'-R4' choose between systems; they do not affect single-valuedness.
        """
        failed = set(self.failed_rules)
        if failed & set(STRUCTURAL):
            return False
        return "R7'" not in failed or self.monodromy_validated

    def verdict(self, rule: str) -> RuleVerdict:
        for v in self.rule_report:
            if v.rule == rule:
                return v
        raise KeyError(rule)


def _branch(report: SingularityReport) -> list:
    """(index, complex location) of every non-apparent finite singular point."""
    return [(k, complex(p.location)) for k, p in enumerate(report.finite_points) if not p.is_apparent]


def base_radius(report: SingularityReport, x0: complex) -> float:
    return min((abs(s - x0) for _, s in _branch(report)), default=math.inf)


def _normalize_adherence(adherence, n: int) -> tuple:
    if isinstance(adherence, str):
        adherence = (adherence,) * n
    adherence = tuple(adherence)
    if len(adherence) != n or any(a not in (CCW, CW) for a in adherence):
        raise ValueError(f"adherence must be {n} entries of 'ccw'/'cw'")
    return adherence


def propose_cuts(report: SingularityReport, sym: SymmetryProfile, ics: InitialConditions,
                 adherence=CCW) -> CutSystem:
    """Radial default: one outward ray per branch point, then rule checks.

    A ray that would run through a further branch point is split into a
    chord up to that point (flagged ``collinear``); the far point's own
    ray continues the line.
    """
    if any(p.kind == IRREGULAR for p in report.finite_points):
        raise IrregularSingularityError("cuts are only proposed for regular singular points")
    x0 = complex(ics.base_point)
    pts = _branch(report)
    cuts = []
    for k, s in pts:
        d = (s - x0) / abs(s - x0)
        beyond = [(geo.dot(t - s, d), j, t) for j, t in pts
                  if j != k and geo.dot(t - s, d) > 0
                  and geo.ray_point_distance(s, d, t) < GEOM_TOL * max(1.0, abs(t))]
        if beyond:
            _, j, t = min(beyond)
            cuts.append(BranchCut(s, k, CHORD, endpoint=t, endpoint_index=j, flags=("collinear",)))
        else:
            cuts.append(BranchCut(s, k, RAY, d))
    system = CutSystem(tuple(cuts), x0, _normalize_adherence(adherence, len(cuts)),
                       rho0=base_radius(report, x0))
    return replace(system, rule_report=check_rules(system, report, sym))


def with_adherence(system: CutSystem, adherence) -> CutSystem:
    return replace(system, adherence=_normalize_adherence(adherence, len(system.cuts)))


# -- rules ------------------------------------------------------------------


def _extent(system: CutSystem, report: SingularityReport) -> float:
    pts = [abs(complex(p.location)) for p in report.finite_points] + [abs(system.base_point)]
    return 10 * (max(pts) + 1)


def same_cut(a: BranchCut, b: BranchCut, tol: float = GEOM_TOL) -> bool:
    """Whether two cuts are the same point set (up to ``tol``)."""
    if a.kind != b.kind:
        return False

    def close(u, v):
        return abs(complex(u) - complex(v)) <= tol * max(1.0, abs(complex(u)))

    if a.kind == RAY:
        return close(a.origin, b.origin) and close(a.direction, b.direction)
    return ((close(a.origin, b.origin) and close(a.endpoint, b.endpoint))
            or (close(a.origin, b.endpoint) and close(a.endpoint, b.origin)))


def _closed_under(cuts: Sequence[BranchCut], f) -> list:
    """Cuts whose image under ``f`` is not in the system."""
    return [c for c in cuts if not any(same_cut(c.mapped(f), e) for e in cuts)]


def _describe(c: BranchCut) -> str:
    if c.kind == RAY:
        return f"ray from {c.origin:.6g} at angle {c.angle:.6g}"
    return f"chord {c.origin:.6g} -> {complex(c.endpoint):.6g}"


def cut_components(segments: Sequence[tuple]) -> list:
    """Connected components (lists of indices) of a union of closed segments."""
    parent = list(range(len(segments)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(len(segments)), 2):
        if geo.segments_intersect(*segments[i], *segments[j]):
            parent[find(i)] = find(j)
    groups = {}
    for i in range(len(segments)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def check_rules(system: CutSystem, report: SingularityReport, sym: SymmetryProfile) -> tuple:
    x0 = system.base_point
    cuts = system.cuts
    extent = _extent(system, report)
    out = []

    rho0 = base_radius(report, x0)
    intruders = []
    for c in cuts:
        a, b = c.segment(extent)
        dist = geo.segment_point_distance(a, b, x0)
        if dist < rho0 * (1 - GEOM_TOL):
            intruders.append(f"{_describe(c)} comes within {dist:.6g} < {rho0:.6g}")
    out.append(RuleVerdict("R2'", not intruders, "; ".join(intruders) or f"rho0 = {rho0:.6g}"))

    if sym.conjugation:
        bad = _closed_under(cuts, lambda z: complex(z).conjugate())
        out.append(RuleVerdict("R3'", not bad, "; ".join(f"conjugate of {_describe(c)} missing" for c in bad)
                               or "closed under conjugation"))
    else:
        out.append(RuleVerdict("R3'", True, "no conjugation symmetry"))

    orders = sorted({d for d, _, _ in sym.affine if d > 1})
    bad = []
    for d in orders:
        w = complex(math.cos(2 * math.pi / d), math.sin(2 * math.pi / d))
        bad += [f"rotation by 2pi/{d} of {_describe(c)} missing" for c in _closed_under(cuts, lambda z: w * z)]
    out.append(RuleVerdict("R4'", not bad, "; ".join(bad)
                           or (f"closed under rotation orders {orders}" if orders else "no rotation symmetry")))

    branch = [s for _, s in _branch(report)]

    def singular(z):
        return any(abs(z - s) < GEOM_TOL * max(1.0, abs(s)) for s in branch)

    bad = []
    for c in cuts:
        ends = [complex(c.origin)] + ([complex(c.endpoint)] if c.kind == CHORD else [])
        bad += [f"{_describe(c)} ends at {e:.6g}, not a branch point" for e in ends if not singular(e)]
    out.append(RuleVerdict("R5'", not bad, "; ".join(bad) or "all endpoints are branch points"))

    out.append(RuleVerdict("R6'", all(abs(abs(c.direction) - 1) < 1e-12 for c in cuts), "straight by construction"))

    segs = [c.segment(extent) for c in cuts]
    bounded = [comp for comp in cut_components(segs) if all(cuts[i].kind == CHORD for i in comp)]
    out.append(RuleVerdict("R7'", not bounded, "; ".join(
        "bounded component: " + ", ".join(_describe(cuts[i]) for i in comp) for comp in bounded)
        or "every cut component reaches infinity"))
    return tuple(out)


def r7_flood_fill(system: CutSystem, report: SingularityReport, n: int = 400) -> bool:
    """Grid check of R7': every component of the rasterized cut set meets the frame."""
    pts = [complex(p.location) for p in report.finite_points] + [system.base_point]
    cx = sum(pts) / len(pts)
    half = 1.5 * max(abs(p - cx) for p in pts) + 1.0
    lo = cx - half * (1 + 1j)
    h = 2 * half / n

    def cell(z):
        return int((z.real - lo.real) / h), int((z.imag - lo.imag) / h)

    marked = set()
    for c in system.cuts:
        a, b = c.segment(4 * half)
        steps = max(1, int(abs(b - a) / (0.25 * h)))
        for k in range(steps + 1):
            i, j = cell(a + (b - a) * (k / steps))
            if 0 <= i < n and 0 <= j < n:
                marked.add((i, j))
    seen = set()
    for start in marked:
        if start in seen:
            continue
        seen.add(start)
        queue = deque([start])
        touches = False
        while queue:
            i, j = queue.popleft()
            touches = touches or i in (0, n - 1) or j in (0, n - 1)
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    nb = (i + di, j + dj)
                    if nb in marked and nb not in seen:
                        seen.add(nb)
                        queue.append(nb)
        if not touches:
            return False
    return True


# -- germs ------------------------------------------------------------------


def germs_at(system: CutSystem, report: SingularityReport, index: int) -> list:
    """Germs of every cut leaving finite point ``index``."""
    sp = report.finite_points[index]
    out = []
    for c, adh in zip(system.cuts, system.adherence):
        if c.origin_index == index:
            theta = c.angle
        elif c.kind == CHORD and c.endpoint_index == index:
            theta = geo.angle(-c.direction)
        else:
            continue
        out.append(Germ(sp, theta, adh, tuple(sp.exponents), sp.has_logs))
    return out


def germ_at(system: CutSystem, report: SingularityReport, singularity) -> Germ:
    """Germ at a singular point given by index or (approximate) location."""
    if isinstance(singularity, int):
        index = singularity
        if not 0 <= index < len(report.finite_points):
            raise KeyError(f"no finite singular point with index {index}")
    else:
        z = complex(singularity)
        dists = [abs(complex(p.location) - z) for p in report.finite_points]
        index = min(range(len(dists)), key=dists.__getitem__) if dists else -1
        if index < 0 or dists[index] > GEOM_TOL * max(1.0, abs(z)):
            raise KeyError(f"{z} is not a singular point")
    germs = germs_at(system, report, index)
    if not germs:
        raise KeyError(f"no cut ends at {complex(report.finite_points[index].location)}")
    return germs[0]


# -- chord alternatives -----------------------------------------------------


def _matchings(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k in range(len(rest)):
        for m in _matchings(rest[:k] + rest[k + 1:]):
            yield [(first, rest[k])] + m


def chord_loop(a: complex, b: complex, x0: complex, others: Sequence[complex]) -> list:
    """Closed polygon from ``x0`` circling the chord ``[a, b]`` once counter-clockwise.

    A rectangle at distance ``r`` around the chord, reached from ``x0`` by a
    straight tether to the midpoint of its nearest side.
    """
    d = (b - a) / abs(b - a)
    n = 1j * d
    near = [geo.segment_point_distance(a, b, p) for p in others]
    r = 0.4 * min([abs(b - a)] + [t for t in near if t > 0])
    corners = [a - r * d - r * n, b + r * d - r * n, b + r * d + r * n, a - r * d + r * n]
    sides = [(corners[k], corners[(k + 1) % 4]) for k in range(4)]
    mids = [(p + q) / 2 for p, q in sides]
    k = min(range(4), key=lambda i: abs(mids[i] - x0))
    loop = [x0] if abs(mids[k] - x0) > 1e-12 else []
    loop.append(mids[k])
    loop += [corners[(k + 1 + j) % 4] for j in range(4)]
    loop.append(mids[k])
    if abs(mids[k] - x0) > 1e-12:
        loop.append(x0)
    return loop


def alternative_chords(op: DifferentialOperator, report: SingularityReport, sym: SymmetryProfile,
                       ics: InitialConditions, tol: float = 1e-10, dps: int | None = None,
                       max_points: int = 10) -> list:
    """Chord pairings whose every chord has trivial monodromy on the solution.

    Pairings must be closed under conjugation when the problem is
    conjugation symmetric.  Each returned system carries its rule report;
    R2'/R7' failures are expected.
    """
    pts = _branch(report)
    if len(pts) < 2 or len(pts) % 2 or len(pts) > max_points:
        return []
    ctx = numeric_context(dps)
    x0 = complex(ics.base_point)
    jet = make_jet(ics, ctx.dps)
    everything = [complex(p.location) for p in report.finite_points]
    cache = {}

    def deviation(i: int, j: int):
        if (i, j) in cache:
            return cache[(i, j)]
        a, b = dict(pts)[i], dict(pts)[j]
        others = [p for p in everything if abs(p - a) > 1e-12 and abs(p - b) > 1e-12]
        loop = chord_loop(a, b, x0, others)
        try:
            verts = [jet.point] + [ctx.mpc(v) for v in loop[1:-1]] + [jet.point]
            out = continue_along(op, jet, Path(tuple(verts)), dps=ctx.dps)
        except ContinuationError as exc:
            log.info("skipping chord %s -> %s: %s", a, b, exc)
            cache[(i, j)] = None
            return None
        dev = max(abs(u - v) / max(1, abs(v)) for u, v in zip(out.values, jet.values))
        cache[(i, j)] = float(dev)
        return cache[(i, j)]

    systems = []
    seen = set()
    for matching in _matchings([k for k, _ in pts]):
        cuts = tuple(BranchCut(dict(pts)[i], i, CHORD, endpoint=dict(pts)[j], endpoint_index=j)
                     for i, j in matching)
        if sym.conjugation and _closed_under(cuts, lambda z: complex(z).conjugate()):
            continue
        key = frozenset(c.key() for c in cuts)
        if key in seen:
            continue
        seen.add(key)
        devs = [deviation(i, j) for i, j in matching]
        if any(d is None or d >= tol for d in devs):
            continue
        system = CutSystem(cuts, x0, (CCW,) * len(cuts), label="chords",
                           monodromy_validated=True, rho0=base_radius(report, x0),
                           monodromy_deviation=max(devs))
        systems.append(replace(system, rule_report=check_rules(system, report, sym)))
    return systems
