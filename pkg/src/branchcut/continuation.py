"""Taylor-series analytic continuation along polygonal paths.

A solution is carried around as a :class:`Jet`.  Each step expands the
solution at the current point using the operator's local recurrence and
re-evaluates the series (and its derivatives) at the next point, never
farther than ``rho`` times the distance to the nearest branch point.
"""

from __future__ import annotations

import functools
import heapq
import logging
import math
from dataclasses import dataclass
from typing import Sequence

from . import geometry as geo
from .algebra import GaussianRational, numeric_context, to_mp
from .odecore import (
    APPARENT,
    DifferentialOperator,
    InitialConditionError,
    InitialConditions,
    Recurrence,
    SingularPoint,
    _numeric_recurrence,
    check_initial_conditions,
    local_recurrence,
    singularities,
)

logger = logging.getLogger(__name__)

DEFAULT_RHO = 0.5
DEFAULT_EPS = 1e-25
DEFAULT_DELTA = 1e-8
MAX_TERMS = 10000


class ContinuationError(ArithmeticError):
    """Numeric failure in the continuation engine."""


class StepError(ContinuationError):
    pass


class PathError(ContinuationError):
    pass


class RoutingError(ContinuationError):
    pass


class DegenerateBasisError(ContinuationError):
    pass


class RuleViolationError(ContinuationError):
    """Raised when evaluating in a cut system that is not single-valued."""


@dataclass(frozen=True)
class Jet:
    """Solution data at a point: ``values[k] = y^(k)(point)``."""

    point: object
    values: tuple
    error: object = 0

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class Path:
    vertices: tuple

    def __post_init__(self):
        verts = tuple(self.vertices)
        if not verts:
            raise PathError("empty path")
        for k in range(len(verts) - 1):
            if verts[k] == verts[k + 1]:
                raise PathError(f"consecutive vertices {k} and {k + 1} coincide")
        object.__setattr__(self, "vertices", verts)

    @property
    def is_closed(self) -> bool:
        return len(self.vertices) > 1 and self.vertices[0] == self.vertices[-1]


class _Engine:
    """Per-operator numeric data shared by every continuation call."""

    def __init__(self, op: DifferentialOperator, dps: int):
        self.op = op
        self.ctx = numeric_context(dps)
        self.report = singularities(op, dps=dps)
        self.branch = tuple(p.location for p in self.report.branch_points)
        self.apparent = tuple(p for p in self.report.finite_points if p.kind == APPARENT)

    def radius(self, z) -> object:
        if not self.branch:
            return self.ctx.inf
        return min(abs(z - s) for s in self.branch)

    def safe_radius(self, z) -> object:
        """Branch-point radius, further limited by apparent points other than ``z``.

        Near an apparent point the ordinary recurrence amplifies rounding
        errors like ``(h / |z - q|)**k``, so steps stay short relative to it.
        """
        r = self.radius(z)
        for p in self.apparent:
            d = abs(p.location - z)
            if d > self.ctx.mpf(10) ** (-(self.ctx.dps - 8)) * max(1, abs(z)):
                r = min(r, d)
        return r

    def apparent_on_segment(self, a, b) -> list:
        """Apparent points lying on the open segment ``a -> b``, in order."""
        out = []
        ab = b - a
        for p in self.apparent:
            t = ((p.location - a) / ab).real
            if 0 < t < 1 and abs(a + t * ab - p.location) <= self.ctx.mpf(10) ** (-(self.ctx.dps - 8)) * max(1, abs(ab)):
                out.append((t, p.location if p.exact_location is None else p.exact_location.to_mp(self.ctx)))
        return [q for _, q in sorted(out, key=lambda tq: tq[0])]

    def apparent_at(self, z) -> SingularPoint | None:
        for p in self.apparent:
            if abs(p.location - z) <= self.ctx.mpf(10) ** (-(self.ctx.dps - 8)) * max(1, abs(z)):
                return p
        return None

    def jet_length(self, z) -> int:
        p = self.apparent_at(z)
        if p is None:
            return self.op.order
        return max(int(GaussianRational.coerce(e).re) for e in p.exponents) + 1

    def series(self, jet: Jet) -> "_Series":
        ctx = self.ctx
        z = to_mp(jet.point, ctx)
        p = self.apparent_at(z)
        if p is None:
            rec = local_recurrence(self.op, z, ctx)
            roots = list(range(self.op.order))
        else:
            point = p.exact_location if p.exact_location is not None else p.location
            factor = None if p.exact_location is not None else p.exact_factor
            rec = local_recurrence(self.op, point, ctx, factor)
            if rec.exact:
                rec = _numeric_recurrence(rec, ctx)
            roots = [int(GaussianRational.coerce(e).re) for e in p.exponents]
        if len(jet.values) < max(roots) + 1:
            raise InitialConditionError(
                f"jet at {z} needs {max(roots) + 1} values, got {len(jet.values)}"
            )
        fact = ctx.mpf(1)
        free = {}
        given = {}
        for k, v in enumerate(jet.values):
            if k:
                fact *= k
            c = to_mp(v, ctx) / fact
            (free if k in roots else given)[k] = c
        s = _Series(rec, set(roots), free)
        for k, c in given.items():
            forced = s.coeff(k)
            scale = max([abs(x) for x in free.values()] + [abs(c), ctx.mpf(1)])
            if abs(forced - c) > scale * ctx.mpf(10) ** (-(ctx.dps // 2)):
                raise InitialConditionError(
                    f"value of derivative {k} at {z} is inconsistent with the equation"
                )
        return s


class _Series:
    """Lazily extended Taylor coefficients via the scalar local recurrence."""

    def __init__(self, rec: Recurrence, roots: set, free: dict):
        self.rec = rec
        self.roots = roots
        self.free = free
        self.stds = [rec.standard(j) for j in range(rec.depth + 1)]
        self.a: list = []

    def _q(self, j: int, m: int):
        acc = self.rec.zero
        for c in reversed(self.stds[j]):
            acc = acc * m + c
        return acc

    def coeff(self, k: int):
        a = self.a
        zero = self.rec.zero
        while len(a) <= k:
            n = len(a)
            if n in self.roots:
                a.append(self.free.get(n, zero))
                continue
            acc = zero
            for j in range(1, min(n, self.rec.depth) + 1):
                prev = a[n - j]
                if prev:
                    acc += self._q(j, n - j) * prev
            a.append(-acc / self._q(0, n) if acc else zero)
        return a[k]


@functools.lru_cache(maxsize=64)
def _engine(op: DifferentialOperator, dps: int) -> _Engine:
    return _Engine(op, dps)


def engine_for(op: DifferentialOperator, dps: int | None = None) -> _Engine:
    return _engine(op, numeric_context(dps).dps)


def make_jet(ics: InitialConditions, dps: int | None = None) -> Jet:
    ctx = numeric_context(dps)
    return Jet(ics.base_point.to_mp(ctx), ics.numeric_values(ctx), ctx.mpf(0))


def taylor_coeffs(op: DifferentialOperator, jet: Jet, N: int, dps: int | None = None,
                  delta: float = DEFAULT_DELTA) -> list:
    """First ``N`` Taylor coefficients of the solution at ``jet.point``."""
    eng = engine_for(op, dps)
    z = to_mp(jet.point, eng.ctx)
    if eng.radius(z) <= delta:
        raise StepError(f"{z} is within {delta} of a branch point")
    series = eng.series(jet)
    return [series.coeff(k) for k in range(N)]


def step(op: DifferentialOperator, jet: Jet, target, rho: float = DEFAULT_RHO,
         eps: float = DEFAULT_EPS, dps: int | None = None) -> Jet:
    """Move ``jet`` to ``target`` with one adaptively truncated Taylor step."""
    eng = engine_for(op, dps)
    ctx = eng.ctx
    z = to_mp(jet.point, ctx)
    target = to_mp(target, ctx)
    h = target - z
    R = eng.radius(z)
    if abs(h) > rho * R * (1 + 1e-12):
        raise StepError(f"step {z} -> {target} exceeds rho * radius = {rho * R}")
    L = eng.jet_length(target)
    if h == 0:
        return Jet(target, tuple(jet.values[:L]), jet.error)
    series = eng.series(jet)
    window = op.order + 2
    sums = [ctx.mpc(0)] * L
    hk = ctx.mpc(1)
    scale = ctx.mpf(0)
    recent: list = []
    k = 0
    while True:
        if k >= MAX_TERMS:
            raise ContinuationError(f"series tail not decaying after {MAX_TERMS} terms at {z}")
        a = series.coeff(k)
        term = a * hk
        ff = 1
        for d in range(L):
            if d:
                ff *= (k - d + 1)
                if ff == 0:
                    break
            sums[d] += term * ff
        mag = abs(term) * max(1, k) ** (L - 1)
        scale = max(scale, mag)
        recent.append(mag)
        if len(recent) > window:
            recent.pop(0)
        k += 1
        hk *= h
        if k > len(jet.values) + window and all(m <= eps * scale for m in recent):
            break
    values = []
    hd = ctx.mpc(1)
    for d in range(L):
        values.append(sums[d] / hd)
        hd *= h
    tail = 2 * max(recent)
    rounding = k * scale * ctx.mpf(10) ** (-ctx.dps)
    return Jet(target, tuple(values), jet.error + tail + rounding)


def _check_clearance(eng: _Engine, path: Path, delta: float) -> None:
    verts = [complex(to_mp(v, eng.ctx)) for v in path.vertices]
    branch = [complex(s) for s in eng.branch]
    for k, v in enumerate(verts):
        for s in branch:
            if abs(v - s) < delta:
                raise PathError(f"vertex {k} ({v}) is within {delta} of branch point {s}")
    for k in range(len(verts) - 1):
        for s in branch:
            if geo.segment_point_distance(verts[k], verts[k + 1], s) < delta:
                raise PathError(f"leg {k} ({verts[k]} -> {verts[k + 1]}) passes within {delta} of {s}")


def continue_along(op: DifferentialOperator, jet: Jet, path: Path | Sequence,
                   rho: float = DEFAULT_RHO, eps: float = DEFAULT_EPS,
                   delta: float = DEFAULT_DELTA, dps: int | None = None) -> Jet:
    """Analytically continue ``jet`` along the polygon ``path``."""
    if not isinstance(path, Path):
        path = Path(tuple(path))
    eng = engine_for(op, dps)
    ctx = eng.ctx
    verts = [to_mp(v, ctx) for v in path.vertices]
    start = to_mp(jet.point, ctx)
    if abs(verts[0] - start) > ctx.mpf(10) ** (-(ctx.dps - 5)) * max(1, abs(start)):
        raise PathError(f"path starts at {verts[0]}, jet is at {start}")
    _check_clearance(eng, path, delta)
    legs = [verts[0]]
    for end in verts[1:]:
        legs.extend(eng.apparent_on_segment(legs[-1], end))
        legs.append(end)
    for end in legs[1:]:
        while True:
            z = to_mp(jet.point, ctx)
            rem = end - z
            dist = abs(rem)
            if dist == 0:
                break
            reach = rho * eng.safe_radius(z)
            if dist <= rho * eng.radius(z) and eng.apparent_at(end) is not None:
                reach = dist
            target = end if dist <= reach else z + rem * (reach / dist)
            jet = step(op, jet, target, rho=rho, eps=eps, dps=ctx.dps)
            if target is end:
                break
    return jet


def standard_basis(op: DifferentialOperator, point, dps: int | None = None) -> list:
    """Jets at ``point`` of a basis of the solution space.

    At ordinary points these are the unit jets; at an apparent singular point
    they are the solutions ``t^e + ...`` for each local exponent ``e``.
    """
    eng = engine_for(op, dps)
    ctx = eng.ctx
    z = to_mp(point, ctx)
    L = eng.jet_length(z)
    p = eng.apparent_at(z)
    exps = list(range(op.order)) if p is None else [int(GaussianRational.coerce(e).re) for e in p.exponents]
    jets = []
    for e in exps:
        raw = [ctx.mpc(0)] * L
        raw[e] = ctx.factorial(e)
        probe = Jet(z, tuple(raw), ctx.mpf(0))
        if p is not None:
            series = eng.series(probe)
            raw = [series.coeff(k) * ctx.factorial(k) for k in range(L)]
        jets.append(Jet(z, tuple(raw), ctx.mpf(0)))
    return jets


def _solve(ctx, rows, rhs_cols):
    A = ctx.matrix(rows)
    B = ctx.matrix(rhs_cols)
    return ctx.lu_solve(A, B)


def monodromy(op: DifferentialOperator, basis: Sequence[Jet], loop: Path | Sequence,
              dps: int | None = None, **kw) -> tuple:
    """Matrix ``M`` with ``continued_j = sum_i M[i][j] basis_i`` around ``loop``."""
    if not isinstance(loop, Path):
        loop = Path(tuple(loop))
    if not loop.is_closed:
        raise PathError("monodromy loop must be closed")
    eng = engine_for(op, dps)
    ctx = eng.ctx
    n = len(basis)
    cont = [continue_along(op, b, loop, dps=ctx.dps, **kw) for b in basis]
    # restrict to the coordinates that identify a solution at the base point
    idx = _identifying_coordinates(eng, basis[0].point, n)
    B = ctx.matrix([[basis[j].values[i] for j in range(n)] for i in idx])
    C = ctx.matrix([[cont[j].values[i] for j in range(n)] for i in idx])
    try:
        Binv = ctx.inverse(B)
    except ZeroDivisionError:
        raise DegenerateBasisError("basis jets are linearly dependent") from None
    cond = ctx.mnorm(B, 1) * ctx.mnorm(Binv, 1)
    if cond > ctx.mpf(10) ** (ctx.dps // 2):
        raise DegenerateBasisError(f"basis condition number {ctx.nstr(cond, 5)} too large")
    M = Binv * C
    return tuple(tuple(M[i, j] for j in range(n)) for i in range(n))


def _identifying_coordinates(eng: _Engine, point, n: int) -> list:
    p = eng.apparent_at(to_mp(point, eng.ctx))
    if p is None:
        return list(range(n))
    return [int(GaussianRational.coerce(e).re) for e in p.exponents]


# -- evaluation in a cut plane ---------------------------------------------


@dataclass(frozen=True)
class Evaluation:
    value: object
    error: object
    path: tuple
    on_cut: bool = False


def _cut_segments(system, extent: float) -> list:
    segs = []
    for cut in system.cuts:
        a = complex(cut.origin)
        if cut.kind == "ray":
            segs.append((a, a + complex(cut.direction) * extent))
        else:
            segs.append((a, complex(cut.endpoint)))
    return segs


def _cut_direction(cut) -> complex:
    if cut.kind == "ray":
        return complex(cut.direction)
    d = complex(cut.endpoint) - complex(cut.origin)
    return d / abs(d)


def find_cut_at(system, z: complex, tol: float = 1e-12):
    """Index of a cut containing ``z`` (within ``tol`` relative), else None."""
    extent = 10 * (abs(z) + max((abs(complex(c.origin)) for c in system.cuts), default=0) + 1)
    for k, (a, b) in enumerate(_cut_segments(system, extent)):
        if geo.segment_point_distance(a, b, z) <= tol * max(1.0, abs(z)):
            return k
    return None


def plan_route(system, start: complex, goal: complex, branch: Sequence[complex]) -> list:
    """Shortest polygon from ``start`` to ``goal`` that touches no cut.

    Candidate waypoints sit on small rings around every branch point; edges
    are straight segments that avoid all cuts and keep clear of branch points.
    """
    pts = [complex(s) for s in branch]
    if not pts:
        return [start, goal]
    extent = 10 * (max([abs(start), abs(goal)] + [abs(s) for s in pts]) + 1)
    segs = _cut_segments(system, extent)
    sep = [min([abs(s - t) for t in pts if t != s] + [abs(s - start)]) for s in pts]
    clearance = 0.05 * min(sep)

    def edge_ok(u: complex, v: complex) -> bool:
        if any(geo.segments_intersect(u, v, a, b) for a, b in segs):
            return False
        return all(geo.segment_point_distance(u, v, s) > clearance for s in pts)

    if edge_ok(start, goal):
        return [start, goal]

    nodes = [start, goal]
    for s, d in zip(pts, sep):
        r = 0.25 * d
        thetas = [2 * math.pi * k / 16 for k in range(16)]
        for cut in system.cuts:
            ends = [(complex(cut.origin), 1.0)]
            if cut.kind == "chord":
                ends.append((complex(cut.endpoint), -1.0))
            for end, sign in ends:
                if abs(end - s) < 1e-9 * max(1.0, abs(s)):
                    th = geo.angle(_cut_direction(cut) * sign)
                    thetas += [th + 0.35, th - 0.35]
        for th in thetas:
            p = s + r * cmath_exp(th)
            if all(geo.segment_point_distance(a, b, p) > 0.05 * r for a, b in segs):
                nodes.append(p)
    n = len(nodes)
    dist = [math.inf] * n
    prev = [-1] * n
    dist[0] = 0.0
    heap = [(0.0, 0)]
    while heap:
        d0, u = heapq.heappop(heap)
        if d0 > dist[u]:
            continue
        if u == 1:
            break
        for v in range(1, n):
            nd = d0 + abs(nodes[v] - nodes[u])
            if v != u and nd < dist[v] and edge_ok(nodes[u], nodes[v]):
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if prev[1] < 0:
        raise RoutingError(f"no cut-free route from {start} to {goal}")
    route = [1]
    while route[-1] != 0:
        route.append(prev[route[-1]])
    return [nodes[k] for k in reversed(route)]


def cmath_exp(theta: float) -> complex:
    return complex(math.cos(theta), math.sin(theta))


def adherent_side(system, k: int) -> complex:
    """Unit normal pointing to the side whose limit defines values on cut ``k``."""
    d = _cut_direction(system.cuts[k])
    return -1j * d if system.adherence[k] == "ccw" else 1j * d


def _off_cut(system, k: int, z: complex, branch: Sequence[complex]) -> complex:
    """A point next to ``z`` on the adherent side of cut ``k``, clear of other cuts."""
    side = adherent_side(system, k)
    h = 0.25 * min(abs(z - s) for s in branch)
    extent = 10 * (abs(z) + max(abs(s) for s in branch) + 1)
    others = [seg for j, seg in enumerate(_cut_segments(system, extent)) if j != k]
    while any(geo.segment_point_distance(a, b, z + h * side) < 0.5 * h for a, b in others):
        h *= 0.5
        if h < 1e-6:
            raise RoutingError(f"cannot leave the cut at {z} on its adherent side")
    return z + h * side


def evaluate(op: DifferentialOperator, ics: InitialConditions, system, z,
             rho: float = DEFAULT_RHO, eps: float = DEFAULT_EPS,
             delta: float = DEFAULT_DELTA, dps: int | None = None,
             force: bool = False) -> Evaluation:
    """Value at ``z`` of the single-valued branch fixed by ``ics`` and ``system``."""
    if not force and not system.single_valued:
        raise RuleViolationError(
            "cut system does not guarantee single-valuedness: " + ", ".join(system.failed_rules)
        )
    eng = engine_for(op, dps)
    ctx = eng.ctx
    check_initial_conditions(op, ics, eng.report)
    ztarget = to_mp(z, ctx)
    zc = complex(ztarget)
    if eng.branch and min(abs(zc - complex(s)) for s in eng.branch) < delta:
        raise ContinuationError(f"{zc} is a branch point")
    jet = make_jet(ics, ctx.dps)
    start = complex(jet.point)
    branch = [complex(s) for s in eng.branch]
    # a base point on a cut carries the value of the adherent side
    head = [jet.point]
    kb = find_cut_at(system, start)
    if kb is not None:
        start = _off_cut(system, kb, start, branch)
        head.append(ctx.mpc(start))
    k = find_cut_at(system, zc)
    if k is None:
        waypoints = plan_route(system, start, zc, branch)
        verts = head + [ctx.mpc(w) for w in waypoints[1:-1]] + [ztarget]
        on_cut = False
    else:
        approach = _off_cut(system, k, zc, branch)
        waypoints = plan_route(system, start, approach, branch)
        verts = head + [ctx.mpc(w) for w in waypoints[1:]] + [ztarget]
        on_cut = True
    final = continue_along(op, jet, Path(tuple(verts)), rho=rho, eps=eps, delta=delta, dps=ctx.dps)
    return Evaluation(final.values[0], final.error, tuple(verts), on_cut)
