"""Linear ODEs, their homogeneous operators, and local analysis at points.

An operator ``sum c_i(x) D^i`` is rewritten at a point ``s`` in Euler form
``t**-nu * L = sum_j t**j Q_j(theta)`` (``t = x - s``, ``theta = t d/dt``).
``Q_0`` is the indicial polynomial and the ``Q_j`` drive every series
recurrence in the package, ordinary points included.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import (
    ONE,
    ZERO,
    GaussianRational,
    PiLinear,
    Poly,
    _factor_roots,
    linear_root,
    numeric_context,
    poly_gcd,
    poly_gcd_many,
    root_sort_key,
    squarefree_decomposition,
    to_mp,
)

logger = logging.getLogger(__name__)

REGULAR = "regular"
IRREGULAR = "irregular"
APPARENT = "apparent"
ORDINARY = "ordinary"


class ODEError(ValueError):
    pass


class IrregularSingularityError(ODEError):
    pass


class InitialConditionError(ODEError):
    pass


# -- operators --------------------------------------------------------------


def _normalize_coeffs(coeffs: Sequence[Poly], extra: Sequence[Poly] = ()) -> tuple:
    coeffs = list(coeffs)
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    if not coeffs:
        raise ODEError("zero operator")
    g = poly_gcd_many([c for c in list(coeffs) + list(extra) if c])
    if g.degree > 0:
        coeffs = [c.exact_div(g) for c in coeffs]
        extra = [e.exact_div(g) for e in extra]
    lead = coeffs[-1].leading
    coeffs = [c.scale(ONE / lead) for c in coeffs]
    extra = [e.scale(ONE / lead) for e in extra]
    return tuple(coeffs), tuple(extra)


def _coerce_poly(value) -> Poly:
    if isinstance(value, Poly):
        return value
    if isinstance(value, (list, tuple)):
        return Poly(tuple(value))
    return Poly((value,))


@dataclass(frozen=True)
class DifferentialOperator:
    """Homogeneous operator ``sum coeffs[i] * D**i``, content-normalized."""

    coeffs: tuple

    def __post_init__(self):
        coeffs, _ = _normalize_coeffs([_coerce_poly(c) for c in self.coeffs])
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Poly:
        return self.coeffs[-1]

    @property
    def is_real(self) -> bool:
        return all(c.is_real for c in self.coeffs)

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            d = "" if i == 0 else ("D" if i == 1 else f"D^{i}")
            parts.append(f"({c})*{d}" if d else f"({c})")
        return " + ".join(reversed(parts))


@dataclass(frozen=True)
class LinearODE:
    """``sum coeffs[i] * y^(i) = rhs_num / rhs_den`` with polynomial coefficients."""

    coeffs: tuple
    rhs_num: Poly = field(default_factory=Poly)
    rhs_den: Poly = field(default_factory=lambda: Poly((1,)))

    def __post_init__(self):
        num = _coerce_poly(self.rhs_num)
        den = _coerce_poly(self.rhs_den)
        if not den:
            raise ODEError("rhs denominator is zero")
        g = poly_gcd(num, den) if num else den
        num, den = num // g, den // g
        lead = den.leading
        num, den = num.scale(ONE / lead), den.scale(ONE / lead)
        coeffs, extra = _normalize_coeffs(
            [_coerce_poly(c) for c in self.coeffs], [num] if num else []
        )
        if len(coeffs) < 2:
            raise ODEError("order 0 equation")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "rhs_num", extra[0] if extra else Poly())
        object.__setattr__(self, "rhs_den", den)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_homogeneous(self) -> bool:
        return not self.rhs_num


def homogenize(ode: LinearODE) -> DifferentialOperator:
    """Annihilate the right-hand side by applying ``D - d'/d`` on the left.

    With ``d = p/q`` the result is ``p q (L y)' - (p' q - p q') L y = 0``, one
    order higher than ``ode`` when ``d != 0``.
    """
    if ode.is_homogeneous:
        return DifferentialOperator(ode.coeffs)
    p, q = ode.rhs_num, ode.rhs_den
    a = p * q
    b = p.derivative() * q - p * q.derivative()
    c = list(ode.coeffs) + [Poly()]
    new = []
    for k in range(len(c)):
        prev = c[k - 1] if k else Poly()
        new.append(a * (c[k].derivative() + prev) - b * c[k])
    return DifferentialOperator(tuple(new))


def reciprocal_operator(op: DifferentialOperator) -> DifferentialOperator:
    """Operator in ``t`` satisfied by ``u(t) = y(1/t)``; ``D_x = -t**2 D_t``."""
    n = op.order
    powers = [[Poly((ONE,))]]
    minus_t2 = Poly((ZERO, ZERO, -ONE))
    for _ in range(n):
        prev = powers[-1]
        nxt = [Poly()] * (len(prev) + 1)
        for k, c in enumerate(prev):
            # (-t^2 D)(c D^k) = -t^2 c' D^k - t^2 c D^(k+1)
            nxt[k] = nxt[k] + minus_t2 * c.derivative()
            nxt[k + 1] = nxt[k + 1] + minus_t2 * c
        powers.append(nxt)
    big = max(c.degree for c in op.coeffs if c)
    out = [Poly()] * (n + 1)
    for i, c in enumerate(op.coeffs):
        if not c:
            continue
        # c(1/t) * t^big
        ct = Poly(tuple(reversed(c.coeffs))).shift_degree(big - c.degree)
        for k, pk in enumerate(powers[i]):
            out[k] = out[k] + ct * pk
    return DifferentialOperator(tuple(out))


# -- local recurrences ------------------------------------------------------


def falling(m, i: int, one):
    out = one
    for k in range(i):
        out = out * (m - k)
    return out


def _poly_shift_numeric(coeffs: Sequence, s):
    out = list(coeffs)
    n = len(out)
    for i in range(n):
        for k in range(n - 2, i - 1, -1):
            out[k] = out[k] + s * out[k + 1]
    return out


@dataclass
class Recurrence:
    """Euler-form data of an operator at a point.

    ``q[j][i]`` is the coefficient of the falling factorial ``r^(i)`` in
    ``Q_j(r)``; ``q[0]`` gives the indicial polynomial.
    """

    order: int
    nu: int
    q: list
    exact: bool
    zero: object
    one: object

    @property
    def depth(self) -> int:
        return len(self.q) - 1

    def Q(self, j: int, m):
        coeffs = self.q[j]
        acc = self.zero
        ff = self.one
        for i, c in enumerate(coeffs):
            if i:
                ff = ff * (m - (i - 1))
            if c:
                acc = acc + c * ff
        return acc

    def standard(self, j: int) -> list:
        """Coefficients of ``Q_j`` in the monomial basis, lowest first."""
        out = [self.zero] * (self.order + 1)
        basis = [self.one]
        for i, c in enumerate(self.q[j]):
            if i:
                nb = [self.zero] * (len(basis) + 1)
                for k, b in enumerate(basis):
                    nb[k + 1] = nb[k + 1] + b
                    nb[k] = nb[k] - b * (i - 1)
                basis = nb
            if c:
                for k, b in enumerate(basis):
                    out[k] = out[k] + c * b
        return out


def valuation_at_root(p: Poly, factor: Poly, location, tol: float = 1e-10) -> int | None:
    """Multiplicity of the numeric root ``location`` of the squarefree ``factor`` in ``p``.

    Decided exactly by repeated gcds with ``factor``; numerics only choose
    which roots of the gcd the point belongs to.
    """
    if not p:
        return None
    ctx = location.context
    m = 0
    while True:
        g = poly_gcd(p, factor)
        if g.degree < 1:
            return m
        if g.degree < factor.degree:
            roots = _factor_roots(g, ctx, 1e-8)
            scale = max(1, abs(location))
            if min(abs(r - location) for r in roots) > tol * scale:
                return m
        p = p.exact_div(g)
        m += 1


def local_recurrence(op: DifferentialOperator, point, ctx=None, factor: Poly | None = None) -> Recurrence:
    """Build the Euler-form recurrence of ``op`` at ``point``.

    ``point`` is a GaussianRational (exact data) or an mpmath number; for a
    numeric root of the leading coefficient pass its exact squarefree
    ``factor`` so that valuations are decided exactly.
    """
    n = op.order
    if isinstance(point, (GaussianRational, int, Fraction)):
        s = GaussianRational.coerce(point)
        shifted = [c.taylor_shift(s).coeffs for c in op.coeffs]
        vals = [Poly(c).valuation() for c in shifted]
        exact, zero, one = True, ZERO, ONE
    else:
        ctx = ctx or point.context
        zero, one = ctx.mpc(0), ctx.mpc(1)
        shifted = [_poly_shift_numeric(c.numeric(ctx), point) for c in op.coeffs]
        if factor is not None:
            vals = [valuation_at_root(c, factor, point) for c in op.coeffs]
        else:
            vals = [None if not c else 0 for c in op.coeffs]
            if vals[n] is None or shifted[n][0] == 0:
                raise ODEError("numeric singular point requires its exact factor")
        for i, v in enumerate(vals):
            if v:
                shifted[i] = [zero] * v + list(shifted[i][v:])
        exact = False
    nu = min(v - i for i, v in enumerate(vals) if v is not None)
    depth = max(len(c) - 1 - nu - i for i, c in enumerate(shifted) if c)
    q = []
    for j in range(depth + 1):
        row = []
        for i in range(n + 1):
            k = j + nu + i
            c = shifted[i]
            row.append(c[k] if 0 <= k < len(c) else zero)
        q.append(row)
    return Recurrence(order=n, nu=nu, q=q, exact=exact, zero=zero, one=one)


def is_fuchsian(rec: Recurrence) -> bool:
    return bool(rec.q[0][rec.order])


# -- exponents --------------------------------------------------------------


def _recognize(value, ctx, exact_poly: Poly | None = None, tol=None):
    """Try to recognize a numeric value as a Gaussian rational.

    With ``exact_poly`` the candidate must be an exact root of it; otherwise it
    must lie within ``tol`` of ``value``.
    """
    re = Fraction(ctx.nstr(value.real, ctx.dps)).limit_denominator(10**6)
    im = Fraction(ctx.nstr(value.imag, ctx.dps)).limit_denominator(10**6)
    cand = GaussianRational(re, im)
    if exact_poly is not None:
        return cand if exact_poly(cand) == 0 else None
    return cand if abs(cand.to_mp(ctx) - value) < tol else None


def split_rational_roots(f: Poly, ctx) -> list[Poly]:
    """Split Gaussian-rational linear factors off a squarefree polynomial."""
    if f.degree <= 1:
        return [f]
    linear = []
    rest = f
    for r in _factor_roots(f, ctx, 1e-8):
        cand = _recognize(r, ctx, exact_poly=rest)
        if cand is not None:
            lin = Poly((-cand, ONE))
            rest = rest.exact_div(lin)
            linear.append(lin)
    return linear + ([rest.monic()] if rest.degree > 0 else [])


def exponents_from_indicial(rec: Recurrence, ctx) -> list:
    """Roots of the indicial polynomial with multiplicity, exact when possible.

    Returns a sorted list of ``(value, multiplicity)``.
    """
    std = rec.standard(0)
    if rec.exact:
        out = []
        for f, mult in squarefree_decomposition(Poly(tuple(std))):
            for g in split_rational_roots(f, ctx):
                lin = linear_root(g)
                if lin is not None:
                    out.append((lin, mult))
                else:
                    out.extend((r, mult) for r in _factor_roots(g, ctx, 1e-12))
        return _sort_exponents(out, ctx)
    coeffs = list(reversed(std))
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    raw = ctx.polyroots(coeffs, maxsteps=400, extraprec=2 * ctx.prec)
    raw = [ctx.mpc(r) for r in raw]
    out = []
    used = [False] * len(raw)
    for idx, r in enumerate(raw):
        if used[idx]:
            continue
        cluster = [k for k in range(len(raw))
                   if not used[k] and abs(raw[k] - r) < 1e-8 * max(1, abs(r))]
        for k in cluster:
            used[k] = True
        mean = sum((raw[k] for k in cluster), ctx.mpc(0)) / len(cluster)
        cand = _recognize(mean, ctx, tol=ctx.mpf(10) ** (-(ctx.dps // 3)))
        out.append((cand if cand is not None else mean, len(cluster)))
    return _sort_exponents(out, ctx)


def _sort_exponents(exps, ctx):
    return sorted(exps, key=lambda em: root_sort_key(to_mp(em[0], ctx), 1e-9))


def _integer_difference(a, b, ctx) -> int | None:
    if isinstance(a, GaussianRational) and isinstance(b, GaussianRational):
        d = a - b
        if d.im == 0 and d.re.denominator == 1:
            return int(d.re)
        return None
    d = to_mp(a, ctx) - to_mp(b, ctx)
    k = int(ctx.nint(d.real))
    if abs(d - k) < 1e-10 * max(1, abs(d)):
        return k
    return None


def exponent_classes(exps, ctx) -> list:
    """Group exponents into classes that differ by integers.

    Each class is ``(alpha, {offset: multiplicity})`` with ``alpha`` of least
    real part, so all offsets are nonnegative integers.
    """
    classes: list[list] = []
    for value, mult in exps:
        for cls in classes:
            if _integer_difference(value, cls[0][0], ctx) is not None:
                cls.append((value, mult))
                break
        else:
            classes.append([(value, mult)])
    out = []
    for cls in classes:
        base = min(cls, key=lambda vm: to_mp(vm[0], ctx).real)[0]
        offsets: dict[int, int] = {}
        for value, mult in cls:
            k = _integer_difference(value, base, ctx)
            offsets[k] = offsets.get(k, 0) + mult
        out.append((base, offsets))
    return out


# -- Frobenius series -------------------------------------------------------


def _taylor_at(std: list, m, zero, upto: int) -> list:
    """Taylor coefficients ``Q^(p)(m)/p!`` for ``p <= upto``."""
    shifted = _poly_shift_numeric(std, m)
    out = shifted[: upto + 1]
    return out + [zero] * (upto + 1 - len(out))


def _numeric_recurrence(rec: Recurrence, ctx) -> Recurrence:
    q = [[to_mp(c, ctx) if c else ctx.mpc(0) for c in row] for row in rec.q]
    return Recurrence(rec.order, rec.nu, q, False, ctx.mpc(0), ctx.mpc(1))


def frobenius_series(rec: Recurrence, alpha, roots: dict, free: dict, terms: int,
                     snap: float | None = None):
    """Coefficient vectors of ``sum_k sum_l a[k][l] t^(alpha+k) log(t)^l / l!``.

    ``roots`` maps offsets ``k`` (where ``Q_0(alpha+k) = 0``) to their
    multiplicity; ``free`` supplies the unconstrained log slots at those
    offsets, keyed by ``(k, l)``.  In numeric mode, sums that cancel to below
    ``snap`` times the size of their terms are set to exact zero.
    """
    zero = rec.zero
    K = rec.order
    stds = [rec.standard(j) for j in range(rec.depth + 1)]
    a = []
    for k in range(terms):
        b = [zero] * K
        size = [0] * K
        for j in range(1, min(k, rec.depth) + 1):
            v = a[k - j]
            top = max((l for l in range(K) if v[l]), default=-1)
            if top < 0:
                continue
            d = _taylor_at(stds[j], alpha + (k - j), zero, top)
            for l in range(top + 1):
                for p in range(top - l + 1):
                    if d[p] and v[l + p]:
                        term = d[p] * v[l + p]
                        b[l] = b[l] - term
                        if snap is not None:
                            size[l] = max(size[l], abs(term))
        if snap is not None:
            for l in range(K):
                if b[l] and abs(b[l]) <= snap * size[l]:
                    b[l] = zero
        mu = roots.get(k, 0)
        qd = _taylor_at(stds[0], alpha + k, zero, K + mu)
        for p in range(mu):
            qd[p] = zero
        w = [b[l - mu] if l >= mu else free.get((k, l), zero) for l in range(K)]
        x = [zero] * K
        lead = qd[mu]
        for l in range(K - 1, -1, -1):
            acc = w[l]
            for p in range(1, K - l):
                if qd[mu + p] and x[l + p]:
                    acc = acc - qd[mu + p] * x[l + p]
            x[l] = acc / lead if acc else zero
        a.append(x)
    return a


@dataclass(frozen=True)
class FrobeniusSolution:
    """Truncated ``t^exponent * sum_k sum_l coeffs[k][l] t^k log(t)^l / l!``."""

    exponent: object
    log_degree: int
    coeffs: tuple


@dataclass(frozen=True)
class LocalBasis:
    expansion_point: object
    solutions: tuple


def _local_data(op, s, ctx, factor):
    rec = local_recurrence(op, s, ctx, factor)
    if not is_fuchsian(rec):
        raise IrregularSingularityError(f"irregular singular point at {s}")
    return rec


def local_basis(op: DifferentialOperator, s, N: int, dps: int | None = None,
                factor: Poly | None = None, rec: Recurrence | None = None,
                exps: list | None = None) -> LocalBasis:
    """Full basis of truncated Frobenius solutions at ``s`` with ``N`` terms each.

    At an ordinary point this is the Taylor basis ``t^k + O(t^n)``.
    """
    ctx = numeric_context(dps)
    if N < op.order:
        raise ValueError("need N >= operator order")
    rec = rec or _local_data(op, s, ctx, factor)
    exps = exps if exps is not None else exponents_from_indicial(rec, ctx)
    if rec.exact and not all(isinstance(v, GaussianRational) for v, _ in exps):
        rec = _numeric_recurrence(rec, ctx)
    snap = None if rec.exact else ctx.mpf(10) ** (-(2 * ctx.dps) // 3)
    sols = []
    for alpha, offsets in exponent_classes(exps, ctx):
        span = max(offsets)
        base = alpha if rec.exact else to_mp(alpha, ctx)
        for k0 in sorted(offsets):
            for slot in range(offsets[k0]):
                series = frobenius_series(rec, base, offsets, {(k0, slot): rec.one},
                                          N + span, snap)
                lead = series[k0][slot]
                body = [[c / lead if c else c for c in vec] for vec in series[k0:k0 + N]]
                logdeg = max((l for vec in body for l in range(len(vec)) if vec[l]), default=0)
                sols.append(FrobeniusSolution(
                    exponent=alpha + k0,
                    log_degree=logdeg,
                    coeffs=tuple(tuple(vec[: logdeg + 1]) for vec in body),
                ))
    return LocalBasis(expansion_point=s, solutions=tuple(sols))


# -- singularities ----------------------------------------------------------


@dataclass(frozen=True)
class SingularPoint:
    location: object
    exact_factor: Poly
    exact_location: GaussianRational | None
    kind: str
    exponents: tuple = ()
    has_logs: bool | None = None

    @property
    def is_apparent(self) -> bool:
        return self.kind == APPARENT

    @property
    def point(self):
        """Exact location when available, numeric otherwise."""
        return self.exact_location if self.exact_location is not None else self.location


@dataclass(frozen=True)
class SingularityReport:
    finite_points: tuple
    infinity_class: str
    infinity_exponents: tuple = ()

    @property
    def branch_points(self) -> tuple:
        """Non-apparent finite singular points."""
        return tuple(p for p in self.finite_points if not p.is_apparent)

    @property
    def has_irregular(self) -> bool:
        return self.infinity_class == IRREGULAR or any(p.kind == IRREGULAR for p in self.finite_points)

    @property
    def infinity_singular(self) -> bool:
        return self.infinity_class in (REGULAR, IRREGULAR)


def indicial_polynomial(op: DifferentialOperator, s, dps: int | None = None,
                        factor: Poly | None = None):
    """Indicial polynomial at a regular singular point.

    Exact ``Poly`` when ``s`` is a Gaussian rational, otherwise a tuple of
    mpc coefficients (lowest first).
    """
    ctx = numeric_context(dps)
    rec = local_recurrence(op, s, ctx, factor)
    if _is_ordinary(rec):
        raise ODEError(f"{s} is an ordinary point")
    if not is_fuchsian(rec):
        raise IrregularSingularityError(f"{s} is an irregular singular point")
    std = rec.standard(0)
    lead = std[-1]
    std = [c / lead for c in std]
    return Poly(tuple(std)) if rec.exact else tuple(std)


def _is_ordinary(rec: Recurrence) -> bool:
    # ordinary iff the leading coefficient does not vanish at the point
    return rec.nu == -rec.order and bool(rec.q[0][rec.order])


def default_apparent_terms(exps, order: int, ctx) -> int:
    top = max(float(to_mp(v, ctx).real) for v, _ in exps)
    return int(max(top, 0)) + order + 8


def is_apparent(op: DifferentialOperator, s, N: int | None = None, dps: int | None = None,
                factor: Poly | None = None) -> bool:
    """True iff ``s`` carries a full basis of analytic (log-free, integral) solutions."""
    ctx = numeric_context(dps)
    rec = _local_data(op, s, ctx, factor)
    if _is_ordinary(rec):
        raise ODEError(f"{s} is an ordinary point")
    exps = exponents_from_indicial(rec, ctx)
    return _apparent_from(op, s, rec, exps, N, ctx, factor)[0]


def _apparent_from(op, s, rec, exps, N, ctx, factor):
    integral = all(m == 1 and _integer_difference(v, ZERO, ctx) is not None
                   and _integer_difference(v, ZERO, ctx) >= 0 for v, m in exps)
    N = N or default_apparent_terms(exps, op.order, ctx)
    basis = local_basis(op, s, N, dps=ctx.dps, factor=factor, rec=rec, exps=exps)
    logs = any(sol.log_degree > 0 for sol in basis.solutions)
    return integral and not logs, logs


def singularities(op: DifferentialOperator, tol: float = 1e-12, dps: int | None = None) -> SingularityReport:
    """Locate and classify the finite singular points and the point at infinity."""
    ctx = numeric_context(dps)
    points = []
    for sqf, _mult in squarefree_decomposition(op.leading):
        for factor in split_rational_roots(sqf, ctx):
            exact = linear_root(factor)
            locs = [exact.to_mp(ctx)] if exact is not None else _factor_roots(factor, ctx, tol)
            for loc in locs:
                s = exact if exact is not None else loc
                points.append(_classify(op, s, loc, exact, factor, ctx))
    points.sort(key=lambda p: root_sort_key(p.location, tol))
    inf_class, inf_exps = _classify_infinity(op, ctx)
    return SingularityReport(tuple(points), inf_class, inf_exps)


def _classify(op, s, loc, exact, factor, ctx) -> SingularPoint:
    fac = None if exact is not None else factor
    rec = local_recurrence(op, s, ctx, fac)
    if not is_fuchsian(rec):
        return SingularPoint(loc, factor, exact, IRREGULAR)
    exps = exponents_from_indicial(rec, ctx)
    apparent, logs = _apparent_from(op, s, rec, exps, None, ctx, fac)
    values = tuple(v for v, m in exps for _ in range(m))
    return SingularPoint(loc, factor, exact, APPARENT if apparent else REGULAR, values, logs)


def _classify_infinity(op, ctx):
    rop = reciprocal_operator(op)
    rec = local_recurrence(rop, ZERO, ctx)
    if _is_ordinary(rec):
        return ORDINARY, ()
    if not is_fuchsian(rec):
        return IRREGULAR, ()
    exps = exponents_from_indicial(rec, ctx)
    apparent, _ = _apparent_from(rop, ZERO, rec, exps, None, ctx, None)
    values = tuple(v for v, m in exps for _ in range(m))
    return (APPARENT if apparent else REGULAR), values


# -- initial conditions -----------------------------------------------------


@dataclass(frozen=True)
class InitialConditions:
    """Values ``y(x0), y'(x0), ...`` at an exact base point.

    Values may be exact (GaussianRational, PiLinear, int, Fraction) or mpmath
    numbers.
    """

    base_point: GaussianRational
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "base_point", GaussianRational.coerce(self.base_point))
        object.__setattr__(self, "values", tuple(_coerce_value(v) for v in self.values))

    def numeric_values(self, ctx) -> tuple:
        return tuple(to_mp(v, ctx) for v in self.values)

    @property
    def is_real(self) -> bool:
        if not self.base_point.is_real:
            return False
        for v in self.values:
            if isinstance(v, (GaussianRational, PiLinear)):
                if not v.is_real:
                    return False
            elif v.imag != 0:
                return False
        return True


def _coerce_value(v):
    if isinstance(v, (GaussianRational, PiLinear)):
        return v
    if isinstance(v, (int, Fraction)):
        return GaussianRational.coerce(v)
    return v


def base_point_info(report: SingularityReport, x0: GaussianRational) -> SingularPoint | None:
    """The singular point sitting exactly at ``x0``, if any."""
    for p in report.finite_points:
        if p.exact_location is not None and p.exact_location == x0:
            return p
        if p.exact_location is None and p.exact_factor(x0) == 0:
            return p
    return None


def jet_length(op: DifferentialOperator, point: SingularPoint | None) -> int:
    """Number of derivatives that determine a solution at a point."""
    if point is None:
        return op.order
    if point.kind != APPARENT:
        raise InitialConditionError("initial conditions at a branch point")
    return int(max(int(GaussianRational.coerce(e).re) for e in point.exponents)) + 1


def check_initial_conditions(op: DifferentialOperator, ics: InitialConditions,
                             report: SingularityReport) -> None:
    sp = base_point_info(report, ics.base_point)
    if sp is not None and sp.kind != APPARENT:
        raise InitialConditionError(
            f"base point {ics.base_point} is a {sp.kind} singular point"
        )
    need = jet_length(op, sp)
    if len(ics.values) != need:
        raise InitialConditionError(
            f"expected {need} initial values at {ics.base_point}, got {len(ics.values)}"
        )


def complete_initial_conditions(ode: LinearODE, ics: InitialConditions, length: int,
                                dps: int | None = None) -> InitialConditions:
    """Extend ``ics`` to ``length`` derivatives using the equation itself.

    Needs ``x0`` to be an ordinary point of ``ode`` whenever values beyond
    those given must be derived.  Exact values stay exact.
    """
    values = list(ics.values)
    if len(values) >= length:
        if len(values) > length:
            raise InitialConditionError(f"expected {length} initial values, got {len(values)}")
        return ics
    n = ode.order
    if len(values) < n:
        raise InitialConditionError(f"expected at least {n} initial values, got {len(values)}")
    x0 = ics.base_point
    c = [p.taylor_shift(x0) for p in ode.coeffs]
    if not c[n][0]:
        raise InitialConditionError(
            f"cannot derive further initial values: {x0} is singular for the equation"
        )
    exact = all(isinstance(v, GaussianRational) for v in values)
    if exact:
        conv, zero = (lambda v: v), ZERO
    else:
        ctx = numeric_context(dps)
        conv, zero = (lambda v: to_mp(v, ctx)), ctx.mpc(0)
    # Taylor coefficients a_k = y^(k)(x0)/k!
    a = [conv(v) * conv(GaussianRational(Fraction(1, math.factorial(k)))) for k, v in enumerate(values)]
    # d = p/q expanded at x0: q d = p solved term by term
    p = ode.rhs_num.taylor_shift(x0)
    q = ode.rhs_den.taylor_shift(x0)
    if not q[0]:
        raise InitialConditionError(f"the right-hand side has a pole at {x0}")
    d = []
    for m in range(length):
        s = conv(p[m]) - sum((conv(q[m - j]) * d[j] for j in range(max(0, m - q.degree), m)), zero)
        d.append(s / conv(q[0]))
    for m in range(length - n):
        if m + n < len(a):
            continue
        s = d[m]
        for i in range(n + 1):
            for j in range(c[i].degree + 1 if c[i] else 0):
                k = m - j + i
                if j > m or (i == n and j == 0):
                    continue
                s = s - conv(c[i][j]) * conv(GaussianRational(Fraction(
                    math.factorial(k), math.factorial(k - i)))) * a[k]
        a.append(s / (conv(c[n][0]) * conv(GaussianRational(Fraction(math.factorial(m + n), math.factorial(m))))))
    out = list(values) + [a[k] * conv(GaussianRational(Fraction(math.factorial(k)))) for k in range(len(values), length)]
    return InitialConditions(x0, tuple(out))
