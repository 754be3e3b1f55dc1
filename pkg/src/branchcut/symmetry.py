"""Conjugation and rotation symmetries of an operator and of its solution."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .algebra import GaussianRational, numeric_context, to_mp
from .continuation import make_jet, taylor_coeffs
from .odecore import DifferentialOperator, InitialConditions, SingularityReport

INFINITE_ORDER = math.inf
DEFAULT_TERMS = 40


class UnsupportedSymmetryError(ValueError):
    pass


@dataclass(frozen=True)
class SymmetryProfile:
    """``affine`` holds ``(d, lam, mu)`` with ``y(w x) = lam y(x) + mu``, ``w = exp(2 pi i / d)``."""

    conjugation: bool
    rotation_order: float | int
    affine: tuple = ()

    @property
    def cut_rotation_order(self) -> int:
        """Largest rotation order the cuts must respect (1 if none)."""
        return max((d for d, _, _ in self.affine if d > 1), default=1)

    def affine_for(self, d: int):
        for dd, lam, mu in self.affine:
            if dd == d:
                return lam, mu
        return None


def max_rotation_candidate(op: DifferentialOperator) -> int:
    deg = max(c.degree for c in op.coeffs if c)
    return 2 * (deg + op.order) + 4


def _weights(op: DifferentialOperator) -> set:
    # x -> w x multiplies the x^k D^i term by w^(k - i)
    return {k - i for i, c in enumerate(op.coeffs) for k, a in enumerate(c.coeffs) if a}


def detect_rotation_order(op: DifferentialOperator):
    """Largest ``m`` with ``op`` invariant (up to a scalar) under ``x -> exp(2 pi i/m) x``.

    Invariance under ``w`` holds iff every weight ``k - i`` of a monomial
    ``x^k D^i`` is congruent modulo the order of ``w``; an operator whose
    weights all coincide is invariant for every ``m`` (``INFINITE_ORDER``).
    """
    w = sorted(_weights(op))
    g = 0
    for a in w[1:]:
        g = math.gcd(g, a - w[0])
    if g == 0:
        return INFINITE_ORDER
    cap = max_rotation_candidate(op)
    return max(d for d in range(1, min(g, cap) + 1) if g % d == 0)


def rotate_operator(op: DifferentialOperator, omega) -> tuple:
    """Coefficients of ``sum c_i(omega x) omega**-i D^i`` (not normalized).

    ``omega`` must be an exact Gaussian-rational root of unity.
    """
    omega = GaussianRational.coerce(omega)
    return tuple(c.substitute_scale(omega).scale(omega ** (-i)) for i, c in enumerate(op.coeffs))


def is_rotation_invariant(op: DifferentialOperator, omega) -> bool:
    rotated = rotate_operator(op, omega)
    lead = op.leading.leading
    kappa = rotated[-1].leading / lead
    return all(r == c.scale(kappa) for r, c in zip(rotated, op.coeffs))


def detect_conjugation(op: DifferentialOperator, ics: InitialConditions) -> bool:
    return op.is_real and ics.is_real


def _omega(ctx, omega):
    if isinstance(omega, int):
        return ctx.expjpi(ctx.mpf(2) / omega)
    return to_mp(omega, ctx)


def solution_affine_symmetry(op: DifferentialOperator, ics: InitialConditions, omega,
                             N: int = DEFAULT_TERMS, tol: float = 1e-20,
                             radius=None, dps: int | None = None) -> Optional[tuple]:
    """Return ``(lam, mu)`` if ``y(omega x) = lam y(x) + mu`` to order ``N``.

    ``omega`` is a rotation order ``d`` (meaning ``exp(2 pi i/d)``) or a
    complex number.  Only base point 0 is supported for nontrivial rotations.
    """
    ctx = numeric_context(dps)
    w = _omega(ctx, omega)
    if ics.base_point and w != 1:
        raise UnsupportedSymmetryError("rotation symmetry needs the base point 0")
    coeffs = taylor_coeffs(op, make_jet(ics, ctx.dps), N + 1, dps=ctx.dps)
    rho = ctx.mpf(1) if radius is None else ctx.mpf(radius)
    scaled = [abs(a) * rho**k for k, a in enumerate(coeffs)]
    scale = max(scaled[1:], default=0)
    if scale == 0:
        return ctx.mpc(1), ctx.mpc(0)
    lam = None
    for k in range(1, N + 1):
        if scaled[k] > tol * scale:
            lam = w**k
            break
    for k in range(1, N + 1):
        if abs(coeffs[k] * (w**k - lam)) * rho**k > tol * scale:
            return None
    mu = coeffs[0] * (1 - lam)
    return _clean(ctx, lam), _clean(ctx, mu)


def _clean(ctx, z):
    # snap rounding noise so that e.g. lam prints as -1
    tiny = ctx.mpf(10) ** (-(ctx.dps - 5)) * max(1, abs(z))
    re = z.real if abs(z.real) > tiny else ctx.mpf(0)
    im = z.imag if abs(z.imag) > tiny else ctx.mpf(0)
    return ctx.mpc(re, im)


def _set_rotation_orders(points, cap: int) -> list:
    """Orders d > 1 for which the point set is invariant under rotation about 0."""
    pts = [complex(p) for p in points if abs(complex(p)) > 1e-12]
    if not pts:
        return []
    out = []
    for d in range(2, cap + 1):
        w = complex(math.cos(2 * math.pi / d), math.sin(2 * math.pi / d))
        if all(min(abs(w * p - q) for q in pts) < 1e-9 * max(1, abs(p)) for p in pts):
            out.append(d)
    return out


def symmetry_profile(op: DifferentialOperator, ics: InitialConditions,
                     report: SingularityReport, N: int = DEFAULT_TERMS,
                     dps: int | None = None) -> SymmetryProfile:
    ctx = numeric_context(dps)
    m = detect_rotation_order(op)
    conj = detect_conjugation(op, ics)
    affine = []
    if not ics.base_point:
        branch = [p.location for p in report.branch_points]
        cap = max_rotation_candidate(op)
        if m == INFINITE_ORDER:
            orders = _set_rotation_orders(branch, cap)
        else:
            orders = [d for d in range(2, m + 1) if m % d == 0]
        radius = min((abs(s) for s in branch), default=1)
        for d in orders:
            pair = solution_affine_symmetry(op, ics, d, N=N, radius=radius, dps=ctx.dps)
            if pair is not None:
                affine.append((d, pair[0], pair[1]))
    return SymmetryProfile(conj, m, tuple(affine))
