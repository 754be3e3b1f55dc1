"""Exact Gaussian-rational arithmetic, univariate polynomials and root finding.

Everything symbolic in the package runs over Q(i).  The only numeric step in
the symbolic pipeline is :func:`find_roots`; numbers produced there are
mpmath values tied to a private context so that precision is never changed
globally.
"""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import mpmath
from mpmath import MPContext

DEFAULT_DPS = 40


class NotDivisibleError(ArithmeticError):
    """Raised by exact division when the divisor does not divide."""


class RootFindingError(ArithmeticError):
    """Raised when simultaneous iteration exhausts its budget."""


# -- numeric contexts -------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _context(dps: int) -> MPContext:
    ctx = MPContext()
    ctx.dps = dps
    return ctx


def default_dps() -> int:
    env = os.environ.get("BRANCHCUT_PRECISION")
    if env:
        return max(int(env), 30)
    return DEFAULT_DPS


def numeric_context(dps: int | None = None) -> MPContext:
    """Return a cached mpmath context at ``dps`` digits.

    Contexts are never mutated after creation, so they can be shared between
    threads.
    """
    return _context(int(dps) if dps is not None else default_dps())


# -- Gaussian rationals -----------------------------------------------------


@dataclass(frozen=True, slots=True)
class GaussianRational:
    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction, Rational)):
            return cls(Fraction(value))
        if isinstance(value, str):
            return cls(Fraction(value))
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, float):
            return cls(Fraction(value))
        raise TypeError(f"cannot convert {value!r} to GaussianRational")

    def __add__(self, other):
        other = _maybe_coerce(other)
        if other is NotImplemented:
            return other
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        other = _maybe_coerce(other)
        if other is NotImplemented:
            return other
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _maybe_coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = _maybe_coerce(other)
        if other is NotImplemented:
            return other
        if not self.im and not other.im:
            return GaussianRational(self.re * other.re)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _maybe_coerce(other)
        if other is NotImplemented:
            return other
        if not other:
            raise ZeroDivisionError("division by zero Gaussian rational")
        if not other.im:
            return GaussianRational(self.re / other.re, self.im / other.re)
        norm = other.re * other.re + other.im * other.im
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / norm,
            (self.im * other.re - self.re * other.im) / norm,
        )

    def __rtruediv__(self, other):
        other = _maybe_coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return (ONE / self) ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        other = _maybe_coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    @property
    def is_real(self) -> bool:
        return not self.im

    def to_mp(self, ctx: MPContext):
        return ctx.mpc(
            ctx.mpf(self.re.numerator) / self.re.denominator,
            ctx.mpf(self.im.numerator) / self.im.denominator,
        )

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        return format_gaussian(self)

    def __repr__(self):
        return f"GaussianRational({format_gaussian(self)})"


def _maybe_coerce(value):
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(Fraction(value))
    return NotImplemented


ZERO = GaussianRational(Fraction(0))
ONE = GaussianRational(Fraction(1))
I = GaussianRational(Fraction(0), Fraction(1))


def _format_fraction(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def format_gaussian(g: GaussianRational) -> str:
    """Render ``g`` in the DSL's literal syntax, e.g. ``1/2+3*i``."""
    if not g.im:
        return _format_fraction(g.re)
    im = g.im
    if im == 1:
        im_text = "i"
    elif im == -1:
        im_text = "-i"
    else:
        im_text = f"{_format_fraction(im)}*i"
    if not g.re:
        return im_text
    sign = "" if im_text.startswith("-") else "+"
    return f"{_format_fraction(g.re)}{sign}{im_text}"


def to_mp(value, ctx: MPContext):
    """Convert an exact or numeric scalar to an ``mpc`` of ``ctx``."""
    if isinstance(value, GaussianRational):
        return value.to_mp(ctx)
    if hasattr(value, "to_mp"):
        return value.to_mp(ctx)
    if isinstance(value, Fraction):
        return ctx.mpc(ctx.mpf(value.numerator) / value.denominator)
    return ctx.mpc(value)


# -- exact pi-linear values -------------------------------------------------


@dataclass(frozen=True, slots=True)
class PiLinear:
    """An exact value ``rational + pi_coeff * pi`` with Gaussian-rational parts.

    Initial values such as ``pi/2`` stay exact until they are needed
    numerically.
    """

    rational: GaussianRational = ZERO
    pi_coeff: GaussianRational = ZERO

    def __post_init__(self):
        object.__setattr__(self, "rational", GaussianRational.coerce(self.rational))
        object.__setattr__(self, "pi_coeff", GaussianRational.coerce(self.pi_coeff))

    @property
    def is_real(self) -> bool:
        return self.rational.is_real and self.pi_coeff.is_real

    def to_mp(self, ctx: MPContext):
        return self.rational.to_mp(ctx) + self.pi_coeff.to_mp(ctx) * ctx.pi

    def __str__(self):
        if not self.pi_coeff:
            return format_gaussian(self.rational)
        pi_part = f"({format_gaussian(self.pi_coeff)})*pi"
        if not self.rational:
            return pi_part
        return f"{format_gaussian(self.rational)}+{pi_part}"


# -- polynomials ------------------------------------------------------------


def _strip(coeffs: Iterable) -> tuple:
    out = list(coeffs)
    while out and not out[-1]:
        out.pop()
    return tuple(out)


@dataclass(frozen=True, slots=True)
class Poly:
    """Univariate polynomial, coefficients lowest degree first.

    Coefficients are Gaussian rationals; numeric coefficient tuples are only
    built internally by the continuation code.
    """

    coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(
            self, "coeffs", _strip(GaussianRational.coerce(c) for c in self.coeffs)
        )

    @classmethod
    def from_ints(cls, *coeffs) -> "Poly":
        return cls(tuple(coeffs))

    @classmethod
    def constant(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def monomial(cls, k: int, c=1) -> "Poly":
        return cls((0,) * k + (c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> GaussianRational:
        return self.coeffs[-1] if self.coeffs else ZERO

    def __bool__(self):
        return bool(self.coeffs)

    def __getitem__(self, k: int) -> GaussianRational:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else ZERO

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(tuple(self[k] + other[k] for k in range(n)))

    __radd__ = __add__

    def __neg__(self):
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if not self or not other:
            return Poly()
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = Poly((ONE,))
        for _ in range(k):
            result = result * self
        return result

    def scale(self, c) -> "Poly":
        c = GaussianRational.coerce(c)
        return Poly(tuple(a * c for a in self.coeffs))

    def shift_degree(self, k: int) -> "Poly":
        return Poly((ZERO,) * k + self.coeffs) if self else Poly()

    def __divmod__(self, other):
        other = _as_poly(other)
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.leading
        quot = [ZERO] * max(len(rem) - dq, 0)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k]
            if not c:
                continue
            q = c / lead
            quot[k - dq] = q
            for j, b in enumerate(other.coeffs):
                rem[k - dq + j] = rem[k - dq + j] - q * b
        return Poly(tuple(quot)), Poly(tuple(rem[:dq]))

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other) -> "Poly":
        q, r = divmod(self, other)
        if r:
            raise NotDivisibleError(f"{other} does not divide {self}")
        return q

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        try:
            return self.coeffs == _as_poly(other).coeffs
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def derivative(self) -> "Poly":
        return Poly(tuple(c * k for k, c in enumerate(self.coeffs) if k))

    def monic(self) -> "Poly":
        if not self:
            return self
        return self.scale(ONE / self.leading)

    def __call__(self, x):
        """Horner evaluation; ``x`` may be exact or an mpmath number."""
        if isinstance(x, (GaussianRational, int, Fraction)):
            acc = ZERO
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        ctx = getattr(x, "context", None) or numeric_context()
        acc = ctx.mpc(0)
        for c in reversed(self.numeric(ctx)):
            acc = acc * x + c
        return acc

    def numeric(self, ctx: MPContext) -> tuple:
        return tuple(c.to_mp(ctx) for c in self.coeffs)

    def valuation(self) -> int | None:
        """Multiplicity of 0 as a root (``None`` for the zero polynomial)."""
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def taylor_shift(self, s) -> "Poly":
        """Return q with q(t) = p(s + t), exactly."""
        s = GaussianRational.coerce(s)
        coeffs = list(self.coeffs)
        n = len(coeffs)
        for i in range(n):
            for k in range(n - 2, i - 1, -1):
                coeffs[k] = coeffs[k] + s * coeffs[k + 1]
        return Poly(tuple(coeffs))

    def substitute_scale(self, omega) -> "Poly":
        """Return p(omega * x)."""
        omega = GaussianRational.coerce(omega)
        return Poly(tuple(c * omega**k for k, c in enumerate(self.coeffs)))

    def reciprocal(self) -> "Poly":
        """Numerator of p(1/t) after multiplying by t**deg."""
        return Poly(tuple(reversed(self.coeffs)))

    def conjugate(self) -> "Poly":
        return Poly(tuple(c.conjugate() for c in self.coeffs))

    @property
    def is_real(self) -> bool:
        return all(c.is_real for c in self.coeffs)

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)})"


def _as_poly(value) -> Poly:
    if isinstance(value, Poly):
        return value
    return Poly((GaussianRational.coerce(value),))


X = Poly((ZERO, ONE))


def format_poly(p: Poly, var: str = "x") -> str:
    if not p:
        return "0"
    parts = []
    for k, c in enumerate(p.coeffs):
        if not c:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if not mono:
            text = format_gaussian(c)
            if c.im and c.re:
                text = f"({text})"
        elif c == ONE:
            text = mono
        elif c == -ONE:
            text = f"-{mono}"
        else:
            ctext = format_gaussian(c)
            if c.im and c.re or (c.im and not c.re and "/" in ctext):
                ctext = f"({ctext})"
            text = f"{ctext}*{mono}"
        parts.append(text)
    out = parts[0]
    for part in parts[1:]:
        out += part if part.startswith("-") else f"+{part}"
    return out


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd by the Euclidean algorithm (gcd(0, 0) = 0)."""
    while b:
        a, b = b, a % b
    return a.monic()


def poly_gcd_many(polys: Sequence[Poly]) -> Poly:
    g = Poly()
    for p in polys:
        g = poly_gcd(g, p)
        if g.degree == 0:
            break
    return g


def poly_lcm(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return Poly()
    return (a * b).exact_div(poly_gcd(a, b)).monic()


def squarefree_part(p: Poly) -> Poly:
    if p.degree < 1:
        return p.monic()
    return p.exact_div(poly_gcd(p, p.derivative())).monic()


def squarefree_decomposition(p: Poly) -> list[tuple[Poly, int]]:
    """Yun's algorithm: monic pairwise coprime (f_k, k) with p ~ prod f_k**k."""
    if p.degree < 1:
        return []
    out = []
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p.exact_div(a)
    c = dp.exact_div(a)
    d = c - b.derivative()
    k = 1
    while b.degree > 0:
        a = poly_gcd(b, d)
        b = b.exact_div(a)
        c = d.exact_div(a)
        d = c - b.derivative()
        if a.degree > 0:
            out.append((a.monic(), k))
        k += 1
    return out


def linear_root(p: Poly) -> GaussianRational | None:
    """Exact root of a degree-one polynomial."""
    if p.degree != 1:
        return None
    return -p.coeffs[0] / p.coeffs[1]


def root_sort_key(z, tol: float):
    return (int(mpmath.nint(z.real / tol)), int(mpmath.nint(z.imag / tol)))


def find_roots(p: Poly, tol: float = 1e-12, dps: int | None = None) -> list[tuple[object, int]]:
    """Numeric roots of ``p`` with exact multiplicities.

    Multiplicities come from the exact squarefree decomposition; each distinct
    factor is solved by simultaneous (Durand-Kerner) iteration with a budget of
    200 iterations per unit of degree.
    """
    if not p:
        raise ValueError("find_roots requires a nonzero polynomial")
    ctx = numeric_context(dps)
    found = []
    for factor, mult in squarefree_decomposition(p):
        for r in _factor_roots(factor, ctx, tol):
            found.append((r, mult))
    found.sort(key=lambda rm: root_sort_key(rm[0], tol))
    return found


def _factor_roots(factor: Poly, ctx: MPContext, tol: float) -> list:
    exact = linear_root(factor)
    if exact is not None:
        return [exact.to_mp(ctx)]
    coeffs = list(reversed(factor.numeric(ctx)))
    try:
        roots = ctx.polyroots(
            coeffs, maxsteps=200 * factor.degree, extraprec=2 * ctx.prec, cleanup=True
        )
    except mpmath.libmp.NoConvergence as exc:
        raise RootFindingError(f"no convergence for {factor}: {exc}") from None
    scale = max(abs(c) for c in coeffs)
    for r in roots:
        bound = tol * scale * max(1, abs(r)) ** factor.degree
        if abs(factor(ctx.mpc(r))) >= bound:
            raise RootFindingError(f"root {r} of {factor} fails residual bound")
    return [ctx.mpc(r) for r in roots]
