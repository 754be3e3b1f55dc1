"""Text format for problems: an ODE, initial values and options.

Example::

    (1+x^2)*D = 1 ; y(0)=0

``D`` is d/dx and must be the rightmost factor of a term; a term without
``D`` on the left multiplies ``y``.  The right-hand side is a rational
function of ``x``.  Initial values are written ``y(x0)=v, y'(x0)=v, ...``
and may use ``pi``.  An optional third section holds options such as
``precision=50, adherence=cw``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .algebra import ONE, ZERO, GaussianRational, PiLinear, Poly, format_gaussian, format_poly, poly_gcd
from .odecore import InitialConditions, LinearODE, ODEError


class DSLError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


# -- tokens -----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()=;,'\[\]])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            out.append(Token(kind, chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    out.append(Token("end", "", line, col))
    return out


# -- rational functions and operator expressions ----------------------------


@dataclass(frozen=True)
class RatFunc:
    num: Poly
    den: Poly = field(default_factory=lambda: Poly((ONE,)))

    def __post_init__(self):
        if not self.den:
            raise ZeroDivisionError("division by zero")
        num, den = self.num, self.den
        if not num:
            den = Poly((ONE,))
        else:
            g = poly_gcd(num, den)
            num, den = num // g, den // g
        lead = den.leading
        object.__setattr__(self, "num", num.scale(ONE / lead))
        object.__setattr__(self, "den", den.scale(ONE / lead))

    def __add__(self, o):
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __mul__(self, o):
        return RatFunc(self.num * o.num, self.den * o.den)

    def __truediv__(self, o):
        if not o.num:
            raise ZeroDivisionError("division by zero")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __bool__(self):
        return bool(self.num)


# operator expressions: {order: RatFunc}
def _op_add(a: dict, b: dict, sign: int = 1) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out[k] + (v if sign > 0 else -v) if k in out else (v if sign > 0 else -v)
    return {k: v for k, v in out.items() if v}


def _constant(c) -> dict:
    c = GaussianRational.coerce(c)
    return {0: RatFunc(Poly((c,)))} if c else {}


def _plain(e: dict):
    """The rational function of a D-free expression, else None."""
    if not e:
        return RatFunc(Poly())
    if set(e) == {0}:
        return e[0]
    return None


# -- values -----------------------------------------------------------------

# values: PiLinear throughout; products need one side free of pi


def _val_mul(a: PiLinear, b: PiLinear) -> PiLinear:
    if a.pi_coeff and b.pi_coeff:
        raise ValueError("pi^2 is not supported")
    return PiLinear(a.rational * b.rational, a.rational * b.pi_coeff + a.pi_coeff * b.rational)


def _val_div(a: PiLinear, b: PiLinear) -> PiLinear:
    if b.pi_coeff:
        raise ValueError("division by pi is not supported")
    return PiLinear(a.rational / b.rational, a.pi_coeff / b.rational)


def _simplify(v: PiLinear):
    return v.rational if not v.pi_coeff else v


# -- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        return DSLError(msg, tok.line, tok.column)

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "name") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.tok
        if not self.accept(text):
            found = tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return tok

    # generic expression grammar parameterized by an atom handler and algebra
    def expr(self, alg):
        first = True
        result = None
        while True:
            sign = 1
            if self.accept("-"):
                sign = -1
            elif self.accept("+"):
                pass
            elif not first:
                break
            term = self.term(alg)
            if sign < 0:
                term = alg.neg(term)
            result = term if result is None else alg.add(result, term)
            first = False
            if self.tok.text not in ("+", "-"):
                break
        return result

    def term(self, alg):
        tok = self.tok
        value = self.power(alg)
        while True:
            tok = self.tok
            if self.accept("*"):
                value = alg.mul(value, self.power(alg), tok, self)
            elif self.accept("/"):
                value = alg.div(value, self.power(alg), tok, self)
            elif self._implicit():
                value = alg.mul(value, self.power(alg), tok, self)
            else:
                return value

    def _implicit(self) -> bool:
        # "2i", "3x": a name glued to the preceding number
        prev = self.tokens[self.i - 1]
        tok = self.tok
        return (prev.kind == "num" and tok.kind == "name" and tok.line == prev.line
                and tok.column == prev.column + len(prev.text))

    def power(self, alg):
        base = self.atom(alg)
        tok = self.tok
        if self.accept("^"):
            etok = self.tok
            neg = self.accept("-")
            if self.tok.kind != "num" or not self.tok.text.isdigit():
                raise self.error("exponent must be an integer", etok)
            k = int(self.tok.text)
            self.i += 1
            return alg.pow(base, -k if neg else k, tok, self)
        return base

    def atom(self, alg):
        tok = self.tok
        if self.accept("("):
            v = self.expr(alg)
            self.expect(")")
            return v
        if tok.kind == "num":
            self.i += 1
            return alg.number(Fraction(tok.text))
        if tok.kind == "name":
            self.i += 1
            return alg.name(tok, self)
        if tok.kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {tok.text!r}")


class _OpAlgebra:
    """Operator expressions: D-free parts are rational functions of x."""

    def __init__(self, allow_d: bool = True):
        self.allow_d = allow_d

    def number(self, q):
        return _constant(q)

    def name(self, tok, p):
        if tok.text == "x":
            return {0: RatFunc(Poly((ZERO, ONE)))}
        if tok.text == "i":
            return _constant(GaussianRational(0, 1))
        if tok.text == "D":
            if not self.allow_d:
                raise p.error("D is not allowed here", tok)
            return {1: RatFunc(Poly((ONE,)))}
        raise p.error(f"unknown name {tok.text!r}", tok)

    def neg(self, a):
        return {k: -v for k, v in a.items()}

    def add(self, a, b):
        return _op_add(a, b)

    def mul(self, a, b, tok, p):
        fa, fb = _plain(a), _plain(b)
        if fa is not None:
            return {k: fa * v for k, v in b.items() if fa * v}
        if fb is None:
            raise p.error("products of two D-terms are not supported", tok)
        if fb:
            raise p.error("D must be the rightmost factor of a term", tok)
        return {}

    def div(self, a, b, tok, p):
        fb = _plain(b)
        if fb is None:
            raise p.error("cannot divide by an expression containing D", tok)
        try:
            return {k: v / fb for k, v in a.items()}
        except ZeroDivisionError:
            raise p.error("division by zero", tok) from None

    def pow(self, a, k, tok, p):
        fa = _plain(a)
        if fa is None:
            if set(a) == {1} and a[1].num == Poly((ONE,)) and a[1].den == Poly((ONE,)) and k >= 0:
                return {k: RatFunc(Poly((ONE,)))}
            raise p.error("only D itself can be raised to a power", tok)
        if k < 0 and not fa:
            raise p.error("division by zero", tok)
        out = RatFunc(Poly((ONE,)))
        for _ in range(abs(k)):
            out = out * fa
        return _plain_to_op(out if k >= 0 else RatFunc(Poly((ONE,))) / out)


def _plain_to_op(r: RatFunc) -> dict:
    return {0: r} if r else {}


class _ValueAlgebra:
    """Exact scalars, optionally with a linear pi part."""

    allow_pi = True

    def number(self, q):
        return PiLinear(GaussianRational(q))

    def name(self, tok, p):
        if tok.text == "i":
            return PiLinear(GaussianRational(0, 1))
        if tok.text == "pi" and self.allow_pi:
            return PiLinear(ZERO, ONE)
        raise p.error(f"unknown name {tok.text!r}", tok)

    def neg(self, a):
        return PiLinear(-a.rational, -a.pi_coeff)

    def add(self, a, b):
        return PiLinear(a.rational + b.rational, a.pi_coeff + b.pi_coeff)

    def mul(self, a, b, tok, p):
        try:
            return _val_mul(a, b)
        except ValueError as exc:
            raise p.error(str(exc), tok) from None

    def div(self, a, b, tok, p):
        try:
            return _val_div(a, b)
        except (ValueError, ZeroDivisionError) as exc:
            raise p.error(str(exc) or "division by zero", tok) from None

    def pow(self, a, k, tok, p):
        if a.pi_coeff and k != 1:
            raise p.error("powers of pi are not supported", tok)
        if k < 0 and not a.rational:
            raise p.error("division by zero", tok)
        return PiLinear(a.rational ** k) if not a.pi_coeff else a


class _PointAlgebra(_ValueAlgebra):
    allow_pi = False


# -- problems ---------------------------------------------------------------


@dataclass(frozen=True)
class Options:
    precision: Optional[int] = None
    rho: Fraction = Fraction(1, 2)
    eps: Fraction = Fraction(1, 10**25)
    adherence: str = "ccw"
    terms: int = 40

    def __post_init__(self):
        if self.precision is not None and self.precision < 30:
            raise ValueError("precision must be at least 30 digits")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if self.adherence not in ("ccw", "cw"):
            raise ValueError("adherence must be 'ccw' or 'cw'")


_OPTION_KINDS = {"precision": int, "rho": Fraction, "eps": Fraction, "adherence": str, "terms": int}


@dataclass(frozen=True)
class ProblemSpec:
    ode: LinearODE
    initial: Optional[InitialConditions] = None
    options: Options = field(default_factory=Options)


def _parse_ode(p: _Parser) -> LinearODE:
    start = p.tok
    lhs = p.expr(_OpAlgebra())
    eq = p.expect("=")
    rhs = _plain(p.expr(_OpAlgebra(allow_d=False)))
    if not lhs or max(lhs) == 0:
        raise DSLError("order 0 equation: no D term", start.line, start.column)
    den = Poly((ONE,))
    for v in lhs.values():
        den = den * v.den // poly_gcd(den, v.den)
    coeffs = [Poly()] * (max(lhs) + 1)
    for k, v in lhs.items():
        coeffs[k] = v.num * (den // v.den)
    num = rhs.num * den
    try:
        return LinearODE(tuple(coeffs), num, rhs.den)
    except (ODEError, ZeroDivisionError) as exc:
        raise DSLError(str(exc), eq.line, eq.column) from None


def _parse_ics(p: _Parser) -> InitialConditions:
    entries = {}
    base = None
    while True:
        tok = p.expect("y")
        k = 0
        while p.accept("'"):
            k += 1
        if p.accept("^"):
            p.expect("(")
            if p.tok.kind != "num" or not p.tok.text.isdigit():
                raise p.error("derivative order must be an integer")
            k = int(p.tok.text)
            p.i += 1
            p.expect(")")
        p.expect("(")
        ptok = p.tok
        point = p.expr(_PointAlgebra()).rational
        p.expect(")")
        if base is None:
            base = point
        elif point != base:
            raise DSLError("all initial values must share one base point", ptok.line, ptok.column)
        p.expect("=")
        value = _simplify(p.expr(_ValueAlgebra()))
        if k in entries:
            raise DSLError(f"derivative {k} given twice", tok.line, tok.column)
        entries[k] = value
        if not p.accept(","):
            break
    missing = [k for k in range(len(entries)) if k not in entries]
    if missing:
        raise DSLError(f"initial value for derivative {missing[0]} is missing", tok.line, tok.column)
    return InitialConditions(base, tuple(entries[k] for k in range(len(entries))))


def _parse_options(p: _Parser) -> Options:
    values = {}
    while p.tok.kind == "name":
        tok = p.tok
        key = tok.text
        if key not in _OPTION_KINDS:
            raise p.error(f"unknown option {key!r}")
        p.i += 1
        p.expect("=")
        if _OPTION_KINDS[key] is str:
            vt = p.tok
            if vt.kind != "name":
                raise p.error(f"option {key} needs a word")
            p.i += 1
            values[key] = vt.text
        else:
            v = p.expr(_PointAlgebra()).rational
            if v.im:
                raise DSLError(f"option {key} must be real", tok.line, tok.column)
            values[key] = int(v.re) if _OPTION_KINDS[key] is int else v.re
            if _OPTION_KINDS[key] is int and v.re.denominator != 1:
                raise DSLError(f"option {key} must be an integer", tok.line, tok.column)
        if not p.accept(","):
            break
    try:
        return Options(**values)
    except ValueError as exc:
        raise p.error(str(exc)) from None


def parse_problem(text: str) -> ProblemSpec:
    """Parse ``ode [; initial values [; options]]``."""
    p = _Parser(text)
    ode = _parse_ode(p)
    ics = None
    options = Options()
    if p.accept(";"):
        if p.tok.text == "y":
            ics = _parse_ics(p)
        if p.accept(";"):
            options = _parse_options(p)
    if p.tok.kind != "end":
        raise p.error(f"unexpected {p.tok.text!r}")
    return ProblemSpec(ode, ics, options)


def parse_ode(text: str) -> LinearODE:
    return parse_problem(text).ode


def parse_point(text: str) -> GaussianRational:
    """A complex literal such as ``1/2``, ``-i``, ``0.3+1.5i``."""
    p = _Parser(text)
    v = p.expr(_PointAlgebra()).rational
    if p.tok.kind != "end":
        raise p.error(f"unexpected {p.tok.text!r}")
    return v


def parse_path(text: str) -> list:
    """A bracketed list of complex literals ``[v1, v2, ...]``."""
    p = _Parser(text)
    p.expect("[")
    out = [p.expr(_PointAlgebra()).rational]
    while p.accept(","):
        out.append(p.expr(_PointAlgebra()).rational)
    p.expect("]")
    if p.tok.kind != "end":
        raise p.error(f"unexpected {p.tok.text!r}")
    return out


# -- formatting -------------------------------------------------------------


def _fmt_poly(c: Poly) -> str:
    return format_poly(c)


def format_ode(ode: LinearODE) -> str:
    terms = []
    for k in range(ode.order, -1, -1):
        c = ode.coeffs[k]
        if not c:
            continue
        d = "" if k == 0 else ("D" if k == 1 else f"D^{k}")
        text = f"({_fmt_poly(c)})"
        terms.append(f"{text}*{d}" if d else text)
    rhs = f"({_fmt_poly(ode.rhs_num)})"
    if ode.rhs_den != Poly((ONE,)):
        rhs += f"/({_fmt_poly(ode.rhs_den)})"
    return " + ".join(terms) + " = " + rhs


def format_value(v) -> str:
    if isinstance(v, PiLinear):
        return str(v)
    if isinstance(v, GaussianRational):
        return format_gaussian(v)
    raise TypeError(f"cannot format numeric value {v!r} exactly")


def format_ics(ics: InitialConditions) -> str:
    x0 = format_gaussian(ics.base_point)
    return ", ".join(f"y{chr(39) * k}({x0})={format_value(v)}" for k, v in enumerate(ics.values))


def format_options(opts: Options) -> str:
    default = Options()
    parts = []
    for key in _OPTION_KINDS:
        v = getattr(opts, key)
        if v != getattr(default, key):
            parts.append(f"{key}={v}")
    return ", ".join(parts)


def format_problem(spec: ProblemSpec) -> str:
    out = format_ode(spec.ode)
    opts = format_options(spec.options)
    if spec.initial is not None or opts:
        out += " ; " + (format_ics(spec.initial) if spec.initial is not None else "")
    if opts:
        out += " ; " + opts
    return out
