from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, strategies as st

from branchcut.algebra import (
    I,
    ONE,
    ZERO,
    GaussianRational,
    NotDivisibleError,
    PiLinear,
    Poly,
    default_dps,
    find_roots,
    format_poly,
    numeric_context,
    poly_gcd,
    squarefree_decomposition,
    squarefree_part,
)

x = sympy.Symbol("x")


def P(*c):
    return Poly.from_ints(*c)


def to_sympy(p: Poly):
    terms = [(sympy.Rational(c.re.numerator, c.re.denominator)
              + sympy.I * sympy.Rational(c.im.numerator, c.im.denominator)) * x**k
             for k, c in enumerate(p.coeffs)]
    return sum(terms, sympy.Integer(0))


def from_sympy(e) -> Poly:
    coeffs = sympy.Poly(sympy.expand(e), x).all_coeffs()[::-1] if e != 0 else []
    out = []
    for c in coeffs:
        re, im = sympy.re(c), sympy.im(c)
        out.append(GaussianRational(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q))))
    return Poly(tuple(out))


small = st.integers(-9, 9)
polys = st.lists(small, min_size=0, max_size=9).map(lambda c: Poly.from_ints(*c))
nonzero_polys = polys.filter(bool)


# -- GaussianRational ---------------------------------------------------------


def test_gaussian_lowest_terms_and_equality():
    g = GaussianRational(Fraction(2, 4), Fraction(-3, 6))
    assert g.re == Fraction(1, 2) and g.im == Fraction(-1, 2)
    assert g == GaussianRational(Fraction(1, 2), Fraction(-1, 2))
    assert I * I == -ONE
    assert (ONE + I) / (ONE - I) == I
    assert GaussianRational.coerce(3) == GaussianRational(Fraction(3))


def test_gaussian_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


def test_pi_linear_numeric():
    ctx = numeric_context(50)
    v = PiLinear(GaussianRational(1), GaussianRational(Fraction(1, 2)))
    assert abs(v.to_mp(ctx) - (1 + ctx.pi / 2)) < ctx.mpf(10) ** -48
    assert v.is_real
    assert not PiLinear(ZERO, I).is_real


def test_default_precision_env(monkeypatch):
    monkeypatch.setenv("BRANCHCUT_PRECISION", "55")
    assert default_dps() == 55
    # below the floor of 30 digits the floor wins
    monkeypatch.setenv("BRANCHCUT_PRECISION", "12")
    assert default_dps() == 30
    monkeypatch.delenv("BRANCHCUT_PRECISION")
    assert default_dps() == 40


# -- examples -----------------------------------------------------------------


def test_squarefree_examples():
    assert squarefree_part(P(-1, 0, 1)) == P(-1, 0, 1)
    assert squarefree_part(P(1, 2, 1)) == P(1, 1)


def test_gcd_example():
    assert poly_gcd(P(1, 0, 1), P(0, 1, 0, 1)) == P(1, 0, 1)


def test_substitution_examples():
    assert P(1, 0, 1).substitute_scale(I) == P(1, 0, -1)
    assert P(1, 0, 1).reciprocal() == P(1, 0, 1)
    assert P(-2, 0, 0, 1).reciprocal() == P(1, 0, 0, -2)


def test_exact_division():
    assert P(-1, 0, 1).exact_div(P(1, 1)) == P(-1, 1)
    with pytest.raises(NotDivisibleError):
        P(1, 0, 1).exact_div(P(1, 1))


def test_find_roots_examples():
    roots = find_roots(P(1, 0, 1))
    assert [m for _, m in roots] == [1, 1]
    assert sorted(complex(r).imag for r, _ in roots) == pytest.approx([-1, 1], abs=1e-12)

    roots = find_roots(P(0, 1, 0, 0, 0, 1))
    s = 2 ** -0.5
    expected = sorted([0j, complex(s, s), complex(s, -s), complex(-s, s), complex(-s, -s)],
                      key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    assert [complex(r) for r, _ in roots] == pytest.approx(expected, abs=1e-12)

    assert [(complex(r), m) for r, m in find_roots(P(1, 2, 1))] == [(-1 + 0j, 2)]


def test_find_roots_zero_poly():
    with pytest.raises(ValueError):
        find_roots(Poly())


def test_format_poly():
    assert format_poly(P(-1, 0, 3)) == "-1+3*x^2"
    assert format_poly(Poly((ZERO, I))) == "i*x"


# -- properties against sympy ------------------------------------------------------


@given(polys, polys)
def test_arith_matches_sympy(a, b):
    assert a + b == from_sympy(to_sympy(a) + to_sympy(b))
    assert a - b == from_sympy(to_sympy(a) - to_sympy(b))
    assert a * b == from_sympy(to_sympy(a) * to_sympy(b))
    assert a.derivative() == from_sympy(sympy.diff(to_sympy(a), x))


@given(polys, nonzero_polys)
def test_divmod_matches_sympy(a, b):
    q, r = divmod(a, b)
    sq, sr = sympy.div(to_sympy(a), to_sympy(b), x)
    assert q == from_sympy(sq) and r == from_sympy(sr)


def _schoolbook_mul(a, b):
    out = [ZERO] * (len(a.coeffs) + len(b.coeffs))
    for i, u in enumerate(a.coeffs):
        for j, v in enumerate(b.coeffs):
            out[i + j] = out[i + j] + u * v
    return Poly(tuple(out))


@given(polys, polys)
def test_mul_matches_schoolbook(a, b):
    assert a * b == _schoolbook_mul(a, b)


@given(nonzero_polys, nonzero_polys)
def test_gcd_matches_sympy(a, b):
    g = poly_gcd(a, b)
    expected = from_sympy(sympy.gcd(to_sympy(a), to_sympy(b)))
    assert g == expected.monic()


@given(nonzero_polys.filter(lambda p: p.degree > 0), st.integers(1, 3))
def test_squarefree_decomposition(p, k):
    q = p ** k
    parts = squarefree_decomposition(q)
    prod = Poly((ONE,))
    for f, m in parts:
        prod = prod * f ** m
        assert poly_gcd(f, f.derivative()).degree == 0
    assert prod == q.monic()
    sp = squarefree_part(q)
    assert from_sympy(sympy.sqf_part(to_sympy(q))).monic() == sp


@given(nonzero_polys)
def test_root_residuals_and_count(p):
    if p.degree == 0:
        return
    tol = 1e-12
    roots = find_roots(p, tol=tol)
    assert sum(m for _, m in roots) == p.degree
    big = max(abs(complex(c)) for c in p.coeffs)
    for r, _ in roots:
        assert abs(p(r)) < tol * big * max(1, abs(r)) ** p.degree
    # deterministic order
    assert [complex(r) for r, _ in find_roots(p, tol=tol)] == [complex(r) for r, _ in roots]


@given(polys, st.sampled_from([I, -I, -ONE]))
def test_scale_substitution_matches_sympy(p, w):
    wz = complex(w)
    ws = sympy.nsimplify(wz.real) + sympy.I * sympy.nsimplify(wz.imag)
    expected = from_sympy(sympy.expand(to_sympy(p).subs(x, ws * x)))
    assert p.substitute_scale(w) == expected


@given(polys, st.integers(-3, 3), st.integers(-3, 3))
def test_taylor_shift(p, a, b):
    s = GaussianRational(Fraction(a), Fraction(b))
    shifted = p.taylor_shift(s)
    expected = from_sympy(sympy.expand(to_sympy(p).subs(x, x + a + b * sympy.I)))
    assert shifted == expected


def test_root_sort_precision_is_independent_of_mpmath_global():
    before = mpmath.mp.dps
    find_roots(P(1, 0, 0, 1), dps=60)
    assert mpmath.mp.dps == before
