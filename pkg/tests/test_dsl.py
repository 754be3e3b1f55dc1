from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from branchcut.algebra import I, ONE, ZERO, GaussianRational, PiLinear, Poly
from branchcut.dsl import (
    DSLError,
    format_problem,
    parse_ode,
    parse_path,
    parse_point,
    parse_problem,
)

from conftest import CORPUS


def P(*c):
    return Poly.from_ints(*c)


def G(re, im=0):
    return GaussianRational(Fraction(re), Fraction(im))


def test_parse_arctan():
    spec = parse_problem(CORPUS["arctan"])
    assert spec.ode.coeffs == (Poly(), P(1, 0, 1))
    assert spec.ode.rhs_num == P(1) and spec.ode.rhs_den == P(1)
    assert spec.initial.base_point == ZERO
    assert spec.initial.values == (ZERO,)


def test_parse_sqrt():
    spec = parse_problem(CORPUS["sqrt"])
    assert spec.ode.coeffs == (Poly((G(Fraction(-1, 2)),)), P(0, 1))
    assert spec.ode.rhs_num == Poly()
    assert spec.initial.base_point == ONE and spec.initial.values == (ONE,)


def test_parse_harder():
    spec = parse_problem(CORPUS["harder"])
    assert spec.ode.coeffs == (Poly(), P(-1, 0, 0, 0, 3), P(0, 1, 0, 0, 0, 1))
    assert spec.initial.values == (ZERO, ZERO, G(2))


def test_rational_right_hand_side():
    ode = parse_ode(CORPUS["harder_inhom"])
    assert ode.rhs_num == P(0, 2) and ode.rhs_den == P(1, 0, 0, 0, 1)


def test_pi_initial_value():
    spec = parse_problem(CORPUS["arccot1"])
    (v,) = spec.initial.values
    assert isinstance(v, PiLinear)
    assert v.rational == ZERO and v.pi_coeff == G(Fraction(1, 2))


def test_decimals_are_exact():
    spec = parse_problem("D = 1 ; y(0.25i)=0.1")
    assert spec.initial.base_point == G(0, Fraction(1, 4))
    assert spec.initial.values == (G(Fraction(1, 10)),)


def test_options():
    spec = parse_problem("x*D = 1 ; y(1)=0 ; rho=1/4, adherence=cw, precision=50, terms=60")
    o = spec.options
    assert (o.rho, o.adherence, o.precision, o.terms) == (Fraction(1, 4), "cw", 50, 60)


def test_points_and_paths():
    assert parse_point("1+2i") == G(1, 2)
    assert parse_point("-i") == -I
    assert parse_point("0.3+1.5i") == G(Fraction(3, 10), Fraction(3, 2))
    assert parse_point("1/2") == G(Fraction(1, 2))
    assert parse_path("[1, i, -1, -i, 1]") == [ONE, I, -ONE, -I, ONE]


@pytest.mark.parametrize("text,line,column", [
    ("D*x = 1", 1, 2),
    ("(1+x^2)*D = 1 ; y(0)=", 1, 22),
    ("x^2*D^ = 1", 1, 8),
    ("D = 1 ;\n y(0) = sqrt(2)", 2, 9),
    ("x = 1", 1, 1),
    ("D = 1 ; y(0)=1, y(1)=2", 1, 19),
    ("D = 1 ; y(0)=1, y(0)=2", 1, 17),
    ("D = 1 $", 1, 7),
])
def test_errors_carry_position(text, line, column):
    with pytest.raises(DSLError) as info:
        parse_problem(text)
    assert (info.value.line, info.value.column) == (line, column)
    assert f"line {line}, column {column}" in str(info.value)


def test_vanishing_leading_coefficient():
    # explicit zero terms drop out during normalization
    assert parse_ode("0*D^2 + D = 1").order == 1
    with pytest.raises(DSLError):
        parse_problem("x*D - x*D = 1 ; y(0)=0")


def test_too_few_initial_values_found_by_analysis():
    from branchcut.odecore import InitialConditionError
    from branchcut.pipeline import analyze
    with pytest.raises(InitialConditionError):
        analyze("D^2 = 1 ; y(0)=1")


def test_bad_path_literal():
    with pytest.raises(DSLError):
        parse_path("1, 2")
    with pytest.raises(DSLError):
        parse_point("x")


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_round_trip_corpus(name):
    spec = parse_problem(CORPUS[name])
    assert parse_problem(format_problem(spec)) == spec


coef = st.integers(-5, 5)
poly_text = st.lists(coef, min_size=1, max_size=4).map(
    lambda cs: "(" + "+".join(f"({c})*x^{k}" for k, c in enumerate(cs)) + ")"
)


@given(st.lists(poly_text, min_size=1, max_size=3), poly_text, st.integers(-3, 3),
       st.fractions(max_denominator=7).filter(lambda f: abs(f) < 10), st.sampled_from(["", "+pi/3", "-2*pi"]))
def test_round_trip_random(coeffs, rhs, x0, v, pitail):
    n = len(coeffs)
    terms = " + ".join(f"{c}*D^{k + 1}" for k, c in enumerate(coeffs))
    lead = f"(1+x^2)*D^{n + 1}"
    ics = ", ".join(f"y{chr(39) * k}({x0})=({v}){pitail}" for k in range(n + 1))
    text = f"{lead} + {terms} + {coeffs[0]} = {rhs} ; {ics}"
    spec = parse_problem(text)
    assert parse_problem(format_problem(spec)) == spec
