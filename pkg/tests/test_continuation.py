import cmath
import math
import random

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from branchcut.continuation import (
    ContinuationError,
    Path,
    PathError,
    RuleViolationError,
    StepError,
    continue_along,
    evaluate,
    make_jet,
    monodromy,
    standard_basis,
    step,
    taylor_coeffs,
)
from branchcut.cuts import chord_loop
from dataclasses import replace

S = 2 ** -0.5
SQUARE = (1, 1j, -1, -1j, 1)


def c(z):
    return complex(z)


def test_taylor_coeffs_arctan(analyses):
    a = analyses("arctan")
    coeffs = taylor_coeffs(a.operator, make_jet(a.initial), 8)
    assert [c(v) for v in coeffs] == pytest.approx([0, 1, 0, -1 / 3, 0, 1 / 5, 0, -1 / 7], abs=1e-30)


def test_taylor_coeffs_refuse_branch_point(analyses):
    a = analyses("ln")
    jet = make_jet(a.initial)
    with pytest.raises(StepError):
        taylor_coeffs(a.operator, replace(jet, point=0), 4)


@pytest.mark.parametrize("name,target,expected", [
    ("ln", 0.5, -math.log(2)),
    ("arctan", 0.5, math.atan(0.5)),
    ("sqrt", 1.5, math.sqrt(1.5)),
])
def test_single_step(analyses, name, target, expected):
    a = analyses(name)
    jet = step(a.operator, make_jet(a.initial), target)
    assert c(jet.values[0]) == pytest.approx(expected, abs=1e-20)
    assert jet.error < 1e-20


def test_step_longer_than_allowed(analyses):
    a = analyses("ln")
    with pytest.raises(StepError):
        step(a.operator, make_jet(a.initial), 1.6)


def test_sqrt_loop_flips_sign(analyses):
    a = analyses("sqrt")
    once = continue_along(a.operator, make_jet(a.initial), SQUARE)
    assert c(once.values[0]) == pytest.approx(-1, abs=1e-12)
    twice = continue_along(a.operator, make_jet(a.initial), SQUARE + SQUARE[1:])
    assert c(twice.values[0]) == pytest.approx(1, abs=1e-12)


def test_ln_loop_adds_two_pi_i(analyses):
    a = analyses("ln")
    jet = continue_along(a.operator, make_jet(a.initial), SQUARE)
    assert c(jet.values[0]) == pytest.approx(2j * math.pi, abs=1e-12)
    back = continue_along(a.operator, make_jet(a.initial), SQUARE[::-1])
    assert c(back.values[0]) == pytest.approx(-2j * math.pi, abs=1e-12)


def test_degenerate_path_rejected():
    with pytest.raises(PathError):
        Path((1, 1))
    with pytest.raises(PathError):
        Path(())


def test_path_must_start_at_jet(analyses):
    a = analyses("ln")
    with pytest.raises(PathError):
        continue_along(a.operator, make_jet(a.initial), (2, 3))


def test_path_too_close_to_branch_point(analyses):
    a = analyses("ln")
    with pytest.raises(PathError):
        continue_along(a.operator, make_jet(a.initial), (1, -1))


def _lower_pair_loop():
    a, b = complex(-S, -S), complex(S, -S)
    return chord_loop(a, b, 0j, [complex(-S, S), complex(S, S)])


def test_harder_lower_pair_monodromy_is_identity(analyses):
    a = analyses("harder")
    basis = standard_basis(a.operator, 0)
    M = monodromy(a.operator, basis, _lower_pair_loop())
    n = len(M)
    for i in range(n):
        for j in range(n):
            assert c(M[i][j]) == pytest.approx(1 if i == j else 0, abs=1e-12)


def test_harder_single_point_monodromy_is_not_identity(analyses):
    a = analyses("harder")
    p = complex(S, -S)
    loop = [0, p - 0.3, p - 0.3j, p + 0.3, p + 0.3j, p - 0.3, 0]
    M = monodromy(a.operator, standard_basis(a.operator, 0), loop)
    dev = max(abs(c(M[i][j]) - (i == j)) for i in range(len(M)) for j in range(len(M)))
    assert dev > 0.1


def test_monodromy_needs_closed_loop(analyses):
    a = analyses("ln")
    with pytest.raises(PathError):
        monodromy(a.operator, standard_basis(a.operator, 1), (1, 2))


def test_sqrt_monodromy_matrix(analyses):
    a = analyses("sqrt")
    basis = standard_basis(a.operator, 1)
    M = monodromy(a.operator, basis, SQUARE)
    # first order: the solution space is c*sqrt(x)
    assert len(M) == 1 and c(M[0][0]) == pytest.approx(-1, abs=1e-12)


def test_subdivision_invariance(analyses):
    a = analyses("arctan")
    system = a.cuts()
    for z in (2, -1.5 + 0.7j, 0.3 - 2j):
        coarse = evaluate(a.operator, a.initial, system, z, rho=0.5)
        fine = evaluate(a.operator, a.initial, system, z, rho=0.25)
        assert abs(c(coarse.value) - c(fine.value)) <= 10 * float(coarse.error + fine.error) + 1e-30


def test_homotopic_paths_agree(analyses):
    a = analyses("arctan")
    jet = make_jet(a.initial)
    direct = continue_along(a.operator, jet, (0, 2))
    upper = continue_along(a.operator, jet, (0, 1 + 1j, 2))
    lower = continue_along(a.operator, jet, (0, 1 - 1j, 2))
    assert c(direct.values[0]) == pytest.approx(c(upper.values[0]), abs=1e-20)
    assert c(direct.values[0]) == pytest.approx(c(lower.values[0]), abs=1e-20)
    diamond = continue_along(a.operator, jet, (0, 1 + 1j, 2, 1 - 1j, 0))
    assert abs(c(diamond.values[0])) < 1e-20


def test_evaluate_examples(analyses):
    a = analyses("arctan")
    system = a.cuts()
    assert c(evaluate(a.operator, a.initial, system, 2).value) == pytest.approx(math.atan(2), abs=1e-20)
    assert c(evaluate(a.operator, a.initial, system, 2j).value) == pytest.approx(
        complex(mpmath.atan(2j)), abs=1e-20)
    v = evaluate(a.operator, a.initial, system, -3j)
    assert v.on_cut
    assert c(v.value) == pytest.approx(-math.pi / 2 - 0.5j * math.log(2), abs=1e-20)


def test_evaluate_on_cut_both_adherences(analyses):
    a = analyses("ln")
    ccw = evaluate(a.operator, a.initial, a.cuts("ccw"), -1)
    cw = evaluate(a.operator, a.initial, a.cuts("cw"), -1)
    assert c(ccw.value) == pytest.approx(1j * math.pi, abs=1e-20)
    assert c(cw.value) == pytest.approx(-1j * math.pi, abs=1e-20)


def test_evaluate_at_branch_point_fails(analyses):
    a = analyses("arctan")
    with pytest.raises(ContinuationError):
        evaluate(a.operator, a.initial, a.cuts(), 1j)


def test_evaluate_refuses_unsafe_system(analyses):
    a = analyses("arctan")
    system = a.cuts()
    bad = replace(system, rule_report=tuple(replace(v, passed=False) if v.rule == "R5'" else v
                                            for v in system.rule_report))
    with pytest.raises(RuleViolationError):
        evaluate(a.operator, a.initial, bad, 2)


def test_five_ln(analyses):
    a = analyses("five_ln")
    v = evaluate(a.operator, a.initial, a.cuts(), 1j)
    assert c(v.value) == pytest.approx(2.5j * math.pi, abs=1e-20)


def _points(n, seed, ok):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if ok(z):
            out.append(z)
    return out


def _away(z, branch, r=0.2):
    return all(abs(z - b) > r for b in branch)


def test_conjugation_equivariance(analyses):
    a = analyses("arctan")
    system = a.cuts()
    pts = _points(50, 1, lambda z: abs(z.real) > 0.05 and _away(z, (1j, -1j)))
    for z in pts:
        u = c(evaluate(a.operator, a.initial, system, z).value)
        w = c(evaluate(a.operator, a.initial, system, z.conjugate()).value)
        assert w == pytest.approx(u.conjugate(), abs=1e-10)
        assert u == pytest.approx(complex(mpmath.atan(z)), abs=1e-10)


def test_rotation_equivariance_arctan(analyses):
    a = analyses("arctan")
    system = a.cuts()
    lam, mu = a.symmetry.affine_for(2)
    pts = _points(50, 2, lambda z: abs(z.real) > 0.05 and _away(z, (1j, -1j)))
    for z in pts:
        u = c(evaluate(a.operator, a.initial, system, z).value)
        w = c(evaluate(a.operator, a.initial, system, -z).value)
        assert w == pytest.approx(complex(lam) * u + complex(mu), abs=1e-10)


def test_rotation_equivariance_harder(analyses):
    a = analyses("harder")
    system = a.cuts()
    lam, mu = a.symmetry.affine_for(4)
    assert complex(lam) == pytest.approx(-1) and abs(complex(mu)) < 1e-20

    def ok(z):
        t = (cmath.phase(z) - math.pi / 4) % (math.pi / 2)
        return min(t, math.pi / 2 - t) > 0.05 and abs(z) > 0.1

    for z in _points(50, 3, ok):
        u = c(evaluate(a.operator, a.initial, system, z).value)
        w = c(evaluate(a.operator, a.initial, system, 1j * z).value)
        assert w == pytest.approx(complex(lam) * u + complex(mu), abs=1e-10)
        assert u == pytest.approx(complex(mpmath.atan(z * z)), abs=1e-10)


@settings(max_examples=15)
@given(st.floats(0.1, 2.5), st.floats(-2.5, 2.5))
def test_ln_matches_principal_log(r, t):
    z = complex(r, t)
    from branchcut.pipeline import analyze
    from conftest import CORPUS
    a = analyze(CORPUS["ln"])
    v = evaluate(a.operator, a.initial, a.cuts(), z)
    assert c(v.value) == pytest.approx(cmath.log(z), abs=1e-15)
