"""Branch cuts for solutions of linear ODEs with polynomial coefficients.

The usual entry point is :func:`branchcut.pipeline.analyze`, which turns a
problem written in the small text format of :mod:`branchcut.dsl` into an
operator, its singular points and symmetries; ``Analysis.cuts()`` then
proposes the cut system and :func:`branchcut.continuation.evaluate`
evaluates the chosen branch anywhere in the cut plane.
"""

__version__ = "0.1.0"

from .algebra import GaussianRational, PiLinear, Poly, find_roots
from .continuation import Jet, Path, continue_along, evaluate, monodromy, step, taylor_coeffs
from .cuts import BranchCut, CutSystem, alternative_chords, check_rules, germ_at, propose_cuts
from .dsl import parse_ode, parse_problem
from .odecore import (
    DifferentialOperator,
    InitialConditions,
    LinearODE,
    homogenize,
    indicial_polynomial,
    is_apparent,
    local_basis,
    singularities,
)
from .pipeline import analyze
from .symmetry import detect_conjugation, detect_rotation_order, solution_affine_symmetry

__all__ = [
    "GaussianRational", "PiLinear", "Poly", "find_roots",
    "Jet", "Path", "continue_along", "evaluate", "monodromy", "step", "taylor_coeffs",
    "BranchCut", "CutSystem", "alternative_chords", "check_rules", "germ_at", "propose_cuts",
    "parse_ode", "parse_problem",
    "DifferentialOperator", "InitialConditions", "LinearODE", "homogenize",
    "indicial_polynomial", "is_apparent", "local_basis", "singularities",
    "analyze",
    "detect_conjugation", "detect_rotation_order", "solution_affine_symmetry",
]
