"""From a parsed problem to an operator, its singularities, symmetries and cuts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .algebra import numeric_context
from .cuts import CutSystem, alternative_chords, propose_cuts, with_adherence
from .dsl import ProblemSpec, parse_problem
from .odecore import (
    DifferentialOperator,
    InitialConditions,
    InitialConditionError,
    SingularityReport,
    base_point_info,
    complete_initial_conditions,
    homogenize,
    jet_length,
    singularities,
)
from .symmetry import SymmetryProfile, detect_rotation_order, symmetry_profile


@dataclass(frozen=True)
class Analysis:
    spec: ProblemSpec
    operator: DifferentialOperator
    report: SingularityReport
    initial: Optional[InitialConditions]
    symmetry: SymmetryProfile
    dps: int

    def require_initial(self) -> InitialConditions:
        if self.initial is None:
            raise InitialConditionError("the problem has no initial values")
        return self.initial

    def cuts(self, adherence: str | None = None) -> CutSystem:
        system = propose_cuts(self.report, self.symmetry, self.require_initial(),
                              adherence or self.spec.options.adherence)
        return system

    def chord_systems(self, adherence: str | None = None) -> list:
        out = alternative_chords(self.operator, self.report, self.symmetry, self.require_initial(),
                                 dps=self.dps)
        return [with_adherence(s, adherence or self.spec.options.adherence) for s in out]


def analyze(spec: ProblemSpec | str, dps: int | None = None) -> Analysis:
    if isinstance(spec, str):
        spec = parse_problem(spec)
    ctx = numeric_context(dps if dps is not None else spec.options.precision)
    op = homogenize(spec.ode)
    report = singularities(op, dps=ctx.dps)
    ics = None
    if spec.initial is not None:
        sp = base_point_info(report, spec.initial.base_point)
        if sp is not None and sp.kind != "apparent":
            raise InitialConditionError(
                f"base point {spec.initial.base_point} is a {sp.kind} singular point"
            )
        ics = complete_initial_conditions(spec.ode, spec.initial, jet_length(op, sp), dps=ctx.dps)
        sym = symmetry_profile(op, ics, report, N=spec.options.terms, dps=ctx.dps)
    else:
        sym = SymmetryProfile(op.is_real, detect_rotation_order(op))
    return Analysis(spec, op, report, ics, sym, ctx.dps)
