"""Command-line front end: ``branchcut analyze|cuts|eval|continue|monodromy|plot``.

Exit status: 0 success, 2 bad input, 3 irregular singularity, 4 cut rule
failure, 5 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .algebra import GaussianRational, RootFindingError, format_gaussian, numeric_context, to_mp
from .continuation import (
    ContinuationError,
    Path,
    continue_along,
    evaluate,
    make_jet,
    monodromy,
    standard_basis,
)
from .cuts import CutSystem, germs_at
from .dsl import DSLError, parse_path, parse_point, parse_problem
from .odecore import IRREGULAR, IrregularSingularityError, ODEError
from .pipeline import Analysis, analyze
from .svg import render

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_IRREGULAR = 3
EXIT_RULES = 4
EXIT_NUMERIC = 5


class RuleFailure(Exception):
    pass


# -- number encoding --------------------------------------------------------


def _mp(ctx, z):
    return to_mp(z, ctx) if isinstance(z, GaussianRational) else ctx.mpc(z)


def json_complex(ctx, z) -> dict:
    z = _mp(ctx, z)
    return {"re": ctx.nstr(z.real, ctx.dps), "im": ctx.nstr(z.imag, ctx.dps)}


def json_real(ctx, x):
    if x is None:
        return None
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return ctx.nstr(ctx.mpf(x), ctx.dps)


def format_complex(ctx, z, error=None, digits: int = 20) -> str:
    """Human form ``a+bi``; parts at the noise level of ``error`` are dropped."""
    z = _mp(ctx, z)
    floor = ctx.mpf(error) * 10 if error else ctx.mpf(10) ** (-(ctx.dps - 5)) * max(1, abs(z))
    re = z.real if abs(z.real) > floor else 0
    im = z.imag if abs(z.imag) > floor else 0
    if not im:
        return ctx.nstr(re, digits)
    ims = ctx.nstr(abs(im), digits) + "i"
    if im == 1 or im == -1:
        ims = "i"
    if not re:
        return ("-" if im < 0 else "") + ims
    return ctx.nstr(re, digits) + ("-" if im < 0 else "+") + ims


def _exps(ctx, exps) -> list:
    return [format_gaussian(e) if isinstance(e, GaussianRational) else format_complex(ctx, e) for e in exps]


# -- documents --------------------------------------------------------------


def analysis_doc(a: Analysis) -> dict:
    ctx = numeric_context(a.dps)
    pts = [{
        "location": json_complex(ctx, p.location),
        "exact": format_gaussian(p.exact_location) if p.exact_location is not None else None,
        "factor": str(p.exact_factor),
        "class": p.kind,
        "exponents": _exps(ctx, p.exponents),
        "logs": p.has_logs,
    } for p in a.report.finite_points]
    sym = a.symmetry
    rot = sym.rotation_order
    return {
        "operator": str(a.operator),
        "order": a.operator.order,
        "singularities": pts,
        "infinity": {"class": a.report.infinity_class,
                     "exponents": _exps(ctx, a.report.infinity_exponents)},
        "symmetry": {
            "conjugation": sym.conjugation,
            "rotation_order": "inf" if rot == math.inf else int(rot),
            "affine": [{"order": d, "lambda": json_complex(ctx, lam), "mu": json_complex(ctx, mu)}
                       for d, lam, mu in sym.affine],
        },
        "base_point": format_gaussian(a.initial.base_point) if a.initial else None,
        "initial_values": [json_complex(ctx, v) for v in a.initial.numeric_values(ctx)] if a.initial else [],
    }


def system_doc(a: Analysis, system: CutSystem) -> dict:
    ctx = numeric_context(a.dps)
    cuts = []
    for c, adh in zip(system.cuts, system.adherence):
        cuts.append({
            "kind": c.kind,
            "origin": json_complex(ctx, c.origin),
            "direction": json_complex(ctx, c.direction),
            "angle": repr(c.angle),
            "endpoint": json_complex(ctx, c.endpoint) if c.endpoint is not None else None,
            "adherence": adh,
            "flags": list(c.flags),
        })
    germs = []
    idx = sorted({c.origin_index for c in system.cuts}
                 | {c.endpoint_index for c in system.cuts if c.endpoint_index is not None})
    for k in idx:
        for g in germs_at(system, a.report, k):
            germs.append({
                "singularity": json_complex(ctx, g.singularity.location),
                "angle": repr(g.approach_angle),
                "adherence": g.adherence,
                "exponents": _exps(ctx, g.exponents),
                "logs": g.has_logs,
            })
    return {
        "label": system.label,
        "base_point": json_complex(ctx, system.base_point),
        "rho0": json_real(ctx, system.rho0),
        "cuts": cuts,
        "rules": [{"rule": v.rule, "passed": v.passed, "diagnostic": v.diagnostic} for v in system.rule_report],
        "single_valued": system.single_valued,
        "monodromy_deviation": json_real(ctx, system.monodromy_deviation),
        "germs": germs,
    }


# -- commands ---------------------------------------------------------------


def _load(args) -> Analysis:
    text = args.ode
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    spec = parse_problem(text)
    return analyze(spec, dps=args.precision)


def _refuse_irregular(a: Analysis):
    bad = [p for p in a.report.finite_points if p.kind == IRREGULAR]
    if bad:
        where = ", ".join(format_complex(numeric_context(a.dps), p.location) for p in bad)
        raise IrregularSingularityError(f"irregular singular point(s) at {where}")


def _select_system(a: Analysis, args) -> CutSystem:
    _refuse_irregular(a)
    system = a.cuts(args.adherence)
    if args.system:
        alts = a.chord_systems(args.adherence)
        if args.system > len(alts):
            raise RuleFailure(f"only {len(alts)} chord system(s) available")
        return alts[args.system - 1]
    if not system.single_valued and args.allow_chords:
        alts = a.chord_systems(args.adherence)
        if alts:
            return alts[0]
    if not system.single_valued:
        raise RuleFailure("cut system fails " + ", ".join(system.failed_rules))
    return system


def cmd_analyze(a: Analysis, args, out) -> int:
    doc = analysis_doc(a)
    if args.json:
        json.dump(doc, out, indent=2)
        out.write("\n")
        return EXIT_OK
    ctx = numeric_context(a.dps)
    out.write(f"operator: {doc['operator']}\n")
    for p in a.report.finite_points:
        where = format_gaussian(p.exact_location) if p.exact_location is not None else format_complex(ctx, p.location)
        exps = ", ".join(_exps(ctx, p.exponents))
        logs = " with logs" if p.has_logs else ""
        out.write(f"singular point {where}: {p.kind}, exponents [{exps}]{logs}\n")
    out.write(f"infinity: {a.report.infinity_class}\n")
    sym = doc["symmetry"]
    out.write(f"conjugation symmetry: {'yes' if sym['conjugation'] else 'no'}\n")
    out.write(f"rotation order: {sym['rotation_order']}\n")
    for d, lam, mu in a.symmetry.affine:
        out.write(f"y(w x) = ({format_complex(ctx, lam)}) y(x) + ({format_complex(ctx, mu)}), w = exp(2 pi i/{d})\n")
    return EXIT_OK


def cmd_cuts(a: Analysis, args, out) -> int:
    _refuse_irregular(a)
    system = a.cuts(args.adherence)
    alts = a.chord_systems(args.adherence) if args.allow_chords else []
    if args.json:
        doc = {"system": system_doc(a, system), "alternatives": [system_doc(a, s) for s in alts]}
        json.dump(doc, out, indent=2)
        out.write("\n")
    else:
        _write_system(a, system, out)
        for k, s in enumerate(alts, 1):
            out.write(f"alternative {k}:\n")
            _write_system(a, s, out)
    if system.failed_rules:
        sys.stderr.write("rule failure: " + ", ".join(system.failed_rules) + "\n")
        return EXIT_RULES
    return EXIT_OK


def _write_system(a: Analysis, system: CutSystem, out):
    ctx = numeric_context(a.dps)
    for c, adh in zip(system.cuts, system.adherence):
        o = format_complex(ctx, c.origin, digits=12)
        if c.endpoint is None:
            out.write(f"ray from {o} at angle {c.angle:.12g} ({adh})\n")
        else:
            out.write(f"chord from {o} to {format_complex(ctx, c.endpoint, digits=12)} ({adh})\n")
    for v in system.rule_report:
        out.write(f"{v.rule} {'pass' if v.passed else 'FAIL'}: {v.diagnostic}\n")
    if system.monodromy_deviation is not None:
        out.write(f"monodromy deviation: {system.monodromy_deviation:.3g}\n")


def cmd_eval(a: Analysis, args, out) -> int:
    if args.at is None:
        raise DSLError("eval needs --at")
    ics = a.require_initial()
    z = parse_point(args.at)
    system = _select_system(a, args)
    res = evaluate(a.operator, ics, system, z, rho=float(a.spec.options.rho),
                   eps=float(a.spec.options.eps), dps=a.dps)
    ctx = numeric_context(a.dps)
    if args.json:
        doc = {"point": json_complex(ctx, z), "value": json_complex(ctx, res.value),
               "error": json_real(ctx, res.error), "on_cut": res.on_cut,
               "path": [json_complex(ctx, v) for v in res.path], "cut_system": system.label}
        json.dump(doc, out, indent=2)
        out.write("\n")
    else:
        out.write(f"{format_complex(ctx, res.value, res.error)}\n")
        out.write(f"error estimate: {ctx.nstr(res.error, 3)}\n")
    return EXIT_OK


def _path(a: Analysis, text: str, closed: bool) -> list:
    """Path literal anchored at the base point.

    A leading vertex at a branch point is dropped and the base point is
    prepended when the path does not start there.
    """
    if text is None:
        raise DSLError("this command needs --path")
    ics = a.require_initial()
    verts = parse_path(text)
    x0 = ics.base_point
    branch = [p for p in a.report.branch_points]

    def singular(v):
        return any(abs(complex(v) - complex(p.location)) < 1e-12 for p in branch)

    if verts and singular(verts[0]):
        verts = verts[1:]
    if not verts or verts[0] != x0:
        verts = [x0] + verts
    if closed and verts[-1] != x0:
        raise DSLError("monodromy path must return to the base point")
    return verts


def cmd_continue(a: Analysis, args, out) -> int:
    ctx = numeric_context(a.dps)
    verts = _path(a, args.path, closed=False)
    jet = make_jet(a.require_initial(), a.dps)
    path = Path(tuple(to_mp(v, ctx) for v in verts))
    res = continue_along(a.operator, jet, path, rho=float(a.spec.options.rho),
                         eps=float(a.spec.options.eps), dps=a.dps)
    if args.json:
        doc = {"path": [json_complex(ctx, v) for v in path.vertices], "point": json_complex(ctx, res.point),
               "values": [json_complex(ctx, v) for v in res.values], "error": json_real(ctx, res.error)}
        json.dump(doc, out, indent=2)
        out.write("\n")
    else:
        for k, v in enumerate(res.values):
            out.write(f"y{chr(39) * k} = {format_complex(ctx, v, res.error)}\n")
        out.write(f"error estimate: {ctx.nstr(res.error, 3)}\n")
    return EXIT_OK


def cmd_monodromy(a: Analysis, args, out) -> int:
    ctx = numeric_context(a.dps)
    verts = _path(a, args.path, closed=True)
    ics = a.require_initial()
    path = Path(tuple(to_mp(v, ctx) for v in verts))
    kw = {"rho": float(a.spec.options.rho), "eps": float(a.spec.options.eps)}
    basis = standard_basis(a.operator, ics.base_point, dps=a.dps)
    M = monodromy(a.operator, basis, path, dps=a.dps, **kw)
    jet = make_jet(ics, a.dps)
    after = continue_along(a.operator, jet, path, dps=a.dps, **kw)
    if args.json:
        doc = {"path": [json_complex(ctx, v) for v in path.vertices],
               "matrix": [[json_complex(ctx, x) for x in row] for row in M],
               "values_before": [json_complex(ctx, v) for v in jet.values],
               "values_after": [json_complex(ctx, v) for v in after.values],
               "error": json_real(ctx, after.error)}
        json.dump(doc, out, indent=2)
        out.write("\n")
    else:
        err = after.error
        if len(M) == 1:
            out.write(f"{format_complex(ctx, M[0][0], err)}\n")
        else:
            for row in M:
                out.write("[" + ", ".join(format_complex(ctx, x, err) for x in row) + "]\n")
        out.write("solution after loop: " + format_complex(ctx, after.values[0], err) + "\n")
    return EXIT_OK


def cmd_plot(a: Analysis, args, out) -> int:
    system = None
    base = None
    if a.initial is not None:
        _refuse_irregular(a)
        system = a.cuts(args.adherence)
        if args.system:
            alts = a.chord_systems(args.adherence)
            if args.system > len(alts):
                raise RuleFailure(f"only {len(alts)} chord system(s) available")
            system = alts[args.system - 1]
        base = complex(a.initial.base_point)
    doc = render(a.report, system, base, title=str(a.operator))
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(doc)
    else:
        out.write(doc + "\n")
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "cuts": cmd_cuts,
    "eval": cmd_eval,
    "continue": cmd_continue,
    "monodromy": cmd_monodromy,
    "plot": cmd_plot,
}


def _precision(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("precision must be an integer") from None
    if v < 30:
        raise argparse.ArgumentTypeError("precision must be at least 30 digits")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="branchcut", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ode", required=True, help="problem text, or a file containing it")
    common.add_argument("--precision", type=_precision, default=None,
                        help="working precision in digits (default: $BRANCHCUT_PRECISION or 40)")
    common.add_argument("--json", action="store_true", help="emit JSON")
    common.add_argument("--adherence", choices=("ccw", "cw"), default=None)
    common.add_argument("--allow-chords", action="store_true",
                        help="offer chord systems with trivial monodromy")
    common.add_argument("--system", type=int, default=0,
                        help="use the K-th chord alternative instead of the radial cuts")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="singularities and symmetries")
    sub.add_parser("cuts", parents=[common], help="propose and check branch cuts")
    p = sub.add_parser("eval", parents=[common], help="evaluate in the cut plane")
    p.add_argument("--at", required=True, help="complex point, e.g. 1/2+3i")
    p = sub.add_parser("continue", parents=[common], help="continue along a path")
    p.add_argument("--path", required=True, help="vertex list, e.g. [1, i, -1]")
    p = sub.add_parser("monodromy", parents=[common], help="monodromy around a closed path")
    p.add_argument("--path", required=True)
    p = sub.add_parser("plot", parents=[common], help="SVG picture of the cuts")
    p.add_argument("--svg", default=None, help="output file (default: stdout)")
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        a = _load(args)
        return COMMANDS[args.command](a, args, out)
    except IrregularSingularityError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IRREGULAR
    except RuleFailure as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RULES
    except (DSLError, ODEError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (ContinuationError, RootFindingError, ArithmeticError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERIC


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
