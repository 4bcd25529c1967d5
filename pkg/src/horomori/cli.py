"""Command line interface.

One command per invocation; all numeric output is exact (integers or
p/q).  Exit codes: 0 success, 1 domain error (bad input or unsatisfied
precondition), 2 violated internal invariant (suspected bug).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .divisors import anticanonical, picard_rank, picard_rank_via_principal
from .errors import (
    HoromoriError,
    InternalInvariantViolation,
    ParseError,
    UnknownCommand,
)
from .fans import dimension, validate_fan
from .mmp import find_approximation_curve, run_reduction
from .mori import contract, flip, flip_tower, mori_generators
from .problem import ProblemFile, Report, load_problem, problem_digest
from .rootsys import verify_root_inequality

COMMANDS = ("validate", "picard", "anticanonical", "mori-cone", "contract", "flip",
            "flip-tower", "run-mmp", "find-curve", "verify-root-inequality")


def _fan_payload(fan) -> dict:
    lat = fan.lattice
    return {
        "lattice_rank": lat.rank,
        "root_system": [{"type": t, "rank": r}
                        for t, r in lat.root_system.diagram.components],
        "colours": [{"name": c.name, "node": c.node, "u": list(c.u)}
                    for c in lat.colours],
        "cones": [{"generators": [list(g) for g in c.generators],
                   "colours": sorted(c.colours)} for c in fan.maximal_cones],
        "dimension": dimension(fan),
    }


def _divisor_payload(delta) -> dict:
    return {"rays": [{"v": list(g), "a": a} for g, a in delta.ray_coeffs],
            "colours": [{"name": n, "a": a} for n, a in delta.colour_coeffs]}


def _resolve_divisor(problem: ProblemFile, spec: Optional[str]):
    if spec is None:
        raise HoromoriError("this command needs --divisor")
    if spec in ("anticanonical", "-K"):
        return anticanonical(problem.fan)
    if "=" in spec:
        name, _, payload = spec.partition("=")
        try:
            doc = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise ParseError(f"--divisor {name}: {exc.msg}") from exc
        from .divisors import BDivisor
        rays = {}
        for item in doc.get("rays", []):
            rays[tuple(item["v"])] = Fraction(str(item["a"]))
        cols = {item["name"]: Fraction(str(item["a"]))
                for item in doc.get("colours", [])}
        return BDivisor.build(problem.fan, rays=rays, colours=cols)
    return problem.divisor(spec)


def _resolve_ray(problem: ProblemFile, index: Optional[int]):
    if index is None:
        raise HoromoriError("this command needs --ray")
    cone = mori_generators(problem.fan)
    if not 0 <= index < len(cone.extremal_rays):
        raise HoromoriError(
            f"--ray {index} out of range; fan has {len(cone.extremal_rays)} extremal rays")
    return cone.extremal_rays[index]


def _mori_payload(problem: ProblemFile) -> dict:
    cone = mori_generators(problem.fan)
    basis = [list(map(str, k)) for k in cone.basis]
    rays = []
    for i, r in enumerate(cone.extremal_rays):
        rays.append({
            "index": i,
            "vector": list(r.vector),
            "generating_class": r.generating_class.label,
            "kind": contract(problem.fan, r).kind,
            "k_negative": r.k_negative,
            "has_wall_class": r.has_wall_class,
            "has_colour_class": r.has_colour_class,
        })
    return {
        "divisor_basis": basis,
        "generators": [{"label": g.label, "pairing": [str(x) for x in g.pairing]}
                       for g in cone.generators],
        "extremal_rays": rays,
    }


def _trace_payload(trace) -> dict:
    steps = []
    for s in trace.steps:
        steps.append({
            "index": s.index,
            "threshold": s.threshold,
            "ray": list(s.ray.vector),
            "class": s.ray.generating_class.label,
            "kind": s.kind,
            "orbit": [list(g) for g in s.orbit.generators],
            "perp_value": s.perp_value,
        })
    return {"status": trace.status, "steps": steps,
            "final_fan": _fan_payload(trace.final_fan),
            "final_divisor": _divisor_payload(trace.final_divisor)}


def dispatch(command: str, problem: Optional[ProblemFile],
             options: argparse.Namespace) -> Report:
    if command not in COMMANDS:
        raise UnknownCommand(f"unknown command {command!r}")
    if command == "verify-root-inequality":
        report = verify_root_inequality(options.max_rank)
        return Report(command=command, input_digest="-",
                      payload=report.to_json_dict(),
                      checks=({"name": "violations == 0",
                               "lhs": str(len(report.violations)), "op": "==",
                               "rhs": "0", "ok": not report.violations},))
    if problem is None:
        raise HoromoriError(f"{command} needs --input")
    digest = problem_digest(problem)
    fan = problem.fan

    if command == "validate":
        diag = validate_fan(fan)
        checks = tuple({"name": c.name, "lhs": "", "op": "", "rhs": "",
                        "ok": c.ok, "witness": c.witness} for c in diag.checks)
        return Report(command=command, input_digest=digest,
                      payload=diag.to_json_dict(), checks=checks,
                      status="ok" if diag.ok else "invalid")

    if command == "picard":
        rank = picard_rank(fan)
        cross = picard_rank_via_principal(fan)
        return Report(command=command, input_digest=digest,
                      payload={"picard_rank": rank},
                      checks=({"name": "divisor count minus rank equals principal corank",
                               "lhs": str(rank), "op": "==", "rhs": str(cross),
                               "ok": rank == cross},))

    if command == "anticanonical":
        return Report(command=command, input_digest=digest,
                      payload=_divisor_payload(anticanonical(fan)))

    if command == "mori-cone":
        return Report(command=command, input_digest=digest,
                      payload=_mori_payload(problem))

    if command == "contract":
        ray = _resolve_ray(problem, options.ray)
        res = contract(fan, ray)
        payload = {"kind": res.kind, "curve_kind": res.curve_kind,
                   "ray": list(ray.vector), "target": _fan_payload(res.target)}
        if res.lattice_map is not None:
            payload["lattice_map"] = [list(row) for row in res.lattice_map]
        if res.removed_rays:
            payload["removed_rays"] = [list(g) for g in res.removed_rays]
        return Report(command=command, input_digest=digest, payload=payload)

    if command == "flip":
        ray = _resolve_ray(problem, options.ray)
        data = flip(fan, ray)
        return Report(command=command, input_digest=digest,
                      payload={"u_star": list(data.u_star), "d": data.d,
                               "curve_kind": data.curve_kind,
                               "fan_plus": _fan_payload(data.fan_plus)})

    if command == "flip-tower":
        ray = _resolve_ray(problem, options.ray)
        delta = _resolve_divisor(problem, options.divisor)
        tower, rep = flip_tower(fan, ray, delta)
        payload = {"u_star": list(tower.u_star), "d": tower.d,
                   "star_fan": _fan_payload(tower.star_fan),
                   "pullback_source": _divisor_payload(rep.pullback_source),
                   "pullback_plus": _divisor_payload(rep.pullback_plus)}
        checks = ({"name": "pullback difference equals -(delta.C/d) on the new ray",
                   "lhs": str(rep.lhs_coefficient - rep.rhs_coefficient), "op": "==",
                   "rhs": str(-rep.curve_value / rep.d), "ok": rep.holds},)
        return Report(command=command, input_digest=digest, payload=payload,
                      checks=checks)

    if command == "run-mmp":
        delta = _resolve_divisor(problem, options.divisor)
        orbit = problem.orbit(options.orbit)
        trace = run_reduction(fan, delta, orbit, terminal=problem.terminal,
                              cap=options.cap)
        checks = tuple({"name": f"step {s.index} adjusted divisor kills its ray",
                        "lhs": str(s.perp_value), "op": "==", "rhs": "0",
                        "ok": s.perp_value == 0} for s in trace.steps)
        return Report(command=command, input_digest=digest,
                      payload=_trace_payload(trace), checks=checks)

    if command == "find-curve":
        delta = _resolve_divisor(problem, options.divisor)
        orbit = problem.orbit(options.orbit)
        cert = find_approximation_curve(fan, delta, orbit,
                                        terminal=problem.terminal, cap=options.cap)
        payload = {
            "trace": _trace_payload(cert.trace),
            "fibre": _fan_payload(cert.fibre.fan),
            "fibre_kind": cert.fibre.kind,
            "curve": cert.curve.to_json_dict(),
            "dim_x": cert.dim_x,
            "bound_on_minus_K_X_dot_C": cert.minus_k_x_bound,
            "strengthened_on_x": cert.strengthened_on_x,
            "x_recognized_projective_space": cert.x_is_projective_space,
        }
        checks = tuple(c.to_json_dict() for c in cert.claims)
        return Report(command=command, input_digest=digest, payload=payload,
                      checks=checks)

    raise UnknownCommand(f"unknown command {command!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="horomori",
        description="Coloured-fan minimal model program with exact arithmetic.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", help="problem file (JSON)")
    parser.add_argument("--divisor",
                        help="divisor name from the problem file, 'anticanonical', "
                             "or name=<inline JSON coefficient map>")
    parser.add_argument("--orbit", default="dense",
                        help="orbit label from the problem file (default: dense)")
    parser.add_argument("--ray", type=int, help="extremal ray index (see mori-cone)")
    parser.add_argument("--max-rank", type=int, default=8,
                        help="rank bound for verify-root-inequality")
    parser.add_argument("--cap", type=int, default=1000,
                        help="iteration cap for the reduction loop")
    parser.add_argument("--emit", choices=("json", "text"), default="text")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    options = parser.parse_args(argv)
    try:
        problem = load_problem(options.input) if options.input else None
        report = dispatch(options.command, problem, options)
    except InternalInvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except HoromoriError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = report.to_json() if options.emit == "json" else report.to_text()
    sys.stdout.write(out)
    return 0 if report.status == "ok" else 1


if __name__ == "__main__":
    sys.exit(main())
