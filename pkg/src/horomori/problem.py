"""Problem files, canonical serialization and deterministic reports.

A problem file is JSON with integer lattice data and exact rational
divisor coefficients (integers or "p/q" strings).  Parsing runs every
referential-integrity check before any computation; serialization is
canonical (sorted keys, normalized rationals) so identical inputs give
byte-identical reports.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping

from .divisors import BDivisor
from .errors import ParseError, SchemaMismatch, UnknownReference
from .fans import Colour, ColouredCone, ColouredFan, ColouredLattice
from .mmp import OrbitMarker
from .rootsys import DynkinDiagram, build_root_system

SCHEMA_VERSION = 1

_TOP_FIELDS = {"schema_version", "lattice_rank", "root_system", "colours",
               "cones", "divisors", "orbits", "flags"}


@dataclass(frozen=True)
class ProblemFile:
    schema_version: int
    fan: ColouredFan
    divisors: tuple[tuple[str, BDivisor], ...]
    orbits: tuple[tuple[str, OrbitMarker], ...]
    terminal: bool

    def divisor(self, name: str) -> BDivisor:
        table = dict(self.divisors)
        if name not in table:
            raise UnknownReference(f"unknown divisor {name!r}")
        return table[name]

    def orbit(self, name: str) -> OrbitMarker:
        if name == "dense":
            return OrbitMarker.dense()
        table = dict(self.orbits)
        if name not in table:
            raise UnknownReference(f"unknown orbit {name!r}")
        return table[name]


def _require(cond: bool, message: str, exc=ParseError) -> None:
    if not cond:
        raise exc(message)


def _int_vector(value: Any, rank: int, where: str) -> tuple[int, ...]:
    _require(isinstance(value, list) and len(value) == rank,
             f"{where}: expected a length-{rank} integer vector")
    out = []
    for x in value:
        _require(isinstance(x, int) and not isinstance(x, bool),
                 f"{where}: lattice entries must be integers, got {x!r}")
        out.append(x)
    return tuple(out)


def _rational(value: Any, where: str) -> Fraction:
    if isinstance(value, bool):
        raise ParseError(f"{where}: expected a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"{where}: bad rational literal {value!r}") from exc
    raise ParseError(f"{where}: expected an integer or 'p/q' string, got {value!r}")


def parse_problem(doc: Mapping[str, Any]) -> ProblemFile:
    _require(isinstance(doc, Mapping), "problem file must be a JSON object")
    unknown = set(doc) - _TOP_FIELDS
    _require(not unknown, f"unknown fields {sorted(unknown)}", SchemaMismatch)
    version = doc.get("schema_version")
    _require(version == SCHEMA_VERSION,
             f"schema_version must be {SCHEMA_VERSION}, got {version!r}", SchemaMismatch)

    rank = doc.get("lattice_rank")
    _require(isinstance(rank, int) and rank >= 0, "lattice_rank must be a nonnegative integer")

    rs_doc = doc.get("root_system", [])
    _require(isinstance(rs_doc, list), "root_system must be a list of components")
    comps = []
    for i, comp in enumerate(rs_doc):
        _require(isinstance(comp, Mapping) and set(comp) == {"type", "rank"},
                 f"root_system[{i}]: expected {{type, rank}}")
        comps.append((comp["type"], comp["rank"]))
    rs = build_root_system(DynkinDiagram(tuple(comps)))

    colours = []
    names = set()
    for i, cdoc in enumerate(doc.get("colours", [])):
        _require(isinstance(cdoc, Mapping) and set(cdoc) == {"name", "node", "u"},
                 f"colours[{i}]: expected {{name, node, u}}")
        name = cdoc["name"]
        _require(isinstance(name, str) and name, f"colours[{i}]: bad name")
        _require(name not in names, f"colours[{i}]: duplicate name {name!r}")
        names.add(name)
        node = cdoc["node"]
        _require(isinstance(node, int), f"colours[{i}]: node must be an integer")
        if not 1 <= node <= rs.rank:
            raise UnknownReference(f"colours[{i}]: node {node} outside the root system")
        colours.append(Colour(name, node, _int_vector(cdoc["u"], rank, f"colours[{i}].u")))
    lattice = ColouredLattice(rank, rs, tuple(colours))

    cones_doc = doc.get("cones")
    _require(isinstance(cones_doc, list) and cones_doc, "cones must be a nonempty list")
    cones = []
    for i, cdoc in enumerate(cones_doc):
        _require(isinstance(cdoc, Mapping) and set(cdoc) <= {"generators", "colours"},
                 f"cones[{i}]: expected {{generators, colours?}}")
        gens_doc = cdoc.get("generators", [])
        gens = tuple(_int_vector(g, rank, f"cones[{i}].generators[{j}]")
                     for j, g in enumerate(gens_doc))
        cone_colours = cdoc.get("colours", [])
        for a in cone_colours:
            if a not in names:
                raise UnknownReference(f"cones[{i}]: undeclared colour {a!r}")
        cones.append(ColouredCone(gens, frozenset(cone_colours)))
    fan = ColouredFan(lattice, tuple(cones))

    divisors = []
    div_doc = doc.get("divisors", {})
    _require(isinstance(div_doc, Mapping), "divisors must be an object")
    for name in sorted(div_doc):
        entry = div_doc[name]
        _require(isinstance(entry, Mapping) and set(entry) <= {"rays", "colours"},
                 f"divisors[{name}]: expected {{rays?, colours?}}")
        rays = {}
        for j, item in enumerate(entry.get("rays", [])):
            _require(isinstance(item, Mapping) and set(item) == {"v", "a"},
                     f"divisors[{name}].rays[{j}]: expected {{v, a}}")
            v = _int_vector(item["v"], rank, f"divisors[{name}].rays[{j}].v")
            if v not in fan.non_coloured_rays:
                raise UnknownReference(
                    f"divisors[{name}]: {v} is not a non-coloured ray of the fan")
            rays[v] = _rational(item["a"], f"divisors[{name}].rays[{j}].a")
        cols = {}
        for j, item in enumerate(entry.get("colours", [])):
            _require(isinstance(item, Mapping) and set(item) == {"name", "a"},
                     f"divisors[{name}].colours[{j}]: expected {{name, a}}")
            if item["name"] not in names:
                raise UnknownReference(
                    f"divisors[{name}]: undeclared colour {item['name']!r}")
            cols[item["name"]] = _rational(item["a"], f"divisors[{name}].colours[{j}].a")
        divisors.append((name, BDivisor.build(fan, rays=rays, colours=cols)))

    orbits = []
    orb_doc = doc.get("orbits", {})
    _require(isinstance(orb_doc, Mapping), "orbits must be an object")
    for name in sorted(orb_doc):
        entry = orb_doc[name]
        _require(isinstance(entry, Mapping) and set(entry) == {"generators"},
                 f"orbits[{name}]: expected {{generators}}")
        gens = [_int_vector(g, rank, f"orbits[{name}].generators[{j}]")
                for j, g in enumerate(entry["generators"])]
        try:
            orbits.append((name, OrbitMarker.of(fan, gens)))
        except Exception as exc:
            raise UnknownReference(f"orbits[{name}]: {exc}") from exc

    flags = doc.get("flags", {})
    _require(isinstance(flags, Mapping) and set(flags) <= {"terminal"},
             "flags: expected {terminal?}", SchemaMismatch)
    terminal = flags.get("terminal", False)
    _require(isinstance(terminal, bool), "flags.terminal must be a boolean")

    return ProblemFile(schema_version=SCHEMA_VERSION, fan=fan,
                       divisors=tuple(divisors), orbits=tuple(orbits),
                       terminal=terminal)


def load_problem(path: str) -> ProblemFile:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_problem(doc)


def serialize_problem(problem: ProblemFile) -> dict:
    fan = problem.fan
    lat = fan.lattice
    return {
        "schema_version": problem.schema_version,
        "lattice_rank": lat.rank,
        "root_system": [{"type": t, "rank": r} for t, r in lat.root_system.diagram.components],
        "colours": [{"name": c.name, "node": c.node, "u": list(c.u)} for c in lat.colours],
        "cones": [{"generators": [list(g) for g in c.generators],
                   "colours": sorted(c.colours)} for c in fan.maximal_cones],
        "divisors": {
            name: {"rays": [{"v": list(g), "a": str(a)} for g, a in d.ray_coeffs],
                   "colours": [{"name": n, "a": str(a)} for n, a in d.colour_coeffs]}
            for name, d in problem.divisors},
        "orbits": {name: {"generators": [list(g) for g in o.generators]}
                   for name, o in problem.orbits},
        "flags": {"terminal": problem.terminal},
    }


def problem_digest(problem: ProblemFile) -> str:
    canon = json.dumps(serialize_problem(problem), sort_keys=True,
                       separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def jsonable(value: Any) -> Any:
    """Recursively convert report payloads to JSON-safe data with exact
    rationals rendered as strings."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (str, int, bool)) or value is None:
        return value
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = list(value)
        if isinstance(value, (set, frozenset)):
            items = sorted(items, key=repr)
        return [jsonable(v) for v in items]
    if hasattr(value, "to_json_dict"):
        return jsonable(value.to_json_dict())
    raise TypeError(f"cannot render {type(value)!r} in a report")


@dataclass(frozen=True)
class Report:
    command: str
    input_digest: str
    payload: Any
    checks: tuple[Mapping[str, Any], ...] = ()
    status: str = "ok"

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "input_digest": self.input_digest,
            "status": self.status,
            "payload": jsonable(self.payload),
            "checks": [jsonable(c) for c in self.checks],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"command: {self.command}",
                 f"input: {self.input_digest}",
                 f"status: {self.status}"]
        lines.extend(_render_text(jsonable(self.payload), indent=""))
        if self.checks:
            lines.append("checks:")
            for c in self.checks:
                c = jsonable(c)
                verdict = "ok" if c.get("ok", False) else "FAIL"
                name = c.get("name", "?")
                lhs, op, rhs = c.get("lhs", ""), c.get("op", ""), c.get("rhs", "")
                lines.append(f"  [{verdict}] {name}: {lhs} {op} {rhs}".rstrip())
        return "\n".join(lines) + "\n"


def _render_text(value: Any, indent: str) -> list[str]:
    lines: list[str] = []
    if isinstance(value, dict):
        for k in sorted(value):
            v = value[k]
            if isinstance(v, (dict, list)):
                lines.append(f"{indent}{k}:")
                lines.extend(_render_text(v, indent + "  "))
            else:
                lines.append(f"{indent}{k}: {v}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)):
                lines.append(f"{indent}-")
                lines.extend(_render_text(v, indent + "  "))
            else:
                lines.append(f"{indent}- {v}")
    else:
        lines.append(f"{indent}{value}")
    return lines
