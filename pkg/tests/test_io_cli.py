import json
import subprocess
import sys
from pathlib import Path

import pytest

from horomori.cli import build_parser, dispatch, main
from horomori.errors import ParseError, SchemaMismatch, UnknownReference
from horomori.problem import (
    load_problem,
    parse_problem,
    problem_digest,
    serialize_problem,
)

FIXTURES = Path(__file__).parent / "fixtures"


def plane_doc():
    return {
        "schema_version": 1,
        "lattice_rank": 2,
        "root_system": [],
        "colours": [],
        "cones": [
            {"generators": [[1, 0], [0, 1]], "colours": []},
            {"generators": [[1, 0], [-1, -1]], "colours": []},
            {"generators": [[0, 1], [-1, -1]], "colours": []},
        ],
        "divisors": {"H": {"rays": [{"v": [1, 0], "a": "1"}], "colours": []}},
        "orbits": {"ray_e1": {"generators": [[1, 0]]}},
        "flags": {"terminal": True},
    }


def coloured_doc():
    return {
        "schema_version": 1,
        "lattice_rank": 1,
        "root_system": [{"type": "A", "rank": 1}],
        "colours": [{"name": "a", "node": 1, "u": [1]}],
        "cones": [{"generators": [[1]], "colours": ["a"]},
                  {"generators": [[-1]], "colours": []}],
        "divisors": {"D": {"rays": [{"v": [-1], "a": "1"}], "colours": []}},
        "orbits": {"plus": {"generators": [[1]]}},
        "flags": {"terminal": True},
    }


def test_fixture_files_load():
    p = load_problem(str(FIXTURES / "plane.json"))
    assert p.fan.rank == 2
    assert len(p.fan.maximal_cones) == 3
    assert not p.fan.lattice.colours
    q = load_problem(str(FIXTURES / "rank1_coloured.json"))
    assert q.fan.colour_set == {"a"}


def test_round_trip_is_semantically_identical():
    p = parse_problem(plane_doc())
    again = parse_problem(serialize_problem(p))
    assert again.fan == p.fan
    assert dict(again.divisors)["H"] == dict(p.divisors)["H"]
    assert problem_digest(again) == problem_digest(p)


def test_unknown_top_level_field_rejected():
    doc = plane_doc()
    doc["extra"] = 1
    with pytest.raises(SchemaMismatch):
        parse_problem(doc)


def test_bad_schema_version():
    doc = plane_doc()
    doc["schema_version"] = 2
    with pytest.raises(SchemaMismatch):
        parse_problem(doc)


def test_non_integer_generator_rejected():
    doc = plane_doc()
    doc["cones"][0]["generators"][0] = [0.5, 1]
    with pytest.raises(ParseError):
        parse_problem(doc)


def test_colour_node_outside_root_system():
    doc = coloured_doc()
    doc["colours"][0]["node"] = 2
    with pytest.raises(UnknownReference):
        parse_problem(doc)


def test_undeclared_cone_colour():
    doc = coloured_doc()
    doc["cones"][0]["colours"] = ["zzz"]
    with pytest.raises(UnknownReference):
        parse_problem(doc)


def test_divisor_on_unknown_ray():
    doc = plane_doc()
    doc["divisors"]["H"]["rays"][0]["v"] = [5, 5]
    with pytest.raises(UnknownReference):
        parse_problem(doc)


def test_orbit_not_a_face():
    doc = plane_doc()
    doc["orbits"]["ray_e1"]["generators"] = [[1, 1]]
    with pytest.raises(UnknownReference):
        parse_problem(doc)


def test_bad_rational_literal():
    doc = plane_doc()
    doc["divisors"]["H"]["rays"][0]["a"] = "1/0"
    with pytest.raises(ParseError):
        parse_problem(doc)


# -- dispatch ---------------------------------------------------------------------


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "horomori.cli", *args],
                          capture_output=True, text=True)


def test_cli_picard_plane():
    r = run_cli("picard", "--input", str(FIXTURES / "plane.json"), "--emit", "json")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc["payload"]["picard_rank"] == 1


def test_cli_find_curve_rank1():
    r = run_cli("find-curve", "--input", str(FIXTURES / "rank1_coloured.json"),
                "--divisor", "anticanonical", "--emit", "json")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc["payload"]["curve"]["minus_k_dot_c"] == "3"
    assert all(c["ok"] for c in doc["checks"])


def test_cli_verify_root_inequality():
    r = run_cli("verify-root-inequality", "--max-rank", "4", "--emit", "json")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc["checks"][0]["ok"] is True
    assert doc["payload"]["violations"] == []


def test_cli_determinism():
    args = ("mori-cone", "--input", str(FIXTURES / "plane.json"), "--emit", "json")
    a, b = run_cli(*args), run_cli(*args)
    assert a.stdout == b.stdout
    assert a.returncode == b.returncode == 0


def test_cli_domain_error_exit_code():
    r = run_cli("contract", "--input", str(FIXTURES / "plane.json"), "--ray", "9")
    assert r.returncode == 1
    assert "error" in r.stderr


def test_cli_unknown_divisor():
    r = run_cli("run-mmp", "--input", str(FIXTURES / "plane.json"),
                "--divisor", "nope")
    assert r.returncode == 1


def test_cli_inline_divisor():
    inline = json.dumps({"rays": [{"v": [1, 0], "a": 1}]})
    r = run_cli("run-mmp", "--input", str(FIXTURES / "plane.json"),
                "--divisor", f"D={inline}", "--emit", "json")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc["payload"]["status"] == "OrbitInExceptional"


def test_cli_flip_tower_on_circuit(tmp_path):
    from horomori.generate import circuit_flip_fan
    from horomori.problem import ProblemFile, serialize_problem
    f = circuit_flip_fan(1, 1)
    problem = ProblemFile(schema_version=1, fan=f, divisors=(), orbits=(),
                          terminal=True)
    path = tmp_path / "circuit.json"
    path.write_text(json.dumps(serialize_problem(problem)))
    r = run_cli("mori-cone", "--input", str(path), "--emit", "json")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    idx = next(e["index"] for e in doc["payload"]["extremal_rays"]
               if e["kind"] == "flipping")
    inline = json.dumps({"rays": [{"v": [0, 0, 1], "a": 2}]})
    r = run_cli("flip-tower", "--input", str(path), "--ray", str(idx),
                "--divisor", f"d={inline}", "--emit", "json")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc["checks"][0]["ok"] is True


def test_cli_validate_reports_failure_status(tmp_path):
    doc = plane_doc()
    doc["cones"] = [
        {"generators": [[1, 0], [0, 1]], "colours": []},
        {"generators": [[1, 1], [1, -1]], "colours": []},
    ]
    doc["divisors"] = {}
    doc["orbits"] = {}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    r = run_cli("validate", "--input", str(path))
    assert r.returncode == 1
    assert "invalid" in r.stdout


def test_cli_unknown_command():
    r = run_cli("frobnicate")
    assert r.returncode == 2  # argparse rejects the choice
