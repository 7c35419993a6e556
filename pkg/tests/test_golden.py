"""``realvar solve --json`` against the files in tests/golden.

Floats are compared with a tolerance, border relations by parsing them back.
Regenerate a file with ``realvar solve NAME [flags] --json > tests/golden/FILE``.
"""

import contextlib
import io
import json
import math
from pathlib import Path

import jsonschema
import pytest

from realvar import cli
from realvar.parse import parse_polynomial
from realvar.report import SOLVE_SCHEMA

GOLDEN = Path(__file__).parent / "golden"
FILES = sorted(GOLDEN.glob("*.json"))
FLAGS = ("mode", "criterion", "policy", "t_start", "t_max", "t_extra", "seed", "basis", "plus_rule")


def run_cli(argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = cli.main(argv)
    return code, out.getvalue()


def argv_for(path, doc):
    name = path.stem.split("-")[0]
    argv = ["solve", name, "--json"]
    for key in FLAGS:
        value = doc["config"].get(key)
        if value is not None:
            argv += ["--" + key.replace("_", "-"), str(value)]
    return argv


def assert_close(got, want, path="$", names=None):
    if isinstance(want, dict):
        assert isinstance(got, dict) and set(got) == set(want), path
        names = want.get("system", {}).get("vars", names)
        for k in want:
            if k == "border_basis":
                assert_same_relations(got[k], want[k], names, path + "." + k)
            else:
                assert_close(got[k], want[k], f"{path}.{k}", names)
    elif isinstance(want, list):
        assert isinstance(got, list) and len(got) == len(want), path
        for k, (a, b) in enumerate(zip(got, want)):
            assert_close(a, b, f"{path}[{k}]", names)
    elif isinstance(want, float) and not isinstance(want, bool):
        assert math.isclose(got, want, rel_tol=1e-6, abs_tol=1e-8), f"{path}: {got} != {want}"
    else:
        assert got == want, f"{path}: {got!r} != {want!r}"


def assert_same_relations(got, want, names, path):
    assert len(got) == len(want), path
    for a, b in zip(got, want):
        pa, pb = parse_polynomial(a, names), parse_polynomial(b, names)
        assert set(pa.terms) == set(pb.terms), f"{path}: {a} vs {b}"
        for m in pa.terms:
            assert math.isclose(pa.terms[m], pb.terms[m], rel_tol=1e-6, abs_tol=1e-8), f"{path}: {a} vs {b}"


@pytest.mark.parametrize("path", FILES, ids=[p.stem for p in FILES])
def test_golden(path):
    want = json.loads(path.read_text())
    jsonschema.validate(want, SOLVE_SCHEMA)
    code, out = run_cli(argv_for(path, want))
    assert code == (2 if want["status"] == "incomplete" else 0)
    got = json.loads(out)
    jsonschema.validate(got, SOLVE_SCHEMA)
    assert_close(got, want)


def test_schema_file_is_current():
    doc = json.loads((Path(__file__).parents[1] / "docs" / "solve-schema.json").read_text())
    assert doc == json.loads(json.dumps(SOLVE_SCHEMA))
