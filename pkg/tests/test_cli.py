import json
import subprocess
import sys
from pathlib import Path

import pytest

from realvar import cli
from realvar.report import SOLVE_SCHEMA

ROOT = Path(__file__).parents[1]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gauss(capsys):
    code, out, _ = run(capsys, "solve", "--mode", "real", str(ROOT / "systems" / "gauss.sys"))
    assert code == 0
    assert "verdict: DimConditions at (t, s) = (5, 2)" in out
    assert "roots (2):" in out
    assert "radical_certified: true" in out


def test_cox98_complex(capsys):
    code, out, _ = run(capsys, "solve", "--mode", "complex", "--criterion", "dims", "cox98")
    assert code == 0
    assert "verdict: DimConditions at (t, s) = (6, 3)" in out
    assert "roots (8):" in out
    assert "dim π_s(H_3^⊥)" in out


def test_table_layout(capsys):
    _, out, _ = run(capsys, "solve", "cox98")
    rows = {line.split()[0] + line.split()[1]: line.split()[2:] for line in out.splitlines() if line.startswith("dim")}
    assert rows["dimπ_s(G_5^⊥)"] == ["1", "2", "2", "2", "3", "5", "—"]
    assert "(s < D: roots checked against the input)" in out


def test_both_criteria_side_by_side(capsys):
    _, out, _ = run(capsys, "solve", "--criterion", "both", "cox98")
    assert "first success: dimension conditions (5, 2)   rank condition (6, 2)" in out
    assert "rank M_s(L*)" in out


def test_json(capsys):
    code, out, _ = run(capsys, "solve", "--json", "--seed", "3", "twopoints")
    doc = json.loads(out)
    assert code == 0 and doc["schema_version"] == 1
    assert sorted(r["coords"][0] for r in doc["roots"]) == pytest.approx([-1, 1])
    assert {r["seed"] for r in doc["roots"]} == {3}


def test_empty_is_success(capsys):
    code, out, _ = run(capsys, "solve", "noreal2")
    assert code == 0
    assert "status: empty" in out


def test_incomplete(capsys):
    code, out, _ = run(capsys, "solve", "--t-max", "4", "cox98")
    assert code == cli.EXIT_EXHAUSTED
    assert "status: incomplete" in out


def test_missing_file(capsys):
    code, _, err = run(capsys, "solve", "nowhere.sys")
    assert code == 1 and err.startswith("realvar: ")


def test_parse_error(capsys, tmp_path):
    f = tmp_path / "bad.sys"
    f.write_text("vars x;\nx^2 + ;\n")
    code, _, err = run(capsys, "solve", str(f))
    assert code == 1
    assert "line 2, column 5" in err


def test_bad_configuration(capsys):
    code, _, err = run(capsys, "solve", "--mode", "complex", "--criterion", "rank", "cox98")
    assert code == 1 and "rank criterion" in err


def test_rank_tolerance_env(capsys, monkeypatch):
    monkeypatch.setenv("REALVAR_RANK_TOL", "1e-8")
    code, out, _ = run(capsys, "solve", "linear")
    assert code == 0 and "roots (1):" in out


def test_bench_list(capsys):
    code, out, _ = run(capsys, "bench", "--list")
    assert code == 0 and out.split()[0] == "cox98" and "oracle" in out.split()


def test_bench_one(capsys):
    code, out, _ = run(capsys, "bench", "empty")
    assert code == 0 and out.startswith("[PASS] 10 empty real variety")


def test_bench_unknown(capsys):
    code, _, err = run(capsys, "bench", "nope")
    assert code == 1 and err.startswith("realvar: unknown check 'nope'")


def test_schema(capsys):
    code, out, _ = run(capsys, "schema")
    assert code == 0 and json.loads(out) == json.loads(json.dumps(SOLVE_SCHEMA))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "realvar.cli", "solve", "linear"], capture_output=True, text=True)
    assert proc.returncode == 0 and "roots (1):" in proc.stdout
