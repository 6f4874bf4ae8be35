import json
import subprocess
import sys

import pytest

from artifact.catalog import CATALOG
from artifact.cli_reports import analyze, dumps, main

SQRT2 = {"p": 2, "layers": [{"kind": "eisenstein", "poly": [-2, 0, 1]}]}
CUBIC = {"p": 3, "layers": [{"kind": "eisenstein", "poly": [3, 0, -3, 1]}]}


def write(tmp_path, doc, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_analyze_with_oracle_agrees(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["analyze", "--spec", write(tmp_path, SQRT2), "--oracle", "--json", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert set(rep) == {"input", "profile", "formulas", "oracle", "agreement", "timing", "precision"}
    assert rep["formulas"]["v_p_m"] == 1 and rep["oracle"]["v_p_m"] == 1
    assert rep["agreement"]["all"] is True
    assert rep["formulas"]["m"] == "2^1"


def test_report_json_round_trips(tmp_path):
    rep = analyze(CUBIC, oracle=True)
    text = dumps(rep)
    assert dumps(json.loads(text)) == text


def test_non_eisenstein_layer_is_input_error(tmp_path, capsys):
    bad = {"p": 2, "layers": [{"kind": "eisenstein", "poly": [1, 0, 1]}]}
    assert main(["analyze", "--spec", write(tmp_path, bad)]) == 2


def test_unreadable_spec_is_input_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["analyze", "--spec", str(path)]) == 2


def test_budget_exhaustion_exit_code(tmp_path, capsys):
    assert main(["analyze", "--spec", write(tmp_path, CUBIC), "--oracle", "--budget", "10"]) == 3
    assert "BudgetExceeded" in capsys.readouterr().err


def test_profile_only_spec(tmp_path, capsys):
    doc = {"profile": {"p": 5, "e_K": 4, "f_K": 1, "t": 3}}
    assert main(["analyze", "--spec", write(tmp_path, doc)]) == 0
    assert "5^7" in capsys.readouterr().out
    assert main(["analyze", "--spec", write(tmp_path, doc), "--oracle"]) == 2
    bad = {"profile": {"p": 3, "e_K": 1, "t": 2}}
    assert main(["analyze", "--spec", write(tmp_path, bad)]) == 2


def test_sweep_command(tmp_path, capsys):
    out = tmp_path / "sweep.json"
    assert main(["sweep", "--p", "5", "--e-max", "8", "--json", str(out)]) == 0
    rows = json.loads(out.read_text())["rows"]
    row = next(r for r in rows if (r["e_K"], r["t"]) == (4, 3))
    assert row["free"] is False
    assert main(["sweep", "--p", "3", "--e-max", "2", "--json", str(out)]) == 0
    assert all(r["free"] for r in json.loads(out.read_text())["rows"])
    assert main(["sweep", "--p", "4", "--e-max", "2"]) == 2


def test_global_command(capsys):
    assert main(["global", "--degree", "6", "--ram", "3:1,2"]) == 0
    assert json.loads(capsys.readouterr().out)["valuations"] == {"3": 2}
    assert main(["global", "--degree", "20", "--ram", "5:1,4"]) == 0
    assert json.loads(capsys.readouterr().out)["valuations"] == {"5": 4}
    assert main(["global", "--degree", "8", "--ram", "2:2,1"]) == 2
    assert "p = 2" in capsys.readouterr().err
    assert main(["global", "--degree", "6", "--ram", "3-1"]) == 2


def test_catalog_verify_passes(capsys):
    assert main(["catalog-verify"]) == 0
    out = capsys.readouterr().out
    assert f"{len(CATALOG)}/{len(CATALOG)} entries agree" in out
    assert len(CATALOG) >= 6


def test_catalog_verify_budget_and_corruption(capsys):
    assert main(["catalog-verify", "--budget", "1"]) == 3
    assert main(["catalog-verify", "--corrupt", "Q4/Q2"]) == 1
    assert "MISMATCH" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "artifact", "global", "--degree", "6", "--ram", "3:1,2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["valuations"] == {"3": 2}
