import json
import subprocess
import sys

import pytest

from mol import cli
from mol import orbit as O


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json", "-")
    return code, json.loads(out), err


def test_depth_trapezoid(capsys):
    code, rep, _ = run_json(capsys, "depth", "--config", "trapezoid", "--class", "5")
    assert code == 0
    out = rep["outputs"]
    assert out["report"]["k"]["text"] == "2"
    assert out["report"]["n"]["text"] == "≥ 5"
    assert out["inequalities"]["melnikov_length_bound"] == 2
    assert set(rep) == {"command", "inputs", "outputs", "version", "wall_time"}


def test_depth_generic4_text(capsys):
    code, out, _ = run(capsys, "depth", "generic4", "--class", "4")
    assert code == 0
    assert "orbit depth k: 2" in out and "nilpotence class n: 1" in out and "derived length d: 1" in out


def test_depth_parallelogram_has_witnesses(capsys):
    code, rep, _ = run_json(capsys, "depth", "--config", "parallelogram", "--class", "6")
    r = rep["outputs"]["report"]
    assert not r["k"]["certified"] and r["k"]["value"] >= 5
    assert all("witness" in v for v in r["verdicts"] if v["status"] == "certified-false")


def test_depth_add_word(capsys):
    _, rep, _ = run_json(capsys, "depth", "--config", "parallelogram", "--class", "5", "--add-word", "[d2, d3]")
    assert rep["outputs"]["report"]["k"]["text"] == "2"


def test_depth_ideal_export(capsys):
    _, rep, _ = run_json(capsys, "depth", "--config", "generic4", "--class", "3", "--ideal")
    ideal = rep["outputs"]["orbit_ideal"]
    assert ideal["qualifier"] == "rational"


def test_payload_is_deterministic(capsys):
    a = run_json(capsys, "depth", "--config", "trapezoid", "--class", "4")[1]
    b = run_json(capsys, "depth", "--config", "trapezoid", "--class", "4")[1]
    a.pop("wall_time"), b.pop("wall_time")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_json_to_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "gv", "--phi", "F/(x-1)", "--json", str(path))
    assert code == 0 and "length 2" in out
    assert json.loads(path.read_text())["outputs"]["classification"] == "Liouvillian"


@pytest.mark.parametrize("phi, length, kind", [
    ("F/(x-1)+F^2/(x+1)", 3, "Riccati"),
    ("F^4/(x-1)", 5, "length-5"),
    ("0", 1, "closed"),
])
def test_gv(capsys, phi, length, kind):
    code, rep, _ = run_json(capsys, "gv", "--phi", phi)
    assert code == 0
    assert rep["outputs"]["length"] == length
    assert rep["outputs"]["classification"] == kind
    assert rep["outputs"]["all_residuals_zero"]


def test_gv_riccati_system_included(capsys):
    _, rep, _ = run_json(capsys, "gv", "--phi", "F^2/(x-1)")
    assert "riccati_system" in rep["outputs"]


def test_gv_first_integrals(capsys):
    code, rep, _ = run_json(capsys, "gv", "--first-integrals")
    assert code == 0 and all(r["ok"] for r in rep["outputs"]["first_integrals"])


def test_germ_default_assignment_word(capsys):
    code, rep, _ = run_json(capsys, "germ", "--word", "[d1,d2]")
    assert code == 0
    assert rep["outputs"]["word"]["germ"]["coefficients"]["4"] == "-eps^2*u_d1*u_d2"
    assert rep["outputs"]["dichotomy"]["verdict"] == "non-abelian"


def test_germ_file(capsys, tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"order": 10, "eps_order": None, "germs": {"f": "z + z^2", "g": "z + z^3"}}))
    code, rep, _ = run_json(capsys, "germ", "--gens", str(p), "--budget", "3")
    chain = rep["outputs"]["dichotomy"]["chain"]
    assert code == 0 and [c["level"] for c in chain] == [3, 4, 5]
    p.write_text(json.dumps({"order": 8, "germs": {"f": "z + z^2"}}))
    _, rep, _ = run_json(capsys, "germ", "--gens", str(p))
    assert rep["outputs"]["dichotomy"]["verdict"] == "abelian"


@pytest.mark.parametrize("argv, code", [
    (["depth", "--config", "nope"], 2),
    (["depth", "--config", "generic4", "--class", "1"], 2),
    (["depth", "--config", "generic4", "--class", "40"], 3),
    (["gv", "--phi", "1/F"], 2),
    (["gv", "--phi", "F^3", "--max", "2"], 2),
    (["gv"], 2),
    (["germ", "--order", "5"], 4),
    (["germ", "--word", "[d1, d7]"], 2),
    (["germ", "--gens", "/no/such/file"], 2),
    (["selftest", "--filter", "nothing-matches"], 2),
])
def test_exit_codes(capsys, argv, code):
    got, out, err = run(capsys, *argv)
    assert got == code
    assert err.startswith("mol ")


def test_resource_cap_exit(capsys, monkeypatch):
    monkeypatch.setenv("MOL_MAX_BASIS", "50")
    code, _, err = run(capsys, "depth", "--config", "trapezoid", "--class", "5")
    assert code == 3 and "ResourceLimitError" in err


def test_error_report_in_json(capsys):
    code, out, _ = run(capsys, "depth", "--config", "nope", "--json", "-")
    assert code == 2 and json.loads(out)["outputs"]["error"]["exit_code"] == 2


def test_config_list_and_export(capsys, tmp_path):
    code, out, _ = run(capsys, "config", "list")
    assert out.split() == list(O.BUILTIN_CONFIGS)
    path = tmp_path / "t.json"
    assert run(capsys, "config", "export", "trapezoid", "--out", str(path))[0] == 0
    assert O.load_config(path).orbit_words(5) == O.load_config("trapezoid").orbit_words(5)
    code, out, _ = run(capsys, "config", "export", "generic4")
    assert json.loads(out)["name"] == "generic4"


def test_selftest_filter(capsys):
    code, rep, _ = run_json(capsys, "selftest", "--filter", "gv")
    assert code == 0
    assert [c["number"] for c in rep["outputs"]["criteria"]] == [4, 5]


def test_selftest_reports_named_failure_on_corrupt_config(capsys, monkeypatch):
    real = O.builtin_config_json

    def corrupt(name):
        data = real(name)
        if name == "trapezoid":
            data["orbit_families"] = [f for f in data["orbit_families"] if f["template"] != "[d2, d3]"]
        return data

    monkeypatch.setattr(O, "builtin_config_json", corrupt)
    code, out, _ = run(capsys, "selftest", "--filter", "1")
    assert code == 1
    assert "[FAIL] criterion 1 (depth-builtins)" in out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mol.cli", "config", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "trapezoid" in proc.stdout
