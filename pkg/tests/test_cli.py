import io
import json
import subprocess
import sys
from types import SimpleNamespace

import pytest

from solidangles import cli


def call(*argv):
    out = io.StringIO()
    code = cli.run(list(argv), stdout=out)
    text = out.getvalue()
    return code, (json.loads(text) if text.strip() else None), text


def test_solidpoly_reeve():
    code, rep, _ = call("solidpoly", "--family", "reeve", "--h", "12")
    assert code == 0 and rep["ok"]
    c = [float(x) if not isinstance(x, str) else float(eval(x)) for x in rep["result"]["coefficients"]]
    assert c[0] == 0 and c[2] == 0 and c[3] == pytest.approx(2)
    assert c[1] < 0
    assert len(rep["result"]["provenance"]) == 4
    assert rep["inputs_digest"] and "wall_time_s" not in rep


def test_hstar_and_ehrhart():
    code, rep, _ = call("hstar", "--family", "reeve", "--h", "12")
    assert code == 0 and rep["result"]["hstar"] == ["1", "0", "11", "0"]
    code, rep, _ = call("ehrhart", "--family", "interval", "--a", "1/3", "--b", "4/3")
    assert code == 0 and rep["result"]["period"] == 3


def test_vertexsum_tetrahedron():
    code, rep, _ = call("vertexsum", "--family", "tetrahedron")
    assert code == 0
    assert rep["result"]["vertex_sum"]["value"] == pytest.approx(0.17548, abs=1e-4)
    assert rep["result"]["simplex_bound"]["ok"]


def test_family_roundtrip_file(tmp_path):
    code, fam_json, text = call("family", "delta", "--d", "3", "--h", "-100")
    assert code == 0 and len(fam_json["vertices"]) == 4
    f = tmp_path / "p.json"
    f.write_text(text)
    code, rep, _ = call("gram-check", "--file", str(f))
    assert code == 0 and rep["result"]["residual"] < 1e-9


def test_family_roundtrip_stdin(monkeypatch):
    _, _, text = call("family", "reeve", "--h", "3")
    monkeypatch.setattr(sys, "stdin", io.StringIO(text))
    code, rep, _ = call("vertexsum", "--file", "-")
    assert code == 0 and 0 < rep["result"]["vertex_sum"]["value"] < 0.5


def test_deterministic_mc_output():
    args = ("gram-check", "--family", "cube", "--d", "4", "--policy", "mc",
            "--mc-samples", "20000", "--seed", "5")
    assert call(*args)[2] == call(*args)[2]


def test_usage_errors():
    assert call("frobnicate")[0] == 1
    assert call("solidpoly")[0] == 1
    assert call("solidpoly", "--family", "reeve", "--h", "0")[0] == 1
    assert call("solidpoly", "--file", "/nonexistent.json")[0] == 1
    assert call("valuation", "monotone", "--val", "solid", "x.json")[0] == 1


def test_violation_exit_code(monkeypatch):
    fake = SimpleNamespace(value=0.3, abs_error=0.0, to_dict=lambda: {"value": 0.3})
    monkeypatch.setattr(cli, "brianchon_gram_sum", lambda p, policy: fake)
    code, rep, _ = call("gram-check", "--family", "cube", "--d", "3")
    assert code == 2 and rep["ok"] is False


def test_env_policy(monkeypatch):
    monkeypatch.setenv("SOLIDANGLES_POLICY", "mc")
    _, rep, _ = call("vertexsum", "--family", "simplex", "--d", "2")
    assert rep["policy"]["mode"] == "mc"
    _, rep, _ = call("vertexsum", "--family", "simplex", "--d", "2", "--policy", "exact")
    assert rep["policy"]["mode"] == "exact"


def test_timing_flag():
    _, rep, _ = call("hstar", "--family", "cube", "--d", "2", "--timing")
    assert rep["wall_time_s"] >= 0


def test_angle_command():
    _, rep, _ = call("angle", "--family", "cube", "--d", "2", "--point", "0,1/2")
    assert rep["result"]["angle"]["value"] == pytest.approx(0.5)
    _, rep, _ = call("angle", "--family", "cube", "--d", "3")
    assert len(rep["result"]["vertex_angles"]) == 8


def test_valuation_commands(tmp_path):
    paths = {}
    for name, argv in {"tri": ("simplex", "--d", "2"), "sq": ("cube", "--d", "2"),
                       "reeve": ("reeve", "--h", "5")}.items():
        _, _, text = call("family", *argv)
        paths[name] = tmp_path / f"{name}.json"
        paths[name].write_text(text)
    code, rep, _ = call("valuation", "numerator", "--val", "indicator", "--family", "reeve", "--h", "5")
    assert code == 0 and rep["result"]["numerator"]["entries"][:3] == [1, 0, 4]
    code, rep, _ = call("valuation", "monotone", "--val", "solid", str(paths["tri"]), str(paths["sq"]))
    assert code == 0 and rep["ok"]
    code, rep, _ = call("valuation", "pi-numerator", "--val", "solid", str(paths["reeve"]))
    assert code == 0 and rep["result"]["agree"] and rep["result"]["parallelepiped_points"] == 5


def test_numerator_and_period():
    code, rep, _ = call("numerator", "--family", "reeve", "--h", "1")
    assert code == 0 and rep["result"]["unimodality"]
    code, rep, _ = call("period", "--family", "interval", "--a", "0", "--b", "1/3")
    assert code == 0


def test_verify():
    code, rep, _ = call("verify")
    assert code == 0 and rep["result"]["passed"] == rep["result"]["total"]


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "solidangles.cli", "hstar", "--family", "simplex",
                          "--d", "3"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["result"]["hstar"] == ["1", "0", "0", "0"]
