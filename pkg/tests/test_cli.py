import json
import random

import pytest

from parageo.cli import emit_plotdata, run
from parageo.nsystem import doubling_system, random_system, rigidify, system_to_json, template_system


def _dump(tmp_path, name, system):
    path = tmp_path / name
    path.write_text(json.dumps(system_to_json(system)))
    return str(path)


def _run(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate_template(tmp_path, capsys):
    code, out, _ = _run(["system", "validate", "--in", _dump(tmp_path, "t.json", template_system(3))], capsys)
    assert code == 0 and json.loads(out)["valid"]


def test_validate_failure_reports_json(tmp_path, capsys):
    obj = system_to_json(template_system(3))
    obj["switches"][2]["values"] = ["0", "1", "3"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(obj))
    code, out, _ = _run(["system", "validate", "--in", str(path)], capsys)
    assert code == 2
    report = json.loads(out)
    assert report["violations"][0]["condition"] == "S1"
    assert "location" in report["violations"][0]


def test_usage_errors(capsys):
    assert _run(["nothing"], capsys)[0] == 1
    assert _run(["system", "validate"], capsys)[0] == 1
    assert _run(["profile", "compute", "--xi", "1"], capsys)[0] == 1


def test_dual_of_two_system_matches(tmp_path, capsys):
    path = _dump(tmp_path, "d.json", doubling_system())
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    assert run(["system", "dual", "--in", path, "--format", "plot", "--qmax", "30", "--out", str(a)]) == 0
    assert run(["system", "eval", "--in", path, "--format", "plot", "--qmax", "30", "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()


def test_template_plot_has_four_columns(tmp_path, capsys):
    path = _dump(tmp_path, "t.json", template_system(3))
    code, out, _ = _run(["system", "eval", "--in", path, "--format", "plot", "--qmax", "6", "--grid-step", "1"],
                        capsys)
    rows = [line.split() for line in out.splitlines() if not line.startswith("#")]
    assert code == 0 and all(len(r) == 4 for r in rows)
    assert rows[3] == ["3", "0", "1", "2"]


def test_profile_csv_shape(capsys):
    code, out, _ = _run(["profile", "compute", "--field", "rational", "--place", "inf",
                         "--xi", "1,1.6180339887", "--qmax", "12", "--format", "csv"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 50
    rows = [[float(c) for c in line.split(",")[1:3]] for line in lines[1:]]
    for col in range(2):
        assert all(a[col] <= b[col] + 1e-12 for a, b in zip(rows, rows[1:]))


def test_profile_plot_with_dual(capsys):
    code, out, _ = _run(["profile", "compute", "--xi", "1,1.6180339887", "--qmax", "2", "--format", "plot",
                         "--dual"], capsys)
    rows = [line.split() for line in out.splitlines() if not line.startswith("#")]
    assert code == 0 and all(len(r) == 5 for r in rows)


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(["system", "gen", "--seed", "11", "--periodic", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_construct_run(tmp_path, capsys):
    R = rigidify(random_system(random.Random(3), 3, moves=30, max_step=4), c=2, horizon=200)
    path = _dump(tmp_path, "r.json", R)
    code, out, _ = _run(["construct", "run", "--system", path, "--steps", "10", "--mode", "certificate",
                         "--precision", "256"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["report"]["ok"]
    assert len(rep["chain"]) == 11
    assert float(rep["error_radius"]) < 1e-100


def test_extend_commands(capsys):
    code, out, _ = _run(["extend", "transfer", "--omega-hat", "2", "--lambda-hat", "0.5", "--d", "2"], capsys)
    assert code == 0
    assert json.loads(out) == {"omega_hat": "5", "lam_hat": "1/5", "jarnik_residual": "0"}
    code, out, _ = _run(["extend", "verify", "--field", "D=2", "--xi", "1,2^(1/4)", "--qmax", "3"], capsys)
    assert code == 0 and json.loads(out)["stable"]


def test_check_commands(tmp_path, capsys):
    assert _run(["check", "jarnik", "--seed", "3"], capsys)[0] == 0
    assert _run(["check", "sumrule", "--xi", "1,1.6180339887", "--qmax", "4"], capsys)[0] == 0
    assert _run(["check", "burger", "--xi", "1,2^(1/3),4^(1/3)", "--qmax", "2"], capsys)[0] == 0
    assert _run(["check", "thunder", "--field", "D=2", "--xi", "1,2^(1/4)", "--q", "0,2"], capsys)[0] == 0


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "exp.toml"
    cfg.write_text('[experiment]\nqmax = "2"\ngrid_step = "1"\nformat = "csv"\n')
    code, out, _ = _run(["profile", "compute", "--xi", "1,1.6180339887", "--config", str(cfg)], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 4


def test_precision_failure_is_contract_error(capsys):
    code, out, _ = _run(["profile", "compute", "--xi", "1,1.618", "--qmax", "80", "--precision", "64"], capsys)
    assert code == 2 and json.loads(out)["violations"][0]["condition"] == "precision"


def test_plotdata_roundtrip():
    T = template_system(2)
    qs = list(range(0, 7))
    text = emit_plotdata(qs, [[T.evaluate(q)[j] for q in qs] for j in range(2)])
    for q, line in zip(qs, text.splitlines()):
        assert [int(c) for c in line.split()[1:]] == list(T.evaluate(q))
