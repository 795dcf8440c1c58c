import csv
import io
import json
import math
import subprocess
import sys

import pytest

from monopoisson.cli import OUTPUT_DIR_ENV, dispatch
from monopoisson.curves import Branch, curve_eval


def run(capsys, *argv):
    code = dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    lines = text.splitlines()
    meta = dict(line[2:].split("=", 1) for line in lines if line.startswith("# "))
    rows = list(csv.reader(io.StringIO("\n".join(l for l in lines if not l.startswith("# ")))))
    return meta, rows[0], rows[1:]


def test_density_table(capsys):
    code, out, _ = run(capsys, "density", "--t", "1", "--grid", "512")
    assert code == 0
    meta, header, rows = parse_csv(out)
    assert header == ["y", "density"]
    assert len(rows) == 512
    assert float(meta["atom_at_0"]) == pytest.approx(math.exp(-1), rel=1e-15)
    assert float(rows[0][0]) == pytest.approx(curve_eval(Branch.LOWER, 1.0))
    assert float(rows[-1][0]) == pytest.approx(curve_eval(Branch.UPPER, 1.0))
    assert all(float(r[1]) >= 0 for r in rows)


def test_verify_analytic_passes(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "analytic")
    meta, header, rows = parse_csv(out)
    assert code == 0 and meta["failed"] == "0"
    assert header[:2] == ["check", "value"]
    names = " ".join(r[0] for r in rows)
    for key in ("mode_ginf", "laplace", "branch-cut integral", "convolution", "g_inf total mass"):
        assert key in names


def test_simulate_is_byte_identical(tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        assert dispatch(["simulate", "--paths", "10", "--horizon", "5", "--seed", "7",
                         "--output", str(tmp_path / name)]) == 0
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
    header, *rows = outs[0].decode().splitlines()
    assert header == "path,t,y,is_level_hit"
    assert {r.split(",")[0] for r in rows} == {str(i) for i in range(10)}


def test_json_envelope(capsys):
    code, out, _ = run(capsys, "moments", "--n", "2", "--t", "1", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["command"] == "moments"
    assert doc["config"]["n"] == [2]
    assert doc["data"]["rows"] == [{"n": 2, "t": 1.0, "moment": 5.0}]


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"n": [3], "t": [2.0]}))
    _, out, _ = run(capsys, "moments", "--config", str(cfg))
    assert parse_csv(out)[2] == [["3", "2", "43"]]
    _, out, _ = run(capsys, "moments", "--config", str(cfg), "--n", "1")
    assert parse_csv(out)[2] == [["1", "2", "3"]]
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "moments", "--config", str(cfg))[0] == 2


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    assert dispatch(["laplace", "--p", "1", "--output", "sub/lap.csv"]) == 0
    text = (tmp_path / "sub" / "lap.csv").read_text()
    assert text.startswith("kind,p,quadrature,closed_form,abs_error")


@pytest.mark.parametrize("argv,code", [
    (["density"], 2),
    (["nonsense"], 2),
    (["wfun"], 2),
    (["density", "--t", "-1"], 1),
    (["wfun", "--x", "0.5"], 1),
    (["moments", "--n", "99"], 1),
    (["simulate", "--paths", "0"], 1),
    (["poisson-limit", "--lam", "5", "--n", "2"], 1),
    (["wfun", "--x", "-0.2", "--cut", "1"], 0),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_small_commands(capsys):
    _, out, _ = run(capsys, "wfun", "--x", "-0.1")
    _, header, rows = parse_csv(out)
    w0, wm1 = float(rows[0][1]), float(rows[0][2])
    assert w0 * math.exp(w0) == pytest.approx(-0.1) and wm1 * math.exp(wm1) == pytest.approx(-0.1)
    _, out, _ = run(capsys, "cdf", "--kind", "j", "--tmax", "5", "--grid", "6")
    vals = [float(r[1]) for r in parse_csv(out)[2]]
    assert vals[0] == 0.0 and vals == sorted(vals)
    _, out, _ = run(capsys, "poisson-limit", "--n", "10", "100")
    assert [r[0] for r in parse_csv(out)[2]] == ["10", "100"]
    _, out, _ = run(capsys, "localtime", "--paths", "20", "--ds", "1e-4")
    assert parse_csv(out)[1] == ["t", "level", "estimate", "std_error", "reference", "n_paths"]
    _, out, _ = run(capsys, "levelset", "--paths", "3", "--ds", "1e-4", "--horizon", "2")
    assert len(parse_csv(out)[2]) == 9


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "monopoisson", "moments", "--n", "2", "--t", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines() == ["n,t,moment", "2,1,5"]
