import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from envcert.cli import main

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"
DI = str(PROBLEMS / "double_integrator.json")
JET = str(PROBLEMS / "jet_engine.json")

STATIONARY = {
    "dynamics": ["0"], "dt": "1/10", "state_box": [["-2", "2"]],
    "envelope": {"c": ["0"], "G": [["1"]]}, "X0": {"c": ["0"], "G": [["1/2"]]},
}

UNIT_DI = {
    "dynamics": ["x2", "u1"], "input_box": [["-2", "2"]], "dt": "1/10",
    "state_box": [["-2", "2"], ["-2", "2"]],
    "envelope": {"c": ["0"] * 3, "G": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]},
    "X0": {"c": ["0", "0"], "G": [["1/2", "0"], ["0", "1/2"]]},
}


def write(tmp_path, data, name="p.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_certify_and_verify_round_trip(tmp_path, capsys):
    cert = str(tmp_path / "di.cert.json")
    assert main(["certify", DI, "--out", cert]) == 0
    out = capsys.readouterr().out
    for name in ("taylor_model", "invariance", "safety", "admissibility", "initial"):
        assert name in out
    assert "overall: PASS" in out
    assert main(["verify", cert, DI]) == 0


def test_verify_tampered_and_wrong_problem(tmp_path):
    cert = tmp_path / "di.cert.json"
    assert main(["certify", DI, "--out", str(cert)]) == 0
    data = json.loads(cert.read_text())
    assert main(["verify", str(cert), JET]) == 4
    data["witnesses"]["initial"]["epsilon"] = "1/2"
    tampered = write(tmp_path, data, "t.json")
    assert main(["verify", tampered, DI]) == 3
    # recompute the digest so only the exact checks can catch the edit
    from envcert.verify import digest
    data["digest"] = digest({k: v for k, v in data.items() if k != "digest"})
    forged = write(tmp_path, data, "f.json")
    assert main(["verify", forged, DI]) == 1


def test_exit_codes_follow_verdicts(tmp_path):
    p = write(tmp_path, STATIONARY)
    assert main(["certify", p]) == 1  # invariance fails without inflation
    assert main(["certify", p, "--inflate-outer", "1/100"]) == 0
    stiff = dict(STATIONARY, dynamics=["100*x1"], dt="1")
    assert main(["certify", write(tmp_path, stiff, "s.json"), "--config", "taylor.max_doublings=3"]) == 2


def test_input_errors(tmp_path):
    assert main(["certify", str(tmp_path / "missing.json")]) == 3
    assert main(["certify", write(tmp_path, {"dynamics": "x"}, "bad.json")]) == 3
    assert main(["certify", DI, "--config", "nonsense"]) == 3
    assert main(["certify", DI, "--config", "no.such=1"]) == 3
    (tmp_path / "junk.json").write_text("{")
    assert main(["verify", str(tmp_path / "junk.json"), DI]) == 3


def test_taylor_prints_polynomials(tmp_path, capsys):
    p = write(tmp_path, UNIT_DI)
    assert main(["taylor", p, "--order", "2"]) == 0
    out = capsys.readouterr().out
    assert "p_x1 = l1 + t*l2 + 1/2*t^2*l3" in out
    assert "p_x2 = l2 + t*l3" in out
    assert "p_u1 = l3" in out


def test_taylor_check_bounds(tmp_path, capsys):
    p = write(tmp_path, UNIT_DI)
    slopes = tmp_path / "slopes.json"
    slopes.write_text(json.dumps(["101020/100000000000", "1/1000000", "1/1000000"]))
    assert main(["taylor", p, "--check-bounds", str(slopes)]) == 0
    assert "validity: PASS" in capsys.readouterr().out
    slopes.write_text(json.dumps({"slopes": ["0", "1/1000000", "1/1000000"]}))
    assert main(["taylor", p, "--check-bounds", str(slopes)]) == 1


def test_taylor_stationary_and_no_remainder(tmp_path, capsys):
    assert main(["taylor", write(tmp_path, STATIONARY)]) == 0
    out = capsys.readouterr().out
    assert "p_x1 = l1" in out and "1/1000000*t" in out
    stiff = dict(STATIONARY, dynamics=["100*x1"], dt="1")
    assert main(["taylor", write(tmp_path, stiff, "s.json"), "--order", "1"]) == 2


def test_picard_order_flag_changes_the_problem(tmp_path):
    cert = str(tmp_path / "c.json")
    assert main(["certify", DI, "--picard-order", "3", "--out", cert]) == 0
    assert main(["verify", cert, DI]) == 4
    assert main(["verify", cert, DI, "--picard-order", "3"]) == 0


def test_reach_output(tmp_path):
    out = tmp_path / "reach.json"
    assert main(["reach", DI, "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert set(data) == {"reach_discrete", "reach_interval"}


def _read_csv(path):
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "x,y"
    return [tuple(map(float, r.split(","))) for r in rows[1:]]


def test_plot_data_from_certificate(tmp_path):
    cert = str(tmp_path / "c.json")
    assert main(["certify", DI, "--out", cert]) == 0
    outdir = tmp_path / "plots"
    assert main(["plot-data", DI, "--cert", cert, "--rows", "x1", "x2", "--out", str(outdir)]) == 0
    names = sorted(p.name for p in outdir.iterdir())
    assert names == ["envelope.csv", "reach_discrete.csv", "reach_interval.csv", "safety_box.csv"]
    box = _read_csv(outdir / "safety_box.csv")
    xs, ys = [p[0] for p in box], [p[1] for p in box]
    for name in ("envelope.csv", "reach_interval.csv"):
        for x, y in _read_csv(outdir / name):
            assert min(xs) <= x <= max(xs) and min(ys) <= y <= max(ys)


def test_plot_data_degenerate_sets(tmp_path):
    square = dict(UNIT_DI, dynamics=["0", "0"])
    outdir = tmp_path / "sq"
    assert main(["plot-data", write(tmp_path, square), "--rows", "1", "2", "--out", str(outdir)]) == 0
    assert len(_read_csv(outdir / "envelope.csv")) == 4
    segment = dict(STATIONARY, dynamics=["0", "0"], state_box=[["-2", "2"], ["-2", "2"]],
                   envelope={"c": ["0", "0"], "G": [["1"], ["1"]]}, X0={"c": ["0", "0"], "G": [["0"], ["0"]]})
    outdir = tmp_path / "seg"
    assert main(["plot-data", write(tmp_path, segment, "seg.json"), "--out", str(outdir)]) == 0
    assert len(_read_csv(outdir / "envelope.csv")) == 2


def test_plot_data_bad_rows(tmp_path):
    assert main(["plot-data", DI, "--rows", "x1", "x9", "--out", str(tmp_path)]) == 3
    assert main(["plot-data", DI, "--rows", "0", "1", "--out", str(tmp_path)]) == 3
    assert main(["plot-data", DI, "--rows", "x1", "x1", "--out", str(tmp_path)]) == 3


def test_simulate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["simulate", JET, "--samples", "5", "--seed", "2", "--out", str(a)]) == 0
    assert main(["simulate", JET, "--samples", "5", "--seed", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(["simulate", JET, "--samples", "0"]) == 3


def test_console_script_runs():
    exe = shutil.which("envcert")
    cmd = [exe] if exe else [sys.executable, "-m", "envcert"]
    proc = subprocess.run(cmd + ["--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "envcert" in proc.stdout
