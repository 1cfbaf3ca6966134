import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from corrected_sampler.cli import main
from corrected_sampler.config import CONFIG_ENV_VAR
from corrected_sampler.lemmas import reports_from_json
from corrected_sampler.linalg import matrix_to_json
from corrected_sampler.rmcf import RmcfPlant, build_rmcf
from corrected_sampler.statespace import ContinuousStateSpace, model_from_json, model_to_json


def write_model(path, model):
    path.write_text(json.dumps(model_to_json(model)))
    return str(path)


@pytest.fixture
def scalar_file(tmp_path):
    return write_model(tmp_path / "scalar.json", ContinuousStateSpace([[-1.0]], [[1.0]], [[1.0]]))


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.parametrize("eta,expected", [("corrected", 0.5), ("right-limit", 1.0)])
def test_discretize_scalar(capsys, tmp_path, scalar_file, eta, expected):
    out_path = tmp_path / "d.json"
    code, out, _ = run(capsys, "discretize", scalar_file, "--Ts", 0.5, "--eta", eta, "-o", out_path)
    assert code == 0
    model = model_from_json(json.loads(out_path.read_text()))
    assert model.Dz[0, 0] == expected and model.eta == expected
    assert model.Az[0, 0] == pytest.approx(math.exp(-0.5))
    assert f"D_z = {expected}" in out


def test_discretize_rmcf_half_gain(capsys, tmp_path):
    path = write_model(tmp_path / "rmcf.json", build_rmcf(RmcfPlant(1.0, 3.0, 2.0, 3.0)))
    code, out, err = run(capsys, "discretize", path, "--Ts", 0.5)
    assert code == 0
    assert model_from_json(json.loads(out)).Dz[0, 0] == pytest.approx(1.5)
    assert "D_z = 1.5" in err


def test_discretize_rejects_feedthrough(capsys, tmp_path):
    path = write_model(tmp_path / "d.json", ContinuousStateSpace([[-1.0]], [[1.0]], [[1.0]], [[2.0]]))
    code, _, err = run(capsys, "discretize", path, "--Ts", 1)
    assert code == 2 and "D = 0" in err


def test_malformed_json_reports_line(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "kind": "continuous",\n  "A": [1,,]\n}')
    code, _, err = run(capsys, "discretize", path, "--Ts", 1)
    assert code == 2 and "line 3" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "discretize", tmp_path / "nope.json", "--Ts", 1)
    assert code == 2 and "cannot read" in err


def test_alias_check_default_grid(capsys, scalar_file):
    code, out, _ = run(capsys, "alias-check", scalar_file, "--Ts", 0.5)
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 25
    assert list(rows[0]) == ["s_re", "s_im", "N", "sum_re", "sum_im", "tail_bound",
                             "model_value_re", "model_value_im", "gap", "right_limit_gap"]
    for r in rows:
        assert float(r["gap"]) <= float(r["tail_bound"])
        assert float(r["right_limit_gap"]) == pytest.approx(0.5, rel=1e-3)


def test_alias_check_zero_output(capsys, tmp_path):
    path = write_model(tmp_path / "c0.json", ContinuousStateSpace(np.diag([-1.0, -2.0]), np.ones((2, 1)), np.zeros((1, 2))))
    code, out, _ = run(capsys, "alias-check", path, "--Ts", 1.0, "--grid", "0.1:10:7", "--N", 50)
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 7
    assert all(float(r["gap"]) == 0.0 and float(r["right_limit_gap"]) == 0.0 for r in rows)


def test_alias_check_tiny_n_fails(capsys, scalar_file):
    code, _, err = run(capsys, "alias-check", scalar_file, "--Ts", 0.5, "--N", 2)
    assert code == 1 and "failed" in err


def test_alias_check_pole_collision(capsys, tmp_path):
    A = [[-1.0, -2 * math.pi], [2 * math.pi, -1.0]]
    path = write_model(tmp_path / "osc.json", ContinuousStateSpace(A, [[0.0], [1.0]], [[0.0, 1.0]]))
    code, _, err = run(capsys, "alias-check", path, "--Ts", 1.0, f"--grid=-1:{4 * math.pi}:3", "--N", 5)
    assert code == 2 and "PoleCollision" in err


def test_alias_check_bad_grid(capsys, scalar_file):
    code, _, err = run(capsys, "alias-check", scalar_file, "--Ts", 1, "--grid", "1:2")
    assert code == 2 and "re:im_max:count" in err


def test_bromwich_t0_ladder(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps(matrix_to_json([[-1.0]])))
    code, out, _ = run(capsys, "bromwich", path, "--t", 0, "--omega-ladder", "100,200,400,800")
    assert code == 0
    rows = read_csv(out)
    assert rows[0]["rate"] == ""
    for r in rows[1:]:
        assert float(r["rate"]) == pytest.approx(1.0, abs=0.05)
    # closed-form log formula for A = -1, c = 0
    W = 800.0
    exact = abs(math.atan2(W, 1.0) / math.pi - 0.5)
    assert float(rows[-1]["deviation"]) == pytest.approx(exact, rel=1e-6)


def test_bromwich_t_positive(capsys, scalar_file):
    code, out, _ = run(capsys, "bromwich", scalar_file, "--t", 1)
    assert code == 0
    assert float(read_csv(out)[-1]["deviation"]) < 1e-6


def test_bromwich_single_entry(capsys, scalar_file):
    code, out, _ = run(capsys, "bromwich", scalar_file, "--omega-ladder", "1000")
    rows = read_csv(out)
    assert code == 0 and len(rows) == 1 and rows[0]["rate"] == ""


def test_bromwich_non_square(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps([[1.0, 2.0]]))
    code, _, err = run(capsys, "bromwich", path)
    assert code == 2 and "square" in err


def test_rmcf_search_dramatic(capsys, tmp_path):
    sweep = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "rmcf", "--search-dramatic", "--json", "--sweep", sweep)
    assert code == 0
    rep = json.loads(out)
    half, one = rep["analyses"]
    assert one["K_max"] == "UNBOUNDED" and isinstance(half["K_max"], float)
    assert rep["dramatic"]["right_limit_crossing"] == "UNBOUNDED"
    rows = read_csv(sweep.read_text())
    assert list(rows[0]) == ["K", "eta", "spectral_radius", "stable"]
    assert all(r["stable"] == "1" for r in rows if r["eta"] == "1.0")


def test_rmcf_sample_matches_bisection(capsys, tmp_path):
    out_path = tmp_path / "r.json"
    code, _, _ = run(capsys, "rmcf", "--sigma", 1, "--omega", 3, "--zero", 2, "--gain", 1, "--Ts", 0.5, "-o", out_path)
    assert code == 0
    rep = json.loads(out_path.read_text())
    assert rep["regime_ok"] is False and "closed_form" not in rep
    assert rep["analyses"][0]["K_eff_star"] == pytest.approx(rep["oracle"]["bisection"], rel=1e-9)


def test_rmcf_in_regime_has_closed_form(capsys):
    code, out, _ = run(capsys, "rmcf", "--sigma", 0.2, "--omega", 2, "--zero", 3.8, "--gain", 1, "--json")
    rep = json.loads(out)
    assert code == 0 and rep["regime_ok"] is True
    assert rep["closed_form"]["K_eff_star"] == pytest.approx(rep["oracle"]["bisection"], rel=1e-9)


def test_rmcf_negative_gain(capsys):
    code, _, err = run(capsys, "rmcf", "--sigma", 1, "--omega", 3, "--zero", 2, "--gain", -1)
    assert code == 2 and "gain" in err


def test_rmcf_missing_params(capsys):
    code, _, err = run(capsys, "rmcf", "--sigma", 1)
    assert code == 2 and "--omega" in err


def test_verify_default_table(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    assert "verified-with-correction" in out


def test_verify_json_round_trip(capsys):
    code, out, _ = run(capsys, "verify", "--json")
    assert code == 0
    reports = reports_from_json(out)
    assert [r.lemma_id for r in reports][1] == "half-part"


def test_verify_tight_config_fails(capsys, tmp_path):
    cfg = tmp_path / "tight.json"
    cfg.write_text(json.dumps({"tolerances": 1e-15}))
    code, out, _ = run(capsys, "verify", "--config", cfg)
    assert code == 1 and "failed" in out


def test_config_from_env(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "tight.json"
    cfg.write_text(json.dumps({"tolerances": 1e-15}))
    monkeypatch.setenv(CONFIG_ENV_VAR, str(cfg))
    code, _, _ = run(capsys, "verify")
    assert code == 1


def test_bad_config_line(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{\n"seed": }')
    code, _, err = run(capsys, "verify", "--config", cfg)
    assert code == 2 and "line 2" in err


def test_seed_flag_accepted(capsys):
    code, _, _ = run(capsys, "--seed", 3, "verify", "--json")
    assert code == 0


def test_unknown_command(capsys):
    code, _, _ = run(capsys, "frobnicate")
    assert code == 2


def test_console_script_deterministic(tmp_path, scalar_file):
    cmd = [sys.executable, "-m", "corrected_sampler.cli", "alias-check", scalar_file, "--Ts", "0.5", "--N", "500",
           "--grid", "0:5:4"]
    a = subprocess.run(cmd, capture_output=True, text=True)
    b = subprocess.run(cmd, capture_output=True, text=True)
    assert a.returncode == 0
    assert a.stdout == b.stdout
