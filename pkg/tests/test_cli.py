import json
import subprocess
import sys

import numpy as np
import pytest

from spectralfs.cli import main
from spectralfs.datagen import SyntheticSpec, synth_classification
from spectralfs.harness import sample_size_for_epsilon, select_features
from spectralfs.linalg import SamplingScheme, apply_scheme, apply_scheme_to_points, identity_scheme, write_matrix
from spectralfs.risk import kernel, risk, sampled_kernel
from spectralfs.solvers import rlsc_predict, rlsc_train


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def cls_data(tmp_path, capsys):
    code, out, _ = run(capsys, "gen", "--n", 20, "--d", 80, "--k", 10, "--seed", 3,
                       "--out", tmp_path / "cls")
    assert code == 0
    return {k: v for k, v in json.loads(out).items()}


@pytest.fixture
def reg_data(tmp_path, capsys):
    code, out, _ = run(capsys, "gen", "--kind", "regression", "--n", 12, "--d", 60, "--k", 6,
                       "--noise-sigma", 1.0, "--out", tmp_path / "reg")
    assert code == 0
    return json.loads(out)


def test_gen_matches_library(cls_data):
    from spectralfs.linalg import read_matrix
    x, _ = synth_classification(SyntheticSpec(n=20, d=80, k=10, seed=3))
    np.testing.assert_array_equal(read_matrix(cls_data["matrix"]).dense(), x.dense())


def test_select_stdout_stderr_separation(cls_data, capsys):
    code, out, err = run(capsys, "select", "--method", "bss", "--matrix", cls_data["matrix"],
                         "--r", 40)
    assert code == 0
    scheme = SamplingScheme.from_json(out)
    report = json.loads(err)
    assert scheme.r == 40 and report["within_bound"]


def test_select_matches_library(cls_data, tmp_path, capsys):
    from spectralfs.linalg import read_matrix
    code, out, _ = run(capsys, "select", "--method", "leverage", "--matrix", cls_data["matrix"],
                       "--r", 30, "--seed", 7, "--out", tmp_path / "s.json")
    assert code == 0 and json.loads(out)["r"] == 30
    lib = select_features("leverage", read_matrix(cls_data["matrix"]), None, 30, 7)
    assert SamplingScheme.from_json((tmp_path / "s.json").read_text()) == lib


def test_leverage_scheme_files_byte_identical(cls_data, tmp_path, capsys):
    for name in ("a.json", "b.json"):
        assert run(capsys, "select", "--method", "leverage", "--matrix", cls_data["matrix"],
                   "--epsilon", 0.5, "--seed", 11, "--out", tmp_path / name)[0] == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_select_r_zero_is_usage_error(cls_data, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["select", "--method", "bss", "--matrix", str(cls_data["matrix"]), "--r", "0"])
    assert exc.value.code == 2
    assert "r must be >= 1" in capsys.readouterr().err


def test_select_epsilon_sizes(cls_data, capsys):
    code, out, err = run(capsys, "select", "--method", "bss", "--matrix", cls_data["matrix"],
                         "--epsilon", 0.5)
    assert code == 0
    rho = json.loads(err)["rho"]
    assert SamplingScheme.from_json(out).r == sample_size_for_epsilon("bss", rho, 0.5)


def test_info_gain_requires_labels(cls_data, capsys):
    code, _, err = run(capsys, "select", "--method", "info-gain", "--matrix", cls_data["matrix"],
                       "--r", 5)
    assert code == 2 and "labels" in err


def test_missing_file_exit_code(tmp_path, capsys):
    code, _, err = run(capsys, "select", "--method", "bss", "--matrix", tmp_path / "nope.mtx",
                       "--r", 3)
    assert code == 2 and err


def test_train_predict_parity(cls_data, tmp_path, capsys):
    from spectralfs.ingest import read_labels
    from spectralfs.linalg import read_matrix
    run(capsys, "select", "--method", "rrqr", "--matrix", cls_data["matrix"], "--r", 15,
        "--out", tmp_path / "s.json")
    code, _, _ = run(capsys, "train", "--matrix", cls_data["matrix"], "--labels",
                     cls_data["labels"], "--lambda", 0.2, "--scheme", tmp_path / "s.json",
                     "--out", tmp_path / "m.json")
    assert code == 0
    rng = np.random.default_rng(0)
    q = rng.standard_normal((80, 4))
    write_matrix(tmp_path / "q.mtx", q)
    code, out, _ = run(capsys, "predict", "--model", tmp_path / "m.json", "--points",
                       tmp_path / "q.mtx", "--matrix", cls_data["matrix"])
    assert code == 0
    x = read_matrix(cls_data["matrix"])
    s = SamplingScheme.from_json((tmp_path / "s.json").read_text())
    m = rlsc_train(apply_scheme(s, x), read_labels(cls_data["labels"]), 0.2)
    np.testing.assert_allclose(json.loads(out)["scores"],
                               rlsc_predict(m, apply_scheme_to_points(s, q)), rtol=1e-10)


def test_rlsc_prediction_needs_matrix(cls_data, tmp_path, capsys):
    run(capsys, "train", "--matrix", cls_data["matrix"], "--labels", cls_data["labels"],
        "--lambda", 0.2, "--out", tmp_path / "m.json")
    write_matrix(tmp_path / "q.mtx", np.ones((80, 1)))
    code, _, _ = run(capsys, "predict", "--model", tmp_path / "m.json", "--points",
                     tmp_path / "q.mtx")
    assert code == 2


def test_ridge_train_predict(reg_data, tmp_path, capsys):
    code, _, _ = run(capsys, "train", "--kind", "ridge", "--matrix", reg_data["matrix"],
                     "--targets", reg_data["targets"], "--lambda", 0.3, "--out", tmp_path / "m.json")
    assert code == 0
    write_matrix(tmp_path / "q.mtx", np.zeros((60, 2)))
    code, out, _ = run(capsys, "predict", "--model", tmp_path / "m.json", "--points", tmp_path / "q.mtx")
    assert json.loads(out)["predictions"] == [0.0, 0.0]


def test_risk_identity_scheme_equals_full(reg_data, tmp_path, capsys):
    (tmp_path / "id.json").write_text(identity_scheme(60).to_json())
    code, out, _ = run(capsys, "risk", "--matrix", reg_data["matrix"], "--targets", reg_data["z"],
                       "--scheme", tmp_path / "id.json", "--lambda", 0.3, "--sigma2", 1.0)
    assert code == 0
    obj = json.loads(out)
    assert obj["sampled"]["total"] == pytest.approx(obj["full"]["total"], rel=1e-12)


def test_risk_matches_library(reg_data, tmp_path, capsys):
    from spectralfs.ingest import read_vector
    from spectralfs.linalg import read_matrix
    x, z = read_matrix(reg_data["matrix"]), read_vector(reg_data["z"])
    s = select_features("bss", x, None, 40)
    (tmp_path / "s.json").write_text(s.to_json())
    code, out, _ = run(capsys, "risk", "--matrix", reg_data["matrix"], "--targets", reg_data["z"],
                       "--scheme", tmp_path / "s.json", "--lambda", 0.5, "--sigma2", 1.0)
    obj = json.loads(out)
    assert obj["full"]["total"] == pytest.approx(risk(kernel(x), z, 0.5, 1.0).total, rel=1e-12)
    assert obj["sampled"]["total"] == pytest.approx(
        risk(sampled_kernel(x, s), z, 0.5, 1.0).total, rel=1e-12)


@pytest.mark.parametrize("lam", ["0", "-0.5"])
def test_risk_nonpositive_lambda(reg_data, capsys, lam):
    code, _, err = run(capsys, "risk", "--matrix", reg_data["matrix"], "--targets", reg_data["z"],
                       "--lambda", lam, "--sigma2", 1.0)
    assert code == 2 and err


def test_risk_monte_carlo(reg_data, capsys):
    code, out, _ = run(capsys, "risk", "--matrix", reg_data["matrix"], "--targets", reg_data["z"],
                       "--lambda", 0.4, "--sigma2", 1.0, "--monte-carlo", 4000, "--seed", 1)
    mc = json.loads(out)["monte_carlo"]
    assert code == 0 and mc["trials"] == 4000 and mc["stderr"] > 0
    assert abs(mc["mean"] - json.loads(out)["full"]["total"]) <= 4 * mc["stderr"]


def test_experiment_malformed_config(tmp_path, capsys):
    (tmp_path / "c.json").write_text("{oops")
    code, out, err = run(capsys, "experiment", "--config", tmp_path / "c.json")
    assert code == 2 and not out and "config error" in err
    (tmp_path / "c.json").write_text(json.dumps({"task": "rlsc", "selectors": ["x"],
                                                 "r_values": [1], "lambdas": [0]}))
    code, _, err = run(capsys, "experiment", "--config", tmp_path / "c.json")
    assert code == 2 and "selectors" in err


def test_experiment_minimal_config_csv(tmp_path, capsys):
    cfg = {"task": "rlsc", "selectors": ["rrqr"], "r_values": [5], "lambdas": [0.1],
           "folds": 3, "repeats": 1, "timing": False,
           "data": {"kind": "synthetic-classification", "n": 12, "d": 20, "k": 4}}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    code, out, _ = run(capsys, "experiment", "--config", tmp_path / "c.json")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 2 and lines[1].startswith("rrqr,5,")
    code, _, err = run(capsys, "experiment", "--config", tmp_path / "c.json", "--format", "json",
                       "--out", tmp_path / "r.json")
    assert code == 0 and len(json.loads((tmp_path / "r.json").read_text())) == 1


def test_console_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "spectralfs.cli", "gen", "--n", "5", "--d", "6",
                           "--k", "2", "--out", str(tmp_path / "g")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "g.mtx").exists()
