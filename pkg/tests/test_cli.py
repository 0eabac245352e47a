import json
import subprocess
import sys

import numpy as np
import pytest

from specdyn import cli, verify


def run(argv, capsys):
    status = cli.main(argv)
    out, err = capsys.readouterr()
    return status, out, err


def error_record(err):
    lines = err.strip().splitlines()
    assert lines[0].startswith("specdyn: ")
    return json.loads(lines[-1])["error"]


def test_spectrum_two_level_sector(capsys):
    status, out, _ = run(["spectrum", "--n", "2", "--omega1", "1", "--omega0", "2", "--g-re", "1",
                          "--kappa", "0", "--s", "1"], capsys)
    assert status == 0
    data = json.loads(out)
    np.testing.assert_allclose(data["eigenvalues"], [2 - np.sqrt(2), 2 + np.sqrt(2)], atol=1e-12)
    assert data["sector"]["l0"] == [-1, 3]


def test_spectrum_forms_cross_check(capsys):
    vals = {}
    for form in ("linear", "fock", "quasispin"):
        _, out, _ = run(["spectrum", "--n", "3", "--omega0", "2.2", "--g-im", "0.4", "--kappa", "1",
                         "--s", "4", "--form", form], capsys)
        vals[form] = np.array(json.loads(out)["eigenvalues"])
    np.testing.assert_allclose(vals["fock"], vals["linear"], atol=1e-9)
    np.testing.assert_allclose(vals["quasispin"], vals["linear"], atol=1e-9)


def test_spectrum_sweep_and_csv(capsys):
    status, out, _ = run(["spectrum", "--n-max", "4"], capsys)
    assert status == 0
    data = json.loads(out)
    labels = [(s["sector"]["kappa"], s["sector"]["s"]) for s in data["spectra"]]
    assert (0, 1) in labels and (0, 4) not in labels
    status, out, _ = run(["spectrum", "--kappa", "0", "--s", "2", "--format", "csv"], capsys)
    assert status == 0
    assert out.splitlines()[0] == "kappa,s,level_index,energy"
    assert len(out.splitlines()) == 4


def test_sectors_bookkeeping(capsys):
    status, out, _ = run(["sectors", "--n", "2", "--n-max", "6"], capsys)
    assert status == 0
    data = json.loads(out)
    assert data["fitted_total"] == data["fock_dim"] == 28


def test_variational_selects_ground_state(capsys):
    status, out, _ = run(["variational", "--kappa", "0", "--s", "1"], capsys)
    assert status == 0
    data = json.loads(out)
    assert data["energy"] == pytest.approx(data["exact_eigenvalues"][0], abs=1e-9)
    assert data["variance"] <= 1e-9
    assert len(data["candidates"]) >= 1


def test_evolve_sector_json(capsys):
    status, out, _ = run(["evolve", "--kappa", "1", "--s", "3", "--t-max", "5", "--steps", "11"], capsys)
    assert status == 0
    data = json.loads(out)
    assert data["norm_drift"] <= 1e-9
    assert len(data["expectations"]["t"]) == 11
    assert len(data["expectations"]["Y+"][0]) == 2


def test_evolve_state_file_reports_population_drift(capsys, tmp_path):
    from specdyn import fock
    b = fock.build_basis(2, 6)
    psi = fock.normalize(b.basis_vector([1, 0]) + b.basis_vector([0, 3]))
    path = tmp_path / "psi.json"
    path.write_text(json.dumps(fock.state_to_json(b, psi)))
    status, out, _ = run(["evolve", "--state", str(path), "--t-max", "20", "--steps", "41"], capsys)
    assert status == 0
    data = json.loads(out)
    assert data["population_drift"] <= 1e-10


def test_evolve_csv_splits_complex_columns(capsys):
    status, out, _ = run(["evolve", "--kappa", "0", "--s", "2", "--steps", "3", "--format", "csv"], capsys)
    assert status == 0
    header = out.splitlines()[0].split(",")
    assert header[0] == "t" and "Y+_re" in header and "Y+_im" in header and "Y0" in header


def test_flow_short_run(capsys):
    status, out, _ = run(["flow", "--kappa", "0", "--s", "8", "--t-max", "1", "--dt", "0.001",
                          "--p0", "1.0"], capsys)
    assert status == 0
    data = json.loads(out)
    assert data["relative_drift"] <= 1e-6
    assert len(data["t"]) == 1001
    assert data["orientation"] == "literal"


def test_flow_orientation_reverses_the_path(capsys):
    base = ["flow", "--kappa", "0", "--s", "6", "--t-max", "0.5", "--dt", "0.001", "--q0", "0.7", "--p0", "1.0"]
    _, a, _ = run(base, capsys)
    _, b, _ = run(base + ["--orientation", "schrodinger"], capsys)
    pa, pb = json.loads(a)["p"], json.loads(b)["p"]
    assert pa[0] == pb[0] and abs(pa[-1] - pb[-1]) > 1e-3


def test_polarization_tmsv_then_classify(capsys, tmp_path):
    path = tmp_path / "tmsv.json"
    status, _, _ = run(["polarization", "tmsv", "--beta-re", "0.5", "--out", str(path)], capsys)
    assert status == 0
    status, out, _ = run(["polarization", "classify", "--state", str(path), "--order", "6", "--seed", "7"],
                         capsys)
    assert status == 0
    data = json.loads(out)
    assert data["verdict"] == "P0-scalar"
    assert data["seed"] == 7


def test_polarization_classify_density_matrix(capsys, tmp_path):
    from specdyn import fock
    b = fock.build_basis(2, 2)
    a, c = b.basis_vector([1, 0]), b.basis_vector([0, 1])
    rho = 0.5 * (np.outer(a, a) + np.outer(c, c))
    path = tmp_path / "rho.json"
    path.write_text(json.dumps(fock.state_to_json(b, None, rho)))
    status, out, _ = run(["polarization", "classify", "--state", str(path)], capsys)
    assert status == 0
    assert json.loads(out)["verdict"] == "strong-UL-invariance"


def test_verify_algebra_suite_passes(capsys, tmp_path):
    path = tmp_path / "report.json"
    status, out, _ = run(["verify", "--suite", "algebra", "--out", str(path)], capsys)
    assert status == 0
    report = json.loads(path.read_text())
    assert report["suite"] == "algebra" and report["seed"] == 0
    assert all(c["passed"] for c in report["checks"])
    assert "PASS" in out


def test_verify_reports_failures(capsys, monkeypatch):
    bad = [verify.Check("algebra", "forced", 1.0, 0.5)]
    monkeypatch.setattr(verify, "run_suite", lambda name, seed=0: bad)
    status, out, err = run(["verify", "--suite", "algebra"], capsys)
    assert status == 1
    rec = error_record(err)
    assert rec["kind"] == "check" and rec["failed"] == ["forced"]
    assert "FAIL" in out


@pytest.mark.parametrize("argv", [
    ["spectrum", "--kappa", "5", "--s", "1"],
    ["spectrum", "--kappa", "0", "--s", "-1"],
    ["spectrum"],
    ["spectrum", "--kappa", "0", "--s", "1", "--n-max", "4"],
    ["spectrum", "--n", "1", "--kappa", "0", "--s", "1"],
    ["variational", "--kappa", "0", "--s", "2", "--v", "3"],
    ["flow", "--kappa", "0", "--s", "0"],
    ["flow", "--kappa", "0", "--s", "4", "--p0", "100"],
    ["flow", "--kappa", "0", "--s", "4", "--orientation", "up"],
    ["polarization", "classify"],
    ["polarization", "classify", "--state", "/nonexistent/state.json"],
    ["verify", "--suite", "nope"],
    ["verify", "--format", "csv"],
    ["bogus"],
])
def test_usage_errors_exit_2(capsys, argv):
    status, _, err = run(argv, capsys)
    assert status == 2
    rec = error_record(err)
    assert rec["kind"] == "usage" and rec["status"] == 2


def test_config_merge_flags_win(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 2, "omega0": 2.0, "kappa": 0, "s": 3, "g_re": 0.0}))
    status, out, _ = run(["spectrum", "--config", str(cfg)], capsys)
    assert status == 0
    # free field: omega0 N0 + omega1 N1 on (N0, N1) = (3,0), (2,2), (1,4), (0,6)
    np.testing.assert_allclose(json.loads(out)["eigenvalues"], [6, 6, 6, 6])
    status, out, _ = run(["spectrum", "--config", str(cfg), "--s", "1"], capsys)
    assert len(json.loads(out)["eigenvalues"]) == 2


def test_config_unknown_key_is_usage_error(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kappa": 0, "s": 1, "frobnicate": True}))
    status, _, err = run(["spectrum", "--config", str(cfg)], capsys)
    assert status == 2
    assert "frobnicate" in error_record(err)["message"]


def test_config_bad_json_is_usage_error(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    status, _, _ = run(["spectrum", "--config", str(cfg)], capsys)
    assert status == 2


def test_output_is_deterministic(capsys):
    argv = ["variational", "--kappa", "1", "--s", "6", "--omega0", "1.4", "--g-re", "0.3", "--g-im", "0.2"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "specdyn.cli", "sectors", "--n-max", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["fitted_total"] == 6
    proc = subprocess.run([sys.executable, "-m", "specdyn.cli", "sectors"], capture_output=True, text=True,
                          check=False)
    assert proc.returncode == 2
