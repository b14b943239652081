"""Command-line front end tests: artifacts, sidecars, exit codes."""

import json
import os

import numpy as np
import pytest

from bergspec.cli import main


def run_cli(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return main(argv)


def test_matrix_artifact_and_sidecar(tmp_path, monkeypatch):
    code = run_cli(["matrix", "--symbol", "z", "--n", "3"], tmp_path, monkeypatch)
    assert code == 0
    doc = json.loads((tmp_path / "matrix.json").read_text())
    assert doc["n"] == 3 and doc["kind"] == "1d"
    assert doc["entries"][3] == [pytest.approx(np.sqrt(0.5)), 0.0]
    assert doc["entries"][7] == [pytest.approx(np.sqrt(2.0 / 3.0)), 0.0]
    meta = json.loads((tmp_path / "matrix.meta.json").read_text())
    assert meta["config"]["subcommand"] == "matrix"
    assert meta["config"]["symbol"] == "z"
    assert meta["config"]["n"] == 3
    assert "version" in meta


def test_matrix_csv_format(tmp_path, monkeypatch):
    code = run_cli(["matrix", "--symbol", "z", "--n", "2", "--format", "csv"],
                   tmp_path, monkeypatch)
    assert code == 0
    lines = (tmp_path / "matrix.csv").read_text().splitlines()
    assert lines[0] == "0+0i,0+0i"
    assert (tmp_path / "matrix.meta.json").exists()


def test_spectrum_artifact(tmp_path, monkeypatch):
    code = run_cli(["spectrum", "--symbol", "z*conj(z)", "--n", "5"],
                   tmp_path, monkeypatch)
    assert code == 0
    doc = json.loads((tmp_path / "spectrum.json").read_text())
    got = sorted(p[0] for p in doc["points"])
    want = [(k + 1.0) / (k + 2.0) for k in range(5)]
    assert np.allclose(got, want, atol=1e-12)


def test_pseudo_artifact_csv(tmp_path, monkeypatch):
    code = run_cli(["pseudo", "--symbol", "z", "--n", "20", "--n-re", "9",
                    "--n-im", "7", "--format", "csv"], tmp_path, monkeypatch)
    assert code == 0
    lines = (tmp_path / "pseudo.csv").read_text().splitlines()
    assert lines[0].split(",")[4:6] == ["9", "7"]
    assert len(lines) == 1 + 7


def test_ess1d_unit_circle(tmp_path, monkeypatch):
    code = run_cli(["ess1d", "--symbol", "z", "--m-theta", "8"],
                   tmp_path, monkeypatch)
    assert code == 0
    doc = json.loads((tmp_path / "ess1d.json").read_text())
    pts = np.array([complex(p, q) for p, q in doc["points"]])
    assert pts.size == 8
    assert np.abs(np.abs(pts) - 1.0).max() <= 1e-12


def test_ess2d_artifact(tmp_path, monkeypatch):
    code = run_cli(["ess2d", "--symbol", "z+w", "--n", "8", "--m", "4",
                    "--m-theta", "32", "--resolution", "21", "--no-refine"],
                   tmp_path, monkeypatch)
    assert code == 0
    doc = json.loads((tmp_path / "ess2d.json").read_text())
    assert len(doc["slices_theta1"]) == 4
    assert doc["params"]["m_effective"] == 4


def test_verify_probe_mode(tmp_path, monkeypatch):
    code = run_cli(["verify", "--symbol", "z", "--probe", "2", "0",
                    "--probe", "0.25", "0", "--n", "24", "--m", "8",
                    "--m-theta", "128", "--resolution", "61", "--n2", "12",
                    "--no-refine"], tmp_path, monkeypatch)
    assert code == 0
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert doc["all_consistent"] is True
    assert len(doc["probes"]) == 2


def test_verify_winding_mode(tmp_path, monkeypatch):
    code = run_cli(["verify", "--symbol", "z^3", "--winding", "0", "0"],
                   tmp_path, monkeypatch)
    assert code == 0
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert doc["winding"] == 3


def test_winding_refusal_exits_3(tmp_path, monkeypatch, capsys):
    code = run_cli(["verify", "--symbol", "z", "--winding", "1", "0"],
                   tmp_path, monkeypatch)
    assert code == 3
    assert "refused" in capsys.readouterr().err


def test_syntax_error_exits_1_with_offset(tmp_path, monkeypatch, capsys):
    code = run_cli(["spectrum", "--symbol", "z+*w"], tmp_path, monkeypatch)
    assert code == 1
    err = capsys.readouterr().err
    assert "offset 2" in err


def test_cap_exceeded_exits_1(tmp_path, monkeypatch):
    code = run_cli(["matrix", "--symbol", "z", "--n", "500"],
                   tmp_path, monkeypatch)
    assert code == 1


def test_unknown_flag_exits_1(tmp_path, monkeypatch):
    with pytest.raises(SystemExit) as exc:
        run_cli(["matrix", "--symbol", "z", "--bogus"], tmp_path, monkeypatch)
    assert exc.value.code == 1


def test_missing_subcommand_exits_1(tmp_path, monkeypatch):
    with pytest.raises(SystemExit) as exc:
        run_cli([], tmp_path, monkeypatch)
    assert exc.value.code == 1


def test_csv_rejected_for_json_only_artifacts(tmp_path, monkeypatch, capsys):
    code = run_cli(["ess1d", "--symbol", "z", "--format", "csv"],
                   tmp_path, monkeypatch)
    assert code == 1
    assert "JSON only" in capsys.readouterr().err


def test_verify_needs_exactly_one_mode(tmp_path, monkeypatch):
    assert run_cli(["verify", "--symbol", "z"], tmp_path, monkeypatch) == 1
    code = run_cli(["verify", "--symbol", "z", "--winding", "0", "0",
                    "--probe", "2", "0"], tmp_path, monkeypatch)
    assert code == 1


def test_numerical_failure_exits_2(tmp_path, monkeypatch):
    import bergspec.spectra as spectra
    from bergspec import SolverError

    def boom(m):
        raise SolverError("synthetic non-convergence")

    monkeypatch.setattr(spectra, "eigenvalues", boom)
    code = run_cli(["spectrum", "--symbol", "z", "--n", "4"],
                   tmp_path, monkeypatch)
    assert code == 2


def test_outdir_env_honored(tmp_path, monkeypatch):
    target = tmp_path / "artifacts"
    monkeypatch.setenv("BERGSPEC_OUTDIR", str(target))
    code = run_cli(["matrix", "--symbol", "z", "--n", "2"],
                   tmp_path, monkeypatch)
    assert code == 0
    assert (target / "matrix.json").exists()


def test_out_flag_overrides(tmp_path, monkeypatch):
    out = tmp_path / "deep" / "m.json"
    code = run_cli(["matrix", "--symbol", "z", "--n", "2", "--out", str(out)],
                   tmp_path, monkeypatch)
    assert code == 0
    assert out.exists()
    assert (tmp_path / "deep" / "m.meta.json").exists()


def test_quadrature_doubling_warns_for_nonpolynomial(tmp_path, monkeypatch, capsys):
    code = run_cli(["matrix", "--symbol", "abs(z)", "--n", "4"],
                   tmp_path, monkeypatch)
    assert code == 0
    assert "doubling" in capsys.readouterr().err
    meta = json.loads((tmp_path / "matrix.meta.json").read_text())
    assert meta["config"]["q_r"] == 128
    assert meta["config"]["q_theta"] == 512
    # explicit quadrature flags suppress the doubling
    run_cli(["matrix", "--symbol", "abs(z)", "--n", "4", "--q-r", "64"],
            tmp_path, monkeypatch)
    assert "doubling" not in capsys.readouterr().err


def test_byte_identical_reruns(tmp_path, monkeypatch):
    argv = ["pseudo", "--symbol", "exp(z)", "--n", "24", "--n-re", "11",
            "--n-im", "11", "--seed", "7"]
    run_cli(argv + ["--out", "a.json"], tmp_path, monkeypatch)
    run_cli(argv + ["--out", "b.json"], tmp_path, monkeypatch)
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert json.loads((tmp_path / "a.meta.json").read_text())["config"]["seed"] == 7


def test_two_variable_sections_use_n2(tmp_path, monkeypatch):
    code = run_cli(["matrix", "--symbol", "z*w", "--n2", "3"],
                   tmp_path, monkeypatch)
    assert code == 0
    doc = json.loads((tmp_path / "matrix.json").read_text())
    assert doc["kind"] == "2d" and doc["n"] == 3
    assert len(doc["entries"]) == 81


def test_threads_flag_sets_environment(tmp_path, monkeypatch):
    monkeypatch.delenv("OMP_NUM_THREADS", raising=False)
    code = run_cli(["matrix", "--symbol", "z", "--n", "2", "--threads", "2"],
                   tmp_path, monkeypatch)
    assert code == 0
    assert os.environ["OMP_NUM_THREADS"] == "2"


def test_selftest_runs_clean(tmp_path, monkeypatch, capsys):
    code = run_cli(["selftest"], tmp_path, monkeypatch)
    assert code == 0
    out = capsys.readouterr().out
    assert "checks passed" in out
    assert "FAIL" not in out
