import json
import subprocess
import sys

import numpy as np
import pytest

from fresneltomo import cli, symplectic, verify
from fresneltomo.errors import NumericalError
from fresneltomo.symplectic import SymplecticParams


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_abcd_free_propagation(capsys):
    code, out, _ = run(capsys, "abcd", "--system", "free(2)")
    assert code == 0
    doc = json.loads(out)
    assert (doc["A"], doc["B"], doc["C"], doc["D"]) == (1.0, 2.0, 0.0, 1.0)
    assert doc["s"] == [1.0, -1.0] and doc["r"] == [0.0, -1.0]


def test_abcd_element_order(capsys):
    code, out, _ = run(capsys, "abcd", "--system", "free(1) lens(1)")
    doc = json.loads(out)
    assert (doc["A"], doc["B"], doc["C"], doc["D"]) == (1.0, 1.0, -1.0, 0.0)


def test_abcd_raw_matrix_flag(capsys):
    code, out, _ = run(capsys, "abcd", "--abcd=-1,0,0,-1")
    assert code == 0
    assert json.loads(out)["s"] == [-1.0, 0.0]


def test_lens_zero_is_config_error(capsys):
    code, _, err = run(capsys, "abcd", "--system", "free(1) lens(0)")
    assert code == 2
    assert "lens(0)" in err and "column 9" in err


def test_non_unimodular_abcd(capsys):
    code, _, err = run(capsys, "abcd", "--abcd", "1,0,0,2")
    assert code == 2 and "determinant" in err


def test_kernel_command(capsys):
    code, out, _ = run(capsys, "kernel", "--system", "free(1)")
    doc = json.loads(out)
    assert doc["value"] == pytest.approx([0.0, -1 / (2 * np.pi)])


def test_kernel_singular_exit_code(capsys):
    code, _, err = run(capsys, "kernel", "--abcd", "1,0,0,1")
    assert code == 3


def test_tomogram_vacuum(tmp_path, capsys):
    code, out, _ = run(capsys, "tomogram", "--state", "vacuum", "--system", "free(1)", "--samples", "32",
                       "--half-extent", "8", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["max"] == pytest.approx(0.5, abs=1e-12)
    assert doc["normalization_residual"] < 1e-3
    assert (tmp_path / "tomogram.json").exists() and (tmp_path / "tomogram.csv").exists()


def test_missing_state_is_config_error(tmp_path, capsys):
    code, _, err = run(capsys, "tomogram", "--system", "free(1)", "--out", str(tmp_path))
    assert code == 2 and "state is required" in err


def test_all_violations_reported(tmp_path, capsys):
    code, _, err = run(capsys, "tomogram", "--samples", "7", "--out", str(tmp_path))
    assert code == 2
    assert "state is required" in err and "optical system is required" in err and "samples" in err


def test_degenerate_matrix_exit_code(tmp_path, capsys):
    code, _, err = run(capsys, "tomogram", "--state", "vacuum", "--abcd", "1e7,1e-8,0,1e-7", "--out", str(tmp_path))
    assert code == 3


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"state": "vacuum", "system": "free(1)", "samples": 16, "half-extent": 8.0,
                               "representation": "xi"}))
    code, out, _ = run(capsys, "tomogram", "--config", str(cfg), "--representation", "eta", "--out", str(tmp_path))
    assert code == 0
    meta = json.loads((tmp_path / "tomogram.json").read_text())
    assert meta["representation"] == "eta"
    assert meta["grid"]["samples_per_axis"] == 16


def test_missing_config_file(capsys):
    code, _, err = run(capsys, "abcd", "--config", "/nonexistent/cfg.json")
    assert code == 2


@pytest.fixture(scope="module")
def vacuum_family(tmp_path_factory):
    out = tmp_path_factory.mktemp("family")
    code = cli.main(["tomogram", "--state", "vacuum", "--family", "60", "--samples", "64", "--half-extent", "5",
                     "--format", "bin", "--output-samples", "16", "--out", str(out)])
    assert code == 0
    return out


def test_reconstruct_from_manifest(vacuum_family, tmp_path, capsys):
    code, out, _ = run(capsys, "reconstruct", "--manifest", str(vacuum_family / "manifest.json"), "--out", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["n_angles"] == 60
    assert doc["l2_error"] < 0.05
    assert (tmp_path / "reconstruction.json").exists() and (tmp_path / "report.json").exists()


def test_reconstruct_rejects_too_few_angles(vacuum_family, tmp_path, capsys):
    doc = json.loads((vacuum_family / "manifest.json").read_text())
    doc["params"]["n_angles"] = 8
    doc["tomograms"] = [str(vacuum_family / p) for p in doc["tomograms"][:64]]
    (tmp_path / "m.json").write_text(json.dumps(doc))
    code, _, err = run(capsys, "reconstruct", "--manifest", str(tmp_path / "m.json"), "--out", str(tmp_path))
    assert code == 2 and "16" in err


def test_reconstruct_names_mismatched_file(vacuum_family, tmp_path, capsys):
    doc = json.loads((vacuum_family / "manifest.json").read_text())
    doc["tomograms"] = [str(vacuum_family / p) for p in doc["tomograms"]]
    odd = tmp_path / "odd"
    assert cli.main(["tomogram", "--state", "vacuum", "--system", "free(1)", "--samples", "32",
                     "--out", str(odd)]) == 0
    capsys.readouterr()
    meta = json.loads((odd / "tomogram.json").read_text())
    src = json.loads((vacuum_family / "tomogram_000_003.json").read_text())
    meta["pair1"], meta["pair2"] = src["pair1"], src["pair2"]
    (odd / "tomogram.json").write_text(json.dumps(meta))
    doc["tomograms"][3] = str(odd / "tomogram.json")
    (tmp_path / "m.json").write_text(json.dumps(doc))
    code, _, err = run(capsys, "reconstruct", "--manifest", str(tmp_path / "m.json"), "--out", str(tmp_path))
    assert code == 2
    assert str(odd / "tomogram") in err


def test_reconstruct_missing_manifest(tmp_path, capsys):
    code, _, err = run(capsys, "reconstruct", "--manifest", str(tmp_path / "none.json"))
    assert code == 2


def test_wigner_point(capsys):
    code, out, _ = run(capsys, "wigner", "--state", "vacuum", "--point", "0,0,0,0")
    assert code == 0
    assert json.loads(out)["W"] == pytest.approx(1 / np.pi ** 2)


def test_wigner_grid_export(tmp_path, capsys):
    code, out, _ = run(capsys, "wigner", "--state", '{"kind": "coherent", "z1": [0.3, 0], "z2": [0, -0.2]}',
                       "--output-samples", "8", "--output-half-extent", "4", "--format", "bin", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "wigner.bin").stat().st_size == 8 ** 4 * 8


def test_unknown_state_kind(capsys):
    code, _, err = run(capsys, "wigner", "--state", "thermal", "--point", "0,0,0,0")
    assert code == 2 and "unknown state kind" in err


def test_fresnel_field(tmp_path, capsys):
    code, out, _ = run(capsys, "fresnel-field", "--system", "free(1)", "--samples", "64", "--half-extent", "8",
                       "--out", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["output_energy"] == pytest.approx(doc["input_energy"], rel=1e-3)
    assert (tmp_path / "field.csv").exists()


def test_verify_parser_group(capsys):
    code, out, _ = run(capsys, "verify", "--groups", "parser")
    assert code == 0
    assert out.splitlines()[0].startswith("PASS")


def test_verify_detects_sign_mutation(monkeypatch, capsys):
    real = symplectic.ray_to_sr

    def flipped(m, tol=1e-12):
        p = real(m, tol)
        return SymplecticParams(p.s, -p.r)

    monkeypatch.setattr(symplectic, "ray_to_sr", flipped)
    code, out, _ = run(capsys, "verify", "--groups", "symplectic,kernels")
    assert code == 1
    assert "FAIL" in out


def test_verify_numeric_failure_exit_code(monkeypatch, capsys):
    def broken():
        raise NumericalError("quadrature did not converge")

    monkeypatch.setitem(verify.GROUPS, "parser", broken)
    code, _, err = run(capsys, "verify", "--groups", "parser")
    assert code == 4 and "converge" in err


def test_verify_unknown_group(capsys):
    code, _, err = run(capsys, "verify", "--groups", "nope")
    assert code == 2


def test_console_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "fresneltomo.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "element :=" in res.stdout and "Exit codes" in res.stdout
