"""Command-line interface tests: outputs, determinism, exit codes, atomicity."""

import json

import numpy as np
import pytest

from inertol import cli, modal
from tests.conftest import CASE_STUDY

CFG = str(CASE_STUDY)


def run(*argv):
    return cli.main(list(argv))


class TestAllocate:
    def test_case_study_report(self, tmp_path):
        out = tmp_path / "out"
        assert run("allocate", CFG, "-o", str(out)) == 0
        payload = json.loads((out / "allocation.json").read_text())
        comps = {c["component"]: c for c in payload["components"]}
        assert comps[1]["I_tz_mm"] == pytest.approx(0.0192, rel=5e-3)
        assert comps[1]["I_rx_rad"] == pytest.approx(3.4e-4, rel=0.01)
        assert comps[3]["I_rx_rad"] == pytest.approx(6.8e-4, rel=0.01)
        assert comps[1]["I_ry_rad"] == pytest.approx(8.5e-5, rel=0.01)
        assert comps[3]["ratio_ry"] == pytest.approx(113.9, rel=0.01)

    def test_json_floats_round_trip(self, tmp_path):
        out = tmp_path / "out"
        run("allocate", CFG, "-o", str(out))
        payload = json.loads((out / "allocation.json").read_text())
        from inertol import allocation as al
        from inertol.config import load_mechanism

        tols = al.allocate(load_mechanism(CFG))
        assert payload["components"][0]["I_tz_mm"] == tols.tz[0]  # exact repr round trip


class TestSynthesizeWc:
    def test_outputs(self, tmp_path):
        out = tmp_path / "wc"
        assert run("synthesize-wc", CFG, "-o", str(out)) == 0
        payload = json.loads((out / "worst_case.json").read_text())
        assert payload["t1_mm"] == pytest.approx(0.0229, rel=0.10)
        assert payload["t1_mm"] == 2.0 * payload["t2_mm"]
        for name in ("A", "B", "C", "FR"):
            data = np.loadtxt(out / f"domain_{name}.csv", delimiter=",", skiprows=1)
            assert data.shape[1] == 3


class TestCharacterize:
    @pytest.fixture()
    def field_csv(self, tmp_path):
        mesh = modal.build_mesh(100, 80, 5, 5)
        basis = modal.build_basis(mesh, 6)
        field = 0.01 * basis.modes[:, 0]
        path = tmp_path / "field.csv"
        modal.write_deviation_csv(path, mesh, field)
        return path

    def test_pure_translation_signature(self, tmp_path, field_csv):
        out = tmp_path / "char"
        code = run(
            "characterize",
            "--lx", "100", "--ly", "80", "--nx", "5", "--ny", "5",
            "--modes", "6", "--csv", str(field_csv), "-o", str(out),
        )
        assert code == 0
        payload = json.loads((out / "signatures.json").read_text())
        coeffs = payload["fields"][0]["coefficients_mm"]
        assert coeffs[0] == pytest.approx(0.01, abs=1e-13)
        np.testing.assert_allclose(coeffs[1:], 0.0, atol=1e-13)
        assert payload["fields"][0]["residue_mm"] <= 1e-12
        assert (out / "rho_curves.csv").exists()

    def test_batch_stats(self, tmp_path):
        mesh = modal.build_mesh(100, 80, 5, 5)
        basis = modal.build_basis(mesh, 6)
        rng = np.random.default_rng(2)
        paths = []
        for i in range(5):
            c = np.zeros(6)
            c[:3] = rng.normal(0, [0.01, 0.008, 0.005])
            path = tmp_path / f"f{i}.csv"
            modal.write_deviation_csv(path, mesh, modal.reconstruct(basis, c))
            paths.append(str(path))
        out = tmp_path / "stats"
        code = run(
            "batch-stats",
            "--lx", "100", "--ly", "80", "--nx", "5", "--ny", "5",
            "--modes", "6", "--csv", *paths, "-o", str(out),
        )
        assert code == 0
        payload = json.loads((out / "batch_stats.json").read_text())
        assert payload["samples"] == 5
        assert payload["surface_inertia_mm"] > 0
        assert payload["adjusted_inertia_mm"] >= payload["surface_inertia_mm"] * 0.5
        shape = np.loadtxt(out / "mean_std_shape.csv", delimiter=",", skiprows=1)
        assert shape.shape == (25, 4)


class TestSimulateCommands:
    def test_simulate_report(self, tmp_path):
        out = tmp_path / "sim"
        code = run(
            "simulate", CFG, "--draws", "20000", "--repeats", "3",
            "--seed", "9", "-o", str(out),
        )
        assert code == 0
        payload = json.loads((out / "simulation.json").read_text())
        assert payload["scenario"]["kind"] == "centred-matched"
        assert len(payload["repeat_ncrs_ppm"]) == 3
        assert (out / "ncr_histogram.csv").exists()

    def test_table1_byte_identical(self, tmp_path):
        args = (
            "table1", CFG, "--cpi", "1,1.16", "--draws", "20000",
            "--repeats", "3", "--seed", "42",
        )
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert run(*args, "-o", str(out_a)) == 0
        assert run(*args, "-o", str(out_b)) == 0
        assert (out_a / "table1.json").read_bytes() == (out_b / "table1.json").read_bytes()
        assert (out_a / "table1.csv").read_bytes() == (out_b / "table1.csv").read_bytes()

    def test_compare_wc(self, tmp_path):
        out = tmp_path / "cmp"
        assert run("compare-wc", CFG, "-o", str(out)) == 0
        payload = json.loads((out / "compare_wc.json").read_text())
        assert len(payload["components"]) == 3
        assert payload["components"][0]["reference_ratio"] == 1.63
        cloud = np.loadtxt(
            out / "ellipsoid_inertial_c1.csv", delimiter=",", skiprows=1
        )
        assert cloud.shape == (256, 3)


class TestErrorPaths:
    def test_missing_config_exits_2(self, capsys):
        assert run("allocate", "/nonexistent.cfg") == 2

    def test_schema_error_names_key_and_writes_nothing(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text(CASE_STUDY.read_text().replace("fr_tolerance_mm = 0.2", ""))
        out = tmp_path / "out"
        assert run("allocate", str(bad), "-o", str(out)) == 2
        assert "fr_tolerance_mm" in capsys.readouterr().err
        assert not out.exists()

    def test_numerical_failure_exits_3(self, tmp_path, capsys):
        mesh = modal.build_mesh(10, 10, 2, 5)
        path = tmp_path / "f.csv"
        modal.write_deviation_csv(path, mesh, np.zeros(mesh.node_count))
        code = run(
            "characterize",
            "--lx", "10", "--ly", "10", "--nx", "2", "--ny", "5",
            "--modes", "8", "--csv", str(path), "-o", str(tmp_path / "o"),
        )
        assert code == 3
        assert "mode 6" in capsys.readouterr().err

    def test_no_partial_output_on_late_failure(self, tmp_path):
        # a valid config but an unreadable CSV: nothing must be written
        out = tmp_path / "out"
        code = run(
            "characterize",
            "--lx", "10", "--ly", "10", "--nx", "3", "--ny", "3",
            "--modes", "4", "--csv", str(tmp_path / "missing.csv"),
            "-o", str(out),
        )
        assert code != 0
        assert not out.exists()
