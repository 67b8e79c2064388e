import json
import os

import numpy as np
import pytest

from greenspec.cli import main
from greenspec.spectrum import load_json


def write_config(path, **overrides):
    data = {
        "model": {"u": 4.0, "v": 0.745},
        "signal": {"evolver": "exact", "t_max": 0.27, "n": 24, "seed": 0},
        "method": {"anm": {"tau": "path"}, "dft": {}},
    }
    for key, value in overrides.items():
        data[key] = value
    path.write_text(json.dumps(data))
    return str(path)


class TestOracleCommand:
    def test_prints_pole_table(self, capsys):
        assert main(["oracle"]) == 0
        out = capsys.readouterr().out
        assert "0.524590" in out
        assert "0.547457" in out
        assert "0.475410" in out
        assert "3.041470" in out


class TestSimulateCommand:
    def test_writes_signal_and_metadata(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out_dir = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out_dir), "--quiet"]) == 0
        sig = load_json(out_dir / "signal.json")
        assert sig["n"] == 24
        assert len(sig["samples"]) == 24
        # first sample of the one-sided assembly is exactly one
        assert sig["samples"][0][0] == pytest.approx(1.0, abs=1e-12)
        meta = load_json(out_dir / "signal_meta.json")
        assert meta["model"] == {"u": 4.0, "v": 0.745}
        assert meta["evolver"] == "exact"

    def test_bad_config_is_usage_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"signal": {"evolver": "magic", "t_max": 1.0}}))
        assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 1

    def test_missing_config_is_io_error(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2


class TestReconstructCommand:
    def test_end_to_end_outputs(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out_dir = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out_dir), "--quiet"]) == 0
        code = main(
            [
                "reconstruct",
                str(out_dir / "signal.json"),
                "--config",
                cfg,
                "--out",
                str(out_dir),
                "--method",
                "both",
                "--quiet",
            ]
        )
        assert code == 0
        spec_anm = load_json(out_dir / "spectrum_anm.json")
        assert {"re", "im", "freq", "z"} == set(spec_anm[0])
        report = load_json(out_dir / "report_anm.json")
        assert report["epsilon"] < 1e-3
        report_dft = load_json(out_dir / "report_dft.json")
        assert report_dft["epsilon"] > 0.05
        dual = (out_dir / "dual_polynomial.csv").read_text().splitlines()
        assert dual[0] == "f,q"
        qvals = np.array([float(r.split(",")[1]) for r in dual[1:]])
        assert qvals.max() <= 1.001

    def test_missing_signal_is_io_error(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        assert (
            main(["reconstruct", str(tmp_path / "missing.json"), "--config", cfg, "--quiet"]) == 2
        )

    def test_solver_diagnostics_in_report(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out_dir = tmp_path / "out"
        main(["simulate", "--config", cfg, "--out", str(out_dir), "--quiet"])
        main(
            ["reconstruct", str(out_dir / "signal.json"), "--config", cfg,
             "--out", str(out_dir), "--method", "anm", "--quiet"]
        )
        report = load_json(out_dir / "report_anm.json")
        assert {"iterations", "primal_residual", "dual_residual", "objective", "converged"} <= set(
            report["solver"]
        )

    def test_retarded_convention_round_trip(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out_dir = tmp_path / "ret"
        assert (
            main(
                ["simulate", "--config", cfg, "--out", str(out_dir), "--convention",
                 "retarded", "--quiet"]
            )
            == 0
        )
        sig = load_json(out_dir / "signal.json")
        # the prefactor turns the t = 0 value 1 into -i
        assert sig["samples"][0] == pytest.approx([0.0, -1.0])
        code = main(
            ["reconstruct", str(out_dir / "signal.json"), "--config", cfg,
             "--out", str(out_dir), "--method", "anm", "--convention", "retarded", "--quiet"]
        )
        assert code == 0
        assert load_json(out_dir / "report_anm.json")["epsilon"] < 1e-3

    def test_usage_error_on_bad_flags(self):
        assert main(["reconstruct"]) == 1
        assert main(["frobnicate"]) == 1


class TestSweepCommand:
    def test_csv_deterministic(self, tmp_path):
        cfg = write_config(
            tmp_path / "cfg.json",
            signal={"evolver": "trotter2", "t_max": 0.4, "n": 10, "shots": 2000, "seed": 0},
            method={
                "anm": {"tau": "ladder", "primal_tol": 3e-6, "dual_tol": 3e-6, "max_iters": 4000},
                "dft": {},
            },
        )
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        args = ["sweep", "--config", cfg, "--t-max", "0.3,0.4", "--seeds", "0,1", "--quiet"]
        assert main(args + ["--out", str(out_a)]) == 0
        assert main(args + ["--out", str(out_b), "--workers", "3"]) == 0
        csv_a = (out_a / "sweep.csv").read_bytes()
        csv_b = (out_b / "sweep.csv").read_bytes()
        assert csv_a == csv_b
        header = csv_a.decode().splitlines()[0]
        assert header == "t_max,method,variant,n,seed,epsilon"
        meta = load_json(out_a / "sweep_meta.json")
        assert meta["theory_threshold_t_max"] == pytest.approx(6.3, abs=0.2)

    def test_variant_flag(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out = tmp_path / "v"
        code = main(
            [
                "sweep",
                "--config",
                cfg,
                "--t-max",
                "0.27",
                "--seeds",
                "0",
                "--method",
                "dft",
                "--variant",
                "exact_noiseless",
                "--variant",
                "trotter2_noiseless",
                "--out",
                str(out),
                "--quiet",
            ]
        )
        assert code == 0
        rows = (out / "sweep.csv").read_text().splitlines()
        variants = {r.split(",")[2] for r in rows[1:]}
        assert variants == {"exact_noiseless", "trotter2_noiseless"}
