import subprocess
import sys

import numpy as np
import pytest

from miht.cli import main


def run_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "miht.cli", *args],
                          capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


class TestRecoverCommand:
    def test_planted_run_reports_success(self, capsys):
        rc = main(["recover", "--n1", "12", "--n2", "12", "--rank", "1",
                   "--m", "120", "--seed", "7"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "success: True" in out
        assert "stop_reason:" in out and "iterations:" in out

    def test_trace_and_matrix_outputs(self, tmp_path, capsys):
        trace = tmp_path / "trace.csv"
        xout = tmp_path / "x.csv"
        rc = main(["recover", "--n1", "8", "--n2", "8", "--rank", "1", "--m", "80",
                   "--seed", "3", "--trace-out", str(trace), "--x-out", str(xout)])
        assert rc == 0
        assert trace.read_text().splitlines()[0] == "iter,l1_residual,stepsize,frob_error"
        X = np.loadtxt(xout, delimiter=",")
        assert X.shape == (8, 8)

    def test_map_round_trip_through_files(self, tmp_path, capsys):
        map_path = tmp_path / "map.txt"
        rc = main(["recover", "--n1", "6", "--n2", "6", "--rank", "1", "--m", "60",
                   "--seed", "9", "--map-out", str(map_path)])
        assert rc == 0
        first = capsys.readouterr().out
        rc = main(["recover", "--map-in", str(map_path), "--rank", "1", "--seed", "9"])
        assert rc == 0
        second = capsys.readouterr().out
        assert first.splitlines()[:3] == second.splitlines()[:3]

    def test_missing_dimensions_fail_with_diagnostic(self, capsys):
        rc = main(["recover", "--rank", "1", "--seed", "1"])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_theorem_params_mode(self, capsys):
        rc = main(["recover", "--n1", "10", "--n2", "10", "--rank", "1",
                   "--m", "200", "--seed", "4", "--theorem-params"])
        assert rc == 0
        assert "success: True" in capsys.readouterr().out


class TestExperimentCommands:
    def test_st_grid_writes_replayable_csv(self, tmp_path):
        args = ["st-grid", "--n1", "8", "--n2", "8", "--rank", "1", "--m", "64",
                "--s-values", "1", "--t-values", "ALL", "--trials", "2", "--seed", "5"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        assert out1.read_text().startswith("# ")

    def test_phase_and_algorithms_flag(self, tmp_path):
        out = tmp_path / "phase.csv"
        rc = main(["phase", "--n1", "6", "--n2", "6", "--rank", "1",
                   "--m-values", "12,48", "--algorithms", "miht_default,niht",
                   "--trials", "2", "--seed", "4", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "algorithm,m,success_count,trials"
        assert len(lines) == 2 + 4  # comment + header + 2 algs x 2 m values

    def test_robustness_command(self, tmp_path):
        out = tmp_path / "rob.csv"
        rc = main(["robustness", "--n1", "6", "--n2", "6", "--rank", "1", "--m", "48",
                   "--noise-l1-values", "0.0,0.05", "--trials", "2", "--seed", "8",
                   "--out", str(out)])
        assert rc == 0
        assert out.read_text().splitlines()[1] == \
            "algorithm,l1_noise,frob_error_median,frob_error_max"

    def test_timing_command(self, tmp_path):
        out = tmp_path / "timing.csv"
        rc = main(["timing", "--rank", "1", "--n-values", "6,8", "--trials", "5",
                   "--seed", "2", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "algorithm,N,median_wall_time_seconds,median_iterations"
        assert len(lines) == 2 + 2

    def test_rrip_curve_command(self, tmp_path):
        out = tmp_path / "rrip.csv"
        rc = main(["rrip-curve", "--dist", "laplace", "--n", "6", "--rank", "1",
                   "--m-values", "12,24", "--trials", "2", "--n-samples", "64",
                   "--seed", "6", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "m,trial,alpha_hat,beta_hat,gamma_hat"
        assert len(lines) == 2 + 4

    def test_missing_required_grid_fails(self, capsys):
        rc = main(["phase", "--n1", "6", "--n2", "6", "--seed", "1"])
        assert rc == 2
        assert "m-values" in capsys.readouterr().err

    def test_seed_required_for_experiments(self, capsys):
        rc = main(["st-grid", "--n1", "6", "--n2", "6", "--m", "24",
                   "--s-values", "1", "--t-values", "ALL"])
        assert rc == 2
        assert "seed" in capsys.readouterr().err


class TestConfigFile:
    def test_config_supplies_defaults_and_flags_override(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("n1=8\nn2=8\nrank=1\nm=64\ns_values=1\nt_values=ALL\n"
                       "trials=2\nseed=5\n")
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        assert main(["st-grid", "--config", str(cfg), "--out", str(out1)]) == 0
        # explicit flag overrides the config's seed
        assert main(["st-grid", "--config", str(cfg), "--seed", "6", "--out", str(out2)]) == 0
        meta1 = out1.read_text().splitlines()[0]
        meta2 = out2.read_text().splitlines()[0]
        assert "seed=5" in meta1
        assert "seed=6" in meta2

    def test_malformed_config_line_fails(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("n1 8\n")
        rc = main(["st-grid", "--config", str(cfg)])
        assert rc == 2
        assert "malformed" in capsys.readouterr().err


def test_console_entry_point_runs():
    rc, out, err = run_cli("recover", "--n1", "6", "--n2", "6", "--rank", "1",
                           "--m", "60", "--seed", "1")
    assert rc == 0, err
    assert "stop_reason:" in out
