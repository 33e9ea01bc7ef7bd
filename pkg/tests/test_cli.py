import json

import numpy as np
import pytest

import slrcov.cli as cli
from slrcov.cli import main
from slrcov.io import read_matrix_csv, write_matrix_csv


def run_cli(*args):
    return main(list(args))


class TestGen:
    def test_banded_p3_exact_file(self, tmp_path):
        out = tmp_path / "cov.csv"
        assert run_cli("gen", "--model", "banded", "--p", "3", "--out", str(out)) == 0
        expected = np.array([[1.0, 0.9, 0.8], [0.9, 1.0, 0.9], [0.8, 0.9, 1.0]])
        np.testing.assert_array_equal(read_matrix_csv(out), expected)

    def test_block_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            code = run_cli("gen", "--model", "block", "--p", "100", "--k", "5",
                           "--seed", "7", "--out", str(path))
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_k_exceeds_p_is_usage_error(self, tmp_path, capsys):
        code = run_cli("gen", "--model", "block", "--p", "4", "--k", "9",
                       "--out", str(tmp_path / "x.csv"))
        assert code == 1
        assert "k exceeds p" in capsys.readouterr().err

    def test_prints_sparsity_and_rank(self, tmp_path, capsys):
        assert run_cli("gen", "--model", "banded", "--p", "100",
                       "--out", str(tmp_path / "cov.csv")) == 0
        out = capsys.readouterr().out
        assert "sp=0.181" in out
        assert "ar=" in out

    def test_samples_require_n(self, tmp_path, capsys):
        code = run_cli("gen", "--model", "banded", "--p", "5",
                       "--out", str(tmp_path / "c.csv"),
                       "--samples-out", str(tmp_path / "s.csv"))
        assert code == 1
        assert "--n" in capsys.readouterr().err

    def test_samples_written_with_n(self, tmp_path):
        assert run_cli("gen", "--model", "banded", "--p", "5", "--n", "8",
                       "--out", str(tmp_path / "c.csv"),
                       "--samples-out", str(tmp_path / "s.csv")) == 0
        samples = read_matrix_csv(tmp_path / "s.csv")
        assert samples.shape == (8, 5)


class TestFit:
    def test_no_penalty_recovers_psd_input(self, tmp_path):
        rng = np.random.default_rng(0)
        z = rng.standard_normal((20, 6))
        cov = z.T @ z / 20
        src = tmp_path / "cov.csv"
        write_matrix_csv(src, cov)
        out = tmp_path / "est.csv"
        assert run_cli("fit", str(src), "--lambda", "0", "--tau", "0",
                       "--out", str(out)) == 0
        est = read_matrix_csv(out)
        assert np.linalg.norm(est - cov) <= 10 * 5e-4

    def test_matches_oracle_instance(self, tmp_path):
        src = tmp_path / "cov.csv"
        write_matrix_csv(src, np.diag([10.0, 10.0, 0.1]))
        out = tmp_path / "est.csv"
        assert run_cli("fit", str(src), "--lambda", "0.5", "--tau", "0.5",
                       "--out", str(out)) == 0
        est = read_matrix_csv(out)
        assert np.linalg.norm(est - np.diag([9.0, 9.0, 0.0])) <= 1e-3
        record = json.loads((tmp_path / "est.json").read_text())
        assert record["converged"] is True
        assert record["kkt"]["consensus"] <= 1e-2

    def test_max_iter_one_reports_unconverged(self, tmp_path):
        src = tmp_path / "cov.csv"
        write_matrix_csv(src, np.eye(4))
        assert run_cli("fit", str(src), "--lambda", "0.1", "--tau", "0.1",
                       "--max-iter", "1", "--out", str(tmp_path / "e.csv")) == 0
        record = json.loads((tmp_path / "e.json").read_text())
        assert record["converged"] is False
        assert record["iterations"] == 1

    def test_trace_file_written(self, tmp_path):
        src = tmp_path / "cov.csv"
        write_matrix_csv(src, np.eye(3) * 2.0)
        trace = tmp_path / "trace.csv"
        assert run_cli("fit", str(src), "--lambda", "0.1", "--tau", "0.1",
                       "--out", str(tmp_path / "e.csv"), "--trace", str(trace)) == 0
        lines = trace.read_text().strip().splitlines()
        assert lines[0].startswith("iteration,residual_gamma")
        assert len(lines) > 1

    def test_malformed_csv_reports_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,2.0\n3.0,oops\n")
        code = run_cli("fit", str(bad), "--lambda", "0", "--tau", "0",
                       "--out", str(tmp_path / "e.csv"))
        assert code == 1
        assert "line 2" in capsys.readouterr().err

    def test_non_square_rejected(self, tmp_path, capsys):
        bad = tmp_path / "rect.csv"
        bad.write_text("1.0,2.0,3.0\n4.0,5.0,6.0\n")
        code = run_cli("fit", str(bad), "--lambda", "0", "--tau", "0",
                       "--out", str(tmp_path / "e.csv"))
        assert code == 1
        assert "not square" in capsys.readouterr().err

    def test_unwritable_output_is_io_error(self, tmp_path, capsys):
        src = tmp_path / "cov.csv"
        write_matrix_csv(src, np.eye(2))
        code = run_cli("fit", str(src), "--lambda", "0", "--tau", "0",
                       "--out", str(tmp_path / "missing_dir" / "e.csv"))
        assert code == 2
        assert "missing_dir" in capsys.readouterr().err

    def test_missing_penalty_flag_is_usage_error(self, tmp_path, capsys):
        src = tmp_path / "cov.csv"
        write_matrix_csv(src, np.eye(2))
        code = run_cli("fit", str(src), "--tau", "0", "--out", str(tmp_path / "e.csv"))
        assert code == 1
        assert "--lambda" in capsys.readouterr().err


class TestEval:
    def test_metrics_roundtrip(self, tmp_path, capsys):
        truth = np.diag([1.0, 2.0, 0.0])
        estimate = np.diag([1.0, 0.0, 0.0])
        t, e = tmp_path / "t.csv", tmp_path / "e.csv"
        write_matrix_csv(t, truth)
        write_matrix_csv(e, estimate)
        out = tmp_path / "m.csv"
        assert run_cli("eval", str(t), str(e), "--out", str(out)) == 0
        printed = capsys.readouterr().out
        assert "frob_error=2.0" in printed
        header, row = out.read_text().strip().splitlines()
        assert header.split(",")[:8] == [
            "p", "ar_true", "ar_est", "sp_true", "sp_est", "fpr", "tpr", "time_s"
        ]
        values = dict(zip(header.split(","), row.split(",")))
        assert float(values["fpr"]) == pytest.approx(1.0 / 8.0)
        assert float(values["tpr"]) == pytest.approx(1.0)


class TestExperiment:
    def test_single_replication_deterministic(self, tmp_path):
        args = ("experiment", "--model", "block", "--p", "12", "--k", "2",
                "--n", "20", "--lambda", "0.2", "--tau", "0.3", "--reps", "1",
                "--seed", "9")
        outs = []
        for name in ("s1.csv", "s2.csv"):
            out = tmp_path / name
            assert run_cli(*args, "--out", str(out)) == 0
            runs = out.with_name(out.stem + "_runs.csv")
            # wall-time column varies between runs; compare the rest
            outs.append((
                _strip_column(out.read_text(), "time_s"),
                _strip_column(runs.read_text(), "time_s"),
            ))
        assert outs[0] == outs[1]

    def test_summary_is_mean_of_runs_csv(self, tmp_path):
        out = tmp_path / "summary.csv"
        assert run_cli("experiment", "--model", "banded", "--p", "15", "--n", "20",
                       "--lambda", "0.3", "--tau", "0.3", "--reps", "3",
                       "--seed", "1", "--out", str(out)) == 0
        runs_file = out.with_name(out.stem + "_runs.csv")
        header, *rows = runs_file.read_text().strip().splitlines()
        cols = header.split(",")
        per_run = [dict(zip(cols, r.split(","))) for r in rows]
        s_header, s_row = out.read_text().strip().splitlines()
        summary = dict(zip(s_header.split(","), s_row.split(",")))
        for col in ("fpr", "tpr", "frob_error", "sp_est"):
            mean = np.mean([float(r[col]) for r in per_run])
            assert float(summary[col]) == pytest.approx(mean, rel=1e-12)
        assert float(summary["n_runs"]) == 3.0


class TestRate:
    def test_injected_slope(self, tmp_path, capsys):
        out = tmp_path / "rate.csv"
        assert run_cli("rate", "--model", "block", "--p", "10", "--k", "2",
                       "--n-grid", "25,50,100,200", "--lambda", "0.2", "--tau", "0.2",
                       "--reps", "2", "--inject-slope", "-0.5",
                       "--out", str(out)) == 0
        assert "slope=-0.5" in capsys.readouterr().out
        record = json.loads(out.with_suffix(".json").read_text())
        assert record["slope"] == pytest.approx(-0.5, abs=1e-12)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "n,mean_frob_error"
        assert len(lines) == 5

    def test_two_sizes_is_usage_error(self, tmp_path, capsys):
        code = run_cli("rate", "--model", "block", "--p", "10", "--k", "2",
                       "--n-grid", "25,50", "--lambda", "0.2", "--tau", "0.2",
                       "--out", str(tmp_path / "r.csv"))
        assert code == 1
        assert "at least 3" in capsys.readouterr().err


class TestConfigFile:
    def test_config_supplies_defaults_and_flags_override(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"lambda": 0.5, "tau": 0.5, "max-iter": 400}))
        src = tmp_path / "cov.csv"
        write_matrix_csv(src, np.diag([10.0, 10.0, 0.1]))
        out = tmp_path / "est.csv"
        # config-provided lambda/tau solve the oracle instance
        assert run_cli("--config", str(config), "fit", str(src), "--out", str(out)) == 0
        est = read_matrix_csv(out)
        assert np.linalg.norm(est - np.diag([9.0, 9.0, 0.0])) <= 1e-3
        # explicit flag overrides the config value: lambda=0 keeps off-diagonal mass
        out2 = tmp_path / "est2.csv"
        assert run_cli("--config", str(config), "fit", str(src), "--lambda", "11",
                       "--out", str(out2)) == 0
        est2 = read_matrix_csv(out2)
        assert np.abs(est2).max() <= 1e-12  # lambda=11 shrinks everything away

    def test_invalid_config_shape_rejected(self, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps([1, 2, 3]))
        code = run_cli("--config", str(config), "gen", "--model", "banded",
                       "--p", "3", "--out", str(tmp_path / "c.csv"))
        assert code == 1
        assert "JSON object" in capsys.readouterr().err


class TestExitCodes:
    def test_usage_error_from_argparse(self, capsys):
        assert run_cli("gen", "--model", "hexagonal") == 1
        assert "invalid choice" in capsys.readouterr().err

    def test_numerical_failure_maps_to_three(self, monkeypatch, tmp_path, capsys):
        def exploding_handler(args):
            raise FloatingPointError("non-finite ADMM iterate at iteration 3")

        # build_parser resolves _cmd_gen from the module namespace per call
        monkeypatch.setattr(cli, "_cmd_gen", exploding_handler)
        code = run_cli("gen", "--model", "banded", "--p", "3",
                       "--out", str(tmp_path / "c.csv"))
        assert code == 3
        assert "numerical failure" in capsys.readouterr().err


def _strip_column(csv_text: str, column: str) -> str:
    lines = csv_text.strip().splitlines()
    cols = lines[0].split(",")
    idx = cols.index(column)
    kept = []
    for line in lines:
        parts = line.split(",")
        kept.append(",".join(parts[:idx] + parts[idx + 1:]))
    return "\n".join(kept)
