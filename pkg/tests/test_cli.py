"""Tests for the command-line entry point."""

from pathlib import Path

import pytest

from src.pipeline.run import EXIT_BAD_CONFIG, EXIT_OK, main

REFERENCE = str(Path(__file__).resolve().parent.parent / "configs" / "reference.ini")

# Keeps CLI runs short; every command under test accepts these
FAST = ["--duration", "0.05", "--workers", "1"]


class TestValidate:
    """Tests for the validate command."""

    def test_reference_is_valid(self, capsys):
        assert main(["validate", REFERENCE]) == EXIT_OK
        assert "OK" in capsys.readouterr().out

    def test_invalid_scenario_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.ini"
        bad.write_text(Path(REFERENCE).read_text().replace("num_ues = 6", "num_ues = 0"))
        assert main(["validate", str(bad)]) == EXIT_BAD_CONFIG
        assert "num_ues" in capsys.readouterr().out

    def test_unknown_key_exit_code(self, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text("[scenario]\nnum_uez = 3\n")
        assert main(["validate", str(bad)]) == EXIT_BAD_CONFIG


class TestRunCommands:
    """Tests for run, compare and the sweeps."""

    def test_run_single(self, tmp_path):
        code = main(["run", REFERENCE, "--seed", "4", "--out", str(tmp_path), *FAST])
        assert code == EXIT_OK
        assert (tmp_path / "qos-pf" / "4" / "flows.csv").exists()
        assert (tmp_path / "aggregate.csv").exists()

    def test_run_with_decision_log_and_traces(self, tmp_path):
        log = tmp_path / "decisions.csv"
        code = main([
            "run", REFERENCE, "--scheduler", "max-ci", "--out", str(tmp_path),
            "--decision-log", str(log), "--traces", *FAST,
        ])
        assert code == EXIT_OK
        assert log.read_text().startswith("tti,scheduler,flow_id,metric,prbs,bytes")
        assert (tmp_path / "max-ci" / "1" / "channel.csv").exists()
        assert (tmp_path / "max-ci" / "1" / "arrivals.csv").exists()

    def test_unknown_scheduler_exit_code(self, tmp_path):
        code = main(["run", REFERENCE, "--scheduler", "fifo", "--out", str(tmp_path), *FAST])
        assert code == EXIT_BAD_CONFIG

    def test_trace_options_need_single_run(self, tmp_path):
        code = main(["run", REFERENCE, "--runs", "2", "--traces", "--out", str(tmp_path), *FAST])
        assert code == EXIT_BAD_CONFIG

    def test_compare_then_report_and_plot(self, tmp_path, capsys):
        code = main([
            "compare", REFERENCE, "--schedulers", "qos-pf,max-ci",
            "--runs", "2", "--out", str(tmp_path), *FAST,
        ])
        assert code == EXIT_OK
        assert (tmp_path / "max-ci" / "2" / "flows.csv").exists()
        capsys.readouterr()

        assert main(["report", str(tmp_path)]) == EXIT_OK
        assert "aggregate.csv" in capsys.readouterr().out

        assert main(["plot", str(tmp_path)]) == EXIT_OK
        assert (tmp_path / "figures" / "fairness.html").exists()

    def test_sweep_weights(self, tmp_path):
        code = main(["sweep-weights", REFERENCE, "--runs", "1", "--out", str(tmp_path), *FAST])
        assert code == EXIT_OK
        assert (tmp_path / "sensitivity.csv").exists()

    def test_sweep_scale(self, tmp_path, capsys):
        code = main([
            "sweep-scale", REFERENCE, "--ues", "1,2", "--schedulers", "qos-pf",
            "--runs", "1", "--out", str(tmp_path), *FAST,
        ])
        assert code == EXIT_OK
        assert (tmp_path / "scalability.csv").exists()
        assert "growth exponent" in capsys.readouterr().out

    def test_report_on_empty_directory(self, tmp_path):
        assert main(["report", str(tmp_path)]) == EXIT_BAD_CONFIG


class TestParser:
    """Tests for argument parsing."""

    def test_command_required(self):
        with pytest.raises(SystemExit):
            main([])
