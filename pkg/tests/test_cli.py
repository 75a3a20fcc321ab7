# tests/test_cli.py
"""
End-to-end runs of the command line with exit-code checks.
"""

import json

import pytest

from main import main
from src.config.run_config import SEED_ENV
from src.services import flow_command
from src.utils.errors import BallExitError
from src.utils.logging import set_log_level, stage, status_icon
from src.verification.instances import standard_params


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)


@pytest.fixture
def run(tmp_path):
    """Write a config under tmp_path and run one subcommand against it."""

    def invoke(command, data=None, *flags):
        config = {"params": standard_params().to_dict(), "output": {"directory": str(tmp_path / "out")}}
        config.update(data or {})
        path = tmp_path / "run.json"
        path.write_text(json.dumps(config), encoding="utf-8")
        return main([command, "--config", str(path), "--log-level", "ERROR", *flags])

    return invoke


class TestExitCodes:
    """0 ok, 1 certificate failure, 2 config, 3 solver, 4 ball exit."""

    def test_quadratic(self, run, tmp_path):
        assert run("quadratic", {"solver": {"horizon": 200}}) == 0
        report = json.loads((tmp_path / "out" / "quadratic_certificates.json").read_text(encoding="utf-8"))
        assert report["result"]["passed"] is True
        assert (tmp_path / "out" / "quadratic_trajectory.csv").exists()

    def test_invalid_omega(self, run):
        assert run("quadratic", None, "--omega", "-2") == 2

    def test_unknown_config_key(self, run):
        assert run("quadratic", {"colour": "blue"}) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["quadratic", "--config", str(tmp_path / "absent.json"), "--log-level", "ERROR"]) == 2

    def test_gate(self, run):
        assert run("quadratic", {"solver": {"horizon": 200}}, "--g0", "0.2") == 3

    def test_verify_single_check(self, run, tmp_path):
        assert run("verify", None, "--check", "forward_residual") == 0
        assert (tmp_path / "out" / "verify_summary.csv").exists()

    def test_verify_unknown_check(self, run):
        assert run("verify", None, "--check", "no_such_check") == 2

    def test_empty_sweep_grid(self, run):
        assert run("sweep", {"sweep": {"grid": []}}) == 2

    def test_flow_on_the_full_horizon(self, run, tmp_path):
        assert run("flow", {"solver": {"horizon": 200}}) == 0
        report = json.loads((tmp_path / "out" / "flow_result.json").read_text(encoding="utf-8"))
        assert report["result"]["passed"] is True
        assert report["result"]["A3"]["passed"] is True

    def test_flow_ball_exit(self, run, monkeypatch):
        def leave_ball(*args, **kwargs):
            raise BallExitError(0.5, 3, "g", 0.75)

        monkeypatch.setattr(flow_command, "integrate_homotopy", leave_ball)
        assert run("flow", {"solver": {"horizon": 50}}) == 4

    def test_g0_sweep_through_the_gate(self, run, tmp_path):
        assert run("sweep", {"sweep": {"grid": [0.1, 0.05, 0.025]}}) == 0
        summary = json.loads((tmp_path / "out" / "sweep_summary.json").read_text(encoding="utf-8"))
        assert summary["result"]["success_fraction"] == 1.0
        assert summary["result"]["points"][0]["stencil"] == "backward"

    def test_m_sweep(self, run, tmp_path):
        data = {"sweep": {"parameter": "m", "family": "constant", "grid": [0.0, 1.0]}, "solver": {"horizon": 50}}
        assert run("sweep", data) == 0
        assert (tmp_path / "out" / "sweep_points.csv").exists()

    def test_oracle_compare(self, run, tmp_path):
        assert run("oracle-compare") == 0
        report = json.loads((tmp_path / "out" / "oracle_compare.json").read_text(encoding="utf-8"))
        assert report["result"]["passed"] is True

    def test_unknown_command(self, run):
        with pytest.raises(SystemExit):
            run("integrate")


class TestLogging:
    def test_unknown_level(self):
        with pytest.raises(ValueError):
            set_log_level("verbose")
        set_log_level("info")

    def test_stage_reraises(self):
        with pytest.raises(KeyError):
            with stage("failing block"):
                raise KeyError("x")

    def test_status_icon(self):
        assert (status_icon(True), status_icon(False)) == ("✅", "❌")
