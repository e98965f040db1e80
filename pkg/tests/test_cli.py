"""Tests for the command-line front end."""

import json
from unittest.mock import MagicMock, patch

import pytest

from app.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, build_parser, load_run_config, run_cli
from app.schemas.enums import ExportFormat


@pytest.fixture
def patch_config_file(tmp_path):
    path = tmp_path / "patch.json"
    path.write_text(
        json.dumps(
            {
                "name": "patch-run",
                "benchmark": "patch",
                "materials": {"moduli": [1e7, 1e8]},
                "volume_fractions": [0.2, 0.1],
                "projection": {"filter_radius_factor": 1.5},
            }
        )
    )
    return path


class TestUsage:
    def test_no_arguments(self, capsys):
        assert run_cli([]) == EXIT_USAGE
        assert "config file or --benchmark" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert run_cli([str(tmp_path / "absent.json")]) == EXIT_USAGE

    def test_unknown_flag(self):
        assert run_cli(["--bogus"]) == EXIT_USAGE

    def test_unknown_export_format(self, patch_config_file):
        assert run_cli([str(patch_config_file), "--export", "vtk,png"]) == EXIT_USAGE

    def test_export_default(self):
        args = build_parser().parse_args(["cfg.json"])
        assert args.export == [ExportFormat.VTK, ExportFormat.CSV, ExportFormat.PGM]


class TestLoadRunConfig:
    def test_file_overrides_preset_and_flags_override_file(self, tmp_path):
        path = tmp_path / "override.json"
        path.write_text(json.dumps({"volume_fractions": [0.25, 0.05], "mesh": {"nelx": 40}}))
        args = build_parser().parse_args(
            [str(path), "--benchmark", "gripper-2mat", "--nelx", "20", "--nely", "10", "--seed", "3"]
        )
        config = load_run_config(args)
        assert config.volume_fractions == [0.25, 0.05]
        assert config.materials.moduli == [1e7, 1e8]
        assert (config.mesh.nelx, config.mesh.nely) == (20, 10)
        assert config.seed == 3

    def test_invalid_key_fails_with_key_name(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(
            json.dumps({"benchmark": "patch", "materials": {"moduli": [1e7]}, "volume_fractions": [0.3], "bogus": 1})
        )
        assert run_cli([str(path), "--out", str(tmp_path)]) == EXIT_FAILURE
        assert "bogus" in capsys.readouterr().err

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        assert run_cli([str(path), "--out", str(tmp_path)]) == EXIT_FAILURE


class TestRun:
    def test_tiny_run_writes_results(self, patch_config_file, tmp_path, capsys):
        out = tmp_path / "results"
        status = run_cli(
            [str(patch_config_file), "--iterations", "2", "--out", str(out), "--run-id", "tiny", "--export", "csv,pgm"]
        )
        assert status == EXIT_OK
        run_dir = out / "tiny"
        for name in ("config.json", "history.csv", "timings.csv", "summary.json", "fields.csv", "rho_1.pgm", "rho_2.pgm"):
            assert (run_dir / name).is_file(), name
        assert not (run_dir / "fields.vtk").exists()
        assert len((run_dir / "history.csv").read_text().splitlines()) == 3

        summary = json.loads((run_dir / "summary.json").read_text())
        assert summary["iterations"] == 2
        assert summary["f0"] == max(summary["u_out_eroded"], summary["u_out_blueprint"])
        assert summary["full_nelx"] is None
        assert "tiny:" in capsys.readouterr().out

    def test_identical_runs_give_identical_history(self, patch_config_file, tmp_path):
        out = tmp_path / "results"
        for run_id in ("first", "second"):
            args = [str(patch_config_file), "--iterations", "3", "--out", str(out), "--run-id", run_id, "--export", "csv"]
            assert run_cli(args) == EXIT_OK
        assert (out / "first" / "history.csv").read_bytes() == (out / "second" / "history.csv").read_bytes()

    def test_half_domain_is_mirrored(self, tmp_path):
        out = tmp_path / "results"
        status = run_cli(
            ["--benchmark", "gripper-2mat", "--nelx", "20", "--nely", "10", "--iterations", "1",
             "--out", str(out), "--run-id", "coarse", "--export", "pgm"]
        )
        assert status == EXIT_OK
        summary = json.loads((out / "coarse" / "summary.json").read_text())
        assert (summary["nelx"], summary["nely"]) == (20, 10)
        assert (summary["full_nelx"], summary["full_nely"]) == (20, 20)
        assert "full_rho_1.pgm" in summary["files"]


class TestFdCheck:
    @pytest.mark.parametrize("error, expected", [(1e-5, EXIT_OK), (0.1, EXIT_FAILURE)])
    def test_exit_status_follows_tolerance(self, error, expected, capsys):
        report = MagicMock(max_relative_error=error)
        with patch("app.cli.run_gradient_check", return_value=report) as check:
            assert run_cli(["--fd-check", "--seed", "2"]) == expected
        assert [c.args[0] for c in check.call_args_list] == [1, 2, 3]
        assert all(c.kwargs["seed"] == 2 for c in check.call_args_list)
        assert "max relative gradient error" in capsys.readouterr().out
