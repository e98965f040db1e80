"""Tests for the robust optimization loop."""

import logging
from unittest.mock import patch

import numpy as np
import pytest

from app.core.exceptions import AnalysisAbortedError, ModelError
from app.schemas.config import RunConfig
from app.services.analysis_service import MechanismAnalysis
from app.services.mma import MMASolver
from app.services.optimizer_service import (
    SE_STAR_FALLBACK,
    TopologyOptimizer,
    beta_schedule_from_config,
    compute_se_star,
    initial_design,
)


def patch_config(**overrides) -> RunConfig:
    raw = {
        "name": "patch-run",
        "benchmark": "patch",
        "materials": {"moduli": [1e7, 1e8]},
        "volume_fractions": [0.2, 0.1],
        "projection": {"filter_radius_factor": 1.5},
        "optimizer": {"max_iterations": 3},
    }
    raw.update(overrides)
    return RunConfig.model_validate(raw)


class TestSEStar:
    @pytest.mark.parametrize(
        "energy, expected",
        [(3.2, 3.0), (3.7, 3.5), (3.5, 3.0), (12.0, 12.0), (0.9, 0.5)],
    )
    def test_rounding_rule(self, energy, expected):
        assert compute_se_star(energy) == expected

    def test_zero_falls_back_with_warning(self, caplog):
        with caplog.at_level(logging.WARNING, logger="app.services.optimizer_service"):
            assert compute_se_star(0.3) == SE_STAR_FALLBACK
        assert any("SE* = 0" in r.getMessage() for r in caplog.records)


class TestBetaScheduleFromConfig:
    def test_schedule_matches_projection_settings(self):
        config = patch_config(projection={"beta_initial": 2.0, "beta_factor": 2.0, "beta_period": 10, "beta_max": 16.0})
        schedule = beta_schedule_from_config(config)
        assert schedule.beta_at(1) == 2.0
        assert schedule.beta_at(11) == 4.0
        assert schedule.beta_at(1000) == 16.0


class TestInitialDesign:
    def test_uniform_rows_sit_at_limits(self):
        config = patch_config()
        analysis = MechanismAnalysis.from_config(config)
        rho = initial_design(config, analysis)
        assert rho.shape == (analysis.mesh.n_elements, 2)
        np.testing.assert_allclose(rho, np.tile([0.3, 0.1], (analysis.mesh.n_elements, 1)))

    def test_single_material_row(self):
        config = patch_config(materials={"moduli": [1e7]}, volume_fractions=[0.3])
        analysis = MechanismAnalysis.from_config(config)
        np.testing.assert_allclose(initial_design(config, analysis), 0.3)

    def test_random_design_is_seeded_and_bounded(self):
        config = patch_config(initial_design={"kind": "random", "amplitude": 0.05}, seed=4)
        analysis = MechanismAnalysis.from_config(config)
        first = initial_design(config, analysis)
        second = initial_design(config, analysis)
        np.testing.assert_array_equal(first, second)
        assert np.all(np.abs(first - [0.3, 0.1]) <= 0.05 + 1e-12)
        assert np.all((first >= 0.0) & (first <= 1.0))

    def test_passive_rows_are_pinned(self):
        config = RunConfig.model_validate(
            {
                "benchmark": "gripper",
                "mesh": {"nelx": 20, "nely": 10},
                "materials": {"moduli": [1e7, 1e8]},
                "volume_fractions": [0.2, 0.1],
            }
        )
        analysis = MechanismAnalysis.from_config(config)
        rho = initial_design(config, analysis)
        passive = analysis.passive
        np.testing.assert_array_equal(rho[passive.void_elements], 0.0)
        np.testing.assert_array_equal(rho[passive.solid_elements], 1.0)


class TestTopologyOptimizer:
    def test_short_run_history(self):
        records = []
        result = TopologyOptimizer(patch_config(), on_iteration=records.append).run()

        assert result.iterations == 3
        assert not result.converged
        assert result.termination_reason == "max_iterations"
        assert len(result.history) == 3
        assert records == result.history
        assert [r.iteration for r in result.history] == [1, 2, 3]
        for record in result.history:
            assert record.f0 == max(record.u_out_eroded, record.u_out_blueprint)
            assert record.se_star == result.se_star
            assert len(record.volumes) == 2
        assert result.u_ref > 0
        assert np.all((result.rho >= 0.0) & (result.rho <= 1.0))
        assert len(result.volumes) == 2
        assert result.volume_limits == pytest.approx([0.3, 0.1])

    def test_outputs_are_scaled_by_frozen_reference(self):
        seen = []
        original = MMASolver.update

        def capture(solver, x, df0dx, fval, dfdx):
            seen.append(np.array(fval))
            return original(solver, x, df0dx, fval, dfdx)

        with patch.object(MMASolver, "update", autospec=True, side_effect=capture):
            result = TopologyOptimizer(patch_config()).run()

        first = result.history[0]
        assert result.u_ref == max(abs(first.u_out_eroded), abs(first.u_out_blueprint))
        assert max(seen[0][:2]) == pytest.approx(0.0, abs=1e-12)
        for fval, record in zip(seen, result.history):
            expected = 10.0 * (record.u_out_eroded - record.u_out_blueprint) / result.u_ref
            assert fval[0] - fval[1] == pytest.approx(expected, rel=1e-10, abs=1e-12)

    def test_converges_when_change_is_small_at_final_beta(self):
        config = patch_config(
            projection={"filter_radius_factor": 1.5, "beta_max": 1.0},
            optimizer={"max_iterations": 5, "change_tolerance": 1.0},
        )
        result = TopologyOptimizer(config).run()
        assert result.converged
        assert result.termination_reason == "converged"
        assert result.iterations == 1

    def test_runs_are_deterministic(self):
        first = TopologyOptimizer(patch_config()).run()
        second = TopologyOptimizer(patch_config()).run()
        strip = {"wall_time"}
        assert [r.model_dump(exclude=strip) for r in first.history] == [
            r.model_dump(exclude=strip) for r in second.history
        ]
        np.testing.assert_array_equal(first.rho, second.rho)

    def test_failed_analysis_writes_checkpoint(self, tmp_path):
        config = patch_config()
        analysis = MechanismAnalysis.from_config(config)
        optimizer = TopologyOptimizer(config, analysis=analysis, checkpoint_dir=tmp_path)

        with patch.object(analysis, "analyze", side_effect=ModelError("stiffness matrix is singular")):
            with pytest.raises(AnalysisAbortedError) as exc_info:
                optimizer.run()

        error = exc_info.value
        assert error.iteration == 1
        assert error.checkpoint_path == tmp_path / "checkpoint.npz"
        with np.load(error.checkpoint_path) as saved:
            assert int(saved["iteration"]) == 1
            assert saved["rho"].shape == (analysis.mesh.n_elements, 2)
