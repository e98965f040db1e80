"""Tests for the adjoint sensitivities, checked against central differences."""

import numpy as np
import pytest

from app.core.exceptions import ConfigurationError
from app.models.physics import FlowParams, MaterialSet
from app.schemas.enums import Realization
from app.services.analysis_service import MechanismAnalysis
from app.services.gradient_check import TOLERANCE, central_difference, run_gradient_check
from app.services.mesh_service import build_benchmark
from app.services.sensitivity_service import (
    adjoint_identity_residual,
    adjoint_state,
    objective_gradient,
    strain_energy_gradient,
    to_design_gradient,
    volume_gradients,
    volume_limits,
    volume_values,
)


@pytest.fixture
def patch_analysis(patch_problem, two_materials):
    return MechanismAnalysis(patch_problem, two_materials, FlowParams(drainage_base=0.05), filter_radius=0.015)


class TestVolumeLimits:
    def test_single_material_bounds_topology(self):
        assert volume_limits([0.3]) == [0.3]

    def test_two_materials(self):
        assert volume_limits([0.2, 0.1]) == pytest.approx([0.3, 0.1])

    def test_three_materials(self):
        assert volume_limits([0.1, 0.1, 0.05]) == pytest.approx([0.25, 0.1, 0.05])


class TestVolumeValues:
    def test_uniform_field_at_limit_gives_one(self, patch_problem):
        mesh, _, _ = patch_problem
        limits = volume_limits([0.2, 0.1])
        rho_bar = np.tile(limits, (mesh.n_elements, 1))
        np.testing.assert_allclose(volume_values(mesh, rho_bar, limits), [1.0, 1.0])

    def test_gradient_matches_central_difference(self, patch_analysis):
        mesh = patch_analysis.mesh
        limits = volume_limits([0.2, 0.1])
        rho = np.random.default_rng(3).uniform(0.2, 0.8, (mesh.n_elements, 2))
        rho_bar, drho_bar = patch_analysis.physical_fields(rho, 2.0, (Realization.BLUEPRINT,))[Realization.BLUEPRINT]

        def volumes(x):
            field, _ = patch_analysis.physical_fields(x, 2.0, (Realization.BLUEPRINT,))[Realization.BLUEPRINT]
            return volume_values(mesh, field, limits)

        fd = central_difference(volumes, rho, 1e-6)
        gradients = volume_gradients(mesh, drho_bar, patch_analysis.filter, limits)
        for k, gradient in enumerate(gradients):
            np.testing.assert_allclose(gradient, fd[k], rtol=1e-5, atol=1e-9)
            # constraint k only sees column k
            other = [c for c in range(2) if c != k]
            assert np.all(gradient[:, other] == 0.0)


class TestAdjoints:
    def test_adjoint_identity(self, patch_analysis):
        rho = np.random.default_rng(5).uniform(0.2, 0.8, (patch_analysis.mesh.n_elements, 2))
        states = patch_analysis.analyze(rho, 1.0)
        for state in states.values():
            adjoint = adjoint_state(patch_analysis.mesh, state, patch_analysis.transformation)
            assert adjoint_identity_residual(state, adjoint) < 1e-10
            assert np.all(adjoint.flow[patch_analysis.bcs.pressure_nodes] == 0.0)

    def test_objective_gradient_shape(self, patch_analysis):
        mesh = patch_analysis.mesh
        state = patch_analysis.analyze(np.full((mesh.n_elements, 2), 0.5), 1.0)[Realization.BLUEPRINT]
        gradient = objective_gradient(mesh, state, patch_analysis.elements, patch_analysis.flow, patch_analysis.transformation)
        assert gradient.shape == (mesh.n_elements, 2)
        assert np.all(np.isfinite(gradient))

    def test_strain_energy_gradient_requires_positive_reference(self, patch_analysis):
        mesh = patch_analysis.mesh
        state = patch_analysis.analyze(np.full((mesh.n_elements, 2), 0.5), 1.0)[Realization.ERODED]
        with pytest.raises(ConfigurationError) as exc_info:
            strain_energy_gradient(
                mesh, state, patch_analysis.elements, patch_analysis.flow, patch_analysis.transformation, 0.0
            )
        assert exc_info.value.key == "se_star"


class TestPassiveRows:
    def test_passive_rows_are_zeroed(self):
        problem = build_benchmark("gripper", nelx=20, nely=10)
        analysis = MechanismAnalysis(problem, MaterialSet(moduli=(1e7, 1e8)), FlowParams())
        mesh = analysis.mesh
        rho = np.full((mesh.n_elements, 2), 0.5)
        _, drho_bar = analysis.physical_fields(rho, 1.0, (Realization.BLUEPRINT,))[Realization.BLUEPRINT]
        gradient = to_design_gradient(np.ones_like(drho_bar), drho_bar, analysis.filter, analysis.passive)
        assert analysis.passive.passive.any()
        assert np.all(gradient[analysis.passive.passive] == 0.0)
        assert np.any(gradient[analysis.passive.design_elements] != 0.0)


class TestGradientCheck:
    @pytest.mark.parametrize("n_materials", [1, 2, 3])
    def test_adjoint_matches_finite_differences(self, n_materials):
        report = run_gradient_check(n_materials)
        assert {c.name for c in report.checks} == {"u_out_eroded", "u_out_blueprint", "g2"}
        assert all(c.compared > 0 for c in report.checks)
        assert report.max_relative_error <= TOLERANCE
        assert report.passed

    def test_steeper_projection(self):
        report = run_gradient_check(2, beta=4.0, seed=1)
        assert report.passed

    def test_unsupported_material_count(self):
        with pytest.raises(ValueError):
            run_gradient_check(4)
