"""Tests for the density filter, Heaviside projection and chain rule."""

import numpy as np
import pytest

from app.core.exceptions import ConfigurationError, ContractViolationError
from app.models.physics import BetaSchedule, ProjectionParams
from app.schemas.enums import Realization
from app.services.field_service import (
    apply_filter,
    build_filter,
    chain_rule,
    project,
    projection_derivative,
    tanh_projection,
    tanh_projection_derivative,
)
from app.services.mesh_service import build_grid


@pytest.fixture
def mesh():
    return build_grid(12, 8, 0.12, 0.08, 0.01)


class TestFilter:
    """Hat filter on the structured grid."""

    def test_rows_sum_to_one(self, mesh):
        op = build_filter(mesh, 2.5 * mesh.min_edge)
        np.testing.assert_allclose(np.asarray(op.matrix.sum(axis=1)).ravel(), 1.0, rtol=1e-12)

    def test_uniform_field_is_preserved(self, mesh):
        op = build_filter(mesh, 3.0 * mesh.min_edge)
        field = np.full((mesh.n_elements, 2), 0.37)
        np.testing.assert_allclose(apply_filter(op, field), 0.37, rtol=1e-12)

    def test_small_radius_is_identity(self, mesh):
        op = build_filter(mesh, 0.5 * mesh.min_edge)
        field = np.random.default_rng(0).random((mesh.n_elements, 1))
        np.testing.assert_allclose(apply_filter(op, field), field, rtol=1e-12)

    def test_weights_follow_the_hat(self, mesh):
        radius = 1.5 * mesh.min_edge
        op = build_filter(mesh, radius)
        centre = mesh.element_id(5, 4)
        row = op.matrix[centre].toarray().ravel()
        # centre weight 1, edge neighbours 1/3, diagonal neighbours 1 - sqrt(2)/1.5
        diagonal = 1.0 - np.sqrt(2.0) / 1.5
        total = 1.0 + 4.0 / 3.0 + 4.0 * diagonal
        assert row[centre] == pytest.approx(1.0 / total)
        assert row[mesh.element_id(6, 4)] == pytest.approx((1.0 / 3.0) / total)
        assert row[mesh.element_id(6, 5)] == pytest.approx(diagonal / total)
        assert np.count_nonzero(row) == 9

    def test_invalid_radius(self, mesh):
        with pytest.raises(ConfigurationError):
            build_filter(mesh, 0.0)

    def test_shape_mismatch(self, mesh):
        op = build_filter(mesh, 2.0 * mesh.min_edge)
        with pytest.raises(ContractViolationError):
            apply_filter(op, np.zeros((mesh.n_elements + 1, 1)))
        with pytest.raises(ContractViolationError):
            apply_filter(op, np.zeros(mesh.n_elements))


class TestProjection:
    """Smoothed Heaviside projection."""

    @pytest.mark.parametrize("beta", [1.0, 8.0, 128.0])
    def test_end_points(self, beta):
        assert tanh_projection(np.array(0.0), beta, 0.55) == pytest.approx(0.0, abs=1e-12)
        assert tanh_projection(np.array(1.0), beta, 0.55) == pytest.approx(1.0)

    def test_threshold_of_blueprint_maps_to_half(self):
        assert tanh_projection(np.array(0.5), 32.0, 0.5) == pytest.approx(0.5)

    def test_derivative_matches_finite_difference(self):
        x = np.linspace(0.05, 0.95, 19)
        h = 1e-6
        fd = (tanh_projection(x + h, 4.0, 0.6) - tanh_projection(x - h, 4.0, 0.6)) / (2 * h)
        np.testing.assert_allclose(tanh_projection_derivative(x, 4.0, 0.6), fd, rtol=1e-6)

    def test_eroded_never_exceeds_blueprint(self):
        params = ProjectionParams(beta=16.0, delta_eta=0.05)
        x = np.linspace(0.0, 1.0, 101)[:, None]
        eroded = project(x, params, Realization.ERODED)
        blueprint = project(x, params, Realization.BLUEPRINT)
        assert np.all(eroded <= blueprint + 1e-15)

    def test_realization_thresholds(self):
        params = ProjectionParams(beta=2.0, delta_eta=0.15)
        assert params.eta(Realization.ERODED) == pytest.approx(0.65)
        assert params.eta(Realization.BLUEPRINT) == 0.5
        x = np.array([[0.3]])
        np.testing.assert_allclose(
            projection_derivative(x, params, Realization.ERODED),
            tanh_projection_derivative(x, 2.0, 0.65),
        )

    def test_invalid_parameters(self):
        with pytest.raises(ConfigurationError):
            ProjectionParams(beta=0.5)
        with pytest.raises(ConfigurationError):
            ProjectionParams(delta_eta=0.6)


class TestChainRule:
    def test_matches_dense_transpose(self, mesh, rng):
        op = build_filter(mesh, 2.0 * mesh.min_edge)
        df = rng.standard_normal((mesh.n_elements, 3))
        drho = rng.random((mesh.n_elements, 3))
        expected = op.matrix.toarray().T @ (df * drho)
        np.testing.assert_allclose(chain_rule(df, drho, op), expected, rtol=1e-12, atol=1e-15)

    def test_shape_mismatch(self, mesh):
        op = build_filter(mesh, 2.0 * mesh.min_edge)
        with pytest.raises(ContractViolationError):
            chain_rule(np.zeros((mesh.n_elements, 2)), np.zeros((mesh.n_elements, 3)), op)


class TestBetaSchedule:
    def test_doubling_every_fifty_iterations(self):
        schedule = BetaSchedule()
        iterations = [1, 51, 101, 151, 201, 251, 301, 351]
        assert [schedule.beta_at(it) for it in iterations] == [1, 2, 4, 8, 16, 32, 64, 128]
        assert schedule.beta_at(50) == 1
        assert schedule.beta_at(400) == 128

    def test_nondecreasing(self):
        schedule = BetaSchedule()
        values = [schedule.beta_at(it) for it in range(1, 500)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_iteration_is_one_based(self):
        with pytest.raises(ValueError):
            BetaSchedule().beta_at(0)
