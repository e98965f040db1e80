"""Tests for extended SIMP interpolation."""

import numpy as np
import pytest

from app.core.exceptions import ConfigurationError, ContractViolationError
from app.core.presets import THREE_MATERIALS, TWO_MATERIALS
from app.models.physics import MaterialSet
from app.services.material_service import interpolate, interpolate_gradient


class TestInterpolate:
    """Limits of the nested interpolation."""

    def test_single_material(self):
        mats = MaterialSet(moduli=(1e7,))
        assert interpolate(np.array([1.0]), mats) == pytest.approx(1e7)
        assert interpolate(np.array([0.0]), mats) == pytest.approx(1e-6 * 1e7)
        assert interpolate(np.array([0.5]), mats) == pytest.approx(0.125 * 1e7 + 0.875 * 10.0)

    def test_two_materials(self):
        mats = MaterialSet(moduli=tuple(TWO_MATERIALS))
        assert interpolate(np.array([1.0, 1.0]), mats) == pytest.approx(1e8)
        assert interpolate(np.array([1.0, 0.0]), mats) == pytest.approx(1e7)
        assert interpolate(np.array([0.0, 0.7]), mats) == pytest.approx(mats.void_modulus)

    def test_three_materials(self):
        mats = MaterialSet(moduli=tuple(THREE_MATERIALS))
        assert interpolate(np.array([1.0, 1.0, 1.0]), mats) == pytest.approx(1e8)
        assert interpolate(np.array([1.0, 1.0, 0.0]), mats) == pytest.approx(0.5e8)
        assert interpolate(np.array([1.0, 0.0, 0.9]), mats) == pytest.approx(1e7)

    def test_field_input(self):
        mats = MaterialSet(moduli=tuple(TWO_MATERIALS))
        field = np.array([[1.0, 1.0], [1.0, 0.0], [0.0, 0.0]])
        np.testing.assert_allclose(interpolate(field, mats), [1e8, 1e7, mats.void_modulus])

    def test_wrong_width(self):
        mats = MaterialSet(moduli=tuple(TWO_MATERIALS))
        with pytest.raises(ContractViolationError):
            interpolate(np.ones((4, 3)), mats)


class TestInterpolateGradient:
    @pytest.mark.parametrize("moduli", [[1e7], TWO_MATERIALS, THREE_MATERIALS])
    def test_matches_finite_difference(self, moduli, rng):
        mats = MaterialSet(moduli=tuple(moduli))
        rows = rng.uniform(0.2, 0.9, (5, len(moduli)))
        gradient = interpolate_gradient(rows, mats)
        h = 1e-6
        for k in range(len(moduli)):
            step = np.zeros_like(rows)
            step[:, k] = h
            fd = (interpolate(rows + step, mats) - interpolate(rows - step, mats)) / (2 * h)
            np.testing.assert_allclose(gradient[:, k], fd, rtol=1e-6)

    def test_single_row_shape(self):
        mats = MaterialSet(moduli=tuple(THREE_MATERIALS))
        assert interpolate_gradient(np.array([0.5, 0.5, 0.5]), mats).shape == (3,)


class TestMaterialSet:
    def test_rejects_descending_moduli(self):
        with pytest.raises(ConfigurationError):
            MaterialSet(moduli=(1e8, 1e7))

    def test_rejects_non_positive_modulus(self):
        with pytest.raises(ConfigurationError):
            MaterialSet(moduli=(0.0, 1e7))

    def test_scaled(self):
        mats = MaterialSet(moduli=(1e7, 1e8)).scaled(10.0)
        assert mats.moduli == (1e8, 1e9)
        assert mats.void_modulus == pytest.approx(100.0)
