"""Tests for the MMA update."""

import warnings

import numpy as np
import pytest

from app.core.exceptions import ContractViolationError, NumericalError
from app.services.mma import MMASolver


def _quadratic_problem(n: int, start: float, iterations: int) -> np.ndarray:
    """min sum (x - 0.5)^2 subject to sum(x) <= 0.4 n, 0 <= x <= 1."""
    solver = MMASolver(n, 1, np.zeros(n), np.ones(n))
    x = np.full(n, start)
    for _ in range(iterations):
        df0dx = 2.0 * (x - 0.5)
        fval = np.array([x.sum() / (0.4 * n) - 1.0])
        dfdx = np.full((1, n), 1.0 / (0.4 * n))
        x, _ = solver.update(x, df0dx, fval, dfdx)
    return x


class TestMMASolver:
    def test_converges_to_constrained_optimum(self):
        x = _quadratic_problem(10, 0.3, 50)
        np.testing.assert_allclose(x, 0.4, atol=1e-3)

    def test_zero_gradients_leave_iterate_in_place(self):
        n = 4
        solver = MMASolver(n, 1, np.zeros(n), np.ones(n))
        x = np.full(n, 0.5)
        x_new, y = solver.update(x, np.zeros(n), np.array([-1.0]), np.zeros((1, n)))
        np.testing.assert_allclose(x_new, x, atol=1e-5)
        assert y[0] == pytest.approx(0.0, abs=1e-5)

    def test_move_limit_and_bounds(self):
        n = 5
        solver = MMASolver(n, 1, np.zeros(n), np.ones(n), move=0.1)
        x = np.array([0.05, 0.3, 0.5, 0.7, 0.95])
        x_new, _ = solver.update(x, np.full(n, 1e3), np.array([-1.0]), np.zeros((1, n)))
        assert np.all(x_new <= x + 1e-12)
        assert np.all(x - x_new <= 0.1 + 1e-9)
        assert np.all(x_new >= -1e-12)
        assert solver.state.iteration == 1

    def test_state_tracks_iterations(self):
        n = 3
        solver = MMASolver(n, 1, np.zeros(n), np.ones(n))
        x = np.full(n, 0.5)
        for _ in range(3):
            x, _ = solver.update(x, 2.0 * (x - 0.2), np.array([x.sum() - 3.0]), np.ones((1, n)))
        assert solver.state.iteration == 3
        assert np.isfinite(solver.state.kkt_norm)

    def test_wrong_variable_count(self):
        solver = MMASolver(3, 1, np.zeros(3), np.ones(3))
        with pytest.raises(ContractViolationError):
            solver.update(np.zeros(4), np.zeros(4), np.zeros(1), np.zeros((1, 4)))

    def test_wrong_constraint_shape(self):
        solver = MMASolver(3, 2, np.zeros(3), np.ones(3))
        with pytest.raises(ContractViolationError):
            solver.update(np.zeros(3), np.zeros(3), np.zeros(1), np.zeros((1, 3)))

    def test_non_finite_gradient(self):
        solver = MMASolver(2, 1, np.zeros(2), np.ones(2))
        with pytest.raises(NumericalError):
            solver.update(np.full(2, 0.5), np.array([np.nan, 0.0]), np.zeros(1), np.zeros((1, 2)))

    def test_inverted_bounds(self):
        with pytest.raises(ContractViolationError):
            MMASolver(2, 1, np.ones(2), np.zeros(2))


class TestScalarConversions:
    """Subproblem scalars are extracted without NumPy array-to-float deprecations."""

    def test_fewer_constraints_than_variables(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error", DeprecationWarning)
            x = _quadratic_problem(6, 0.3, 5)
        assert np.all((x >= 0.0) & (x <= 1.0))

    def test_as_many_constraints_as_variables(self):
        n = 2
        solver = MMASolver(n, 2, np.zeros(n), np.ones(n))
        x = np.full(n, 0.5)
        with warnings.catch_warnings():
            warnings.simplefilter("error", DeprecationWarning)
            for _ in range(30):
                fval = x / 0.3 - 1.0
                x, _ = solver.update(x, 2.0 * (x - 0.5), fval, np.eye(n) / 0.3)
        np.testing.assert_allclose(x, 0.3, atol=5e-3)
