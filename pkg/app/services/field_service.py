"""Density filter, smoothed Heaviside projection and the design chain rule."""

import logging
import math

import numpy as np
import scipy.sparse as sp

from app.core.exceptions import ConfigurationError, ContractViolationError
from app.models.mesh import StructuredMesh
from app.models.physics import FilterOperator, ProjectionParams
from app.schemas.enums import Realization

logger = logging.getLogger(__name__)


def tanh_projection(x: np.ndarray, beta: float, eta: float) -> np.ndarray:
    """Smoothed Heaviside step of steepness ``beta`` centred at ``eta``; maps [0, 1] onto [0, 1]."""
    return (np.tanh(beta * eta) + np.tanh(beta * (x - eta))) / (
        np.tanh(beta * eta) + np.tanh(beta * (1.0 - eta))
    )


def tanh_projection_derivative(x: np.ndarray, beta: float, eta: float) -> np.ndarray:
    return beta / np.cosh(beta * (x - eta)) ** 2 / (
        np.tanh(beta * eta) + np.tanh(beta * (1.0 - eta))
    )


def build_filter(mesh: StructuredMesh, radius: float) -> FilterOperator:
    """Build the linear hat filter by neighbour offsets on the structured grid.

    Weights are ``v_j * max(0, 1 - d_ij / radius)`` on centroid distances,
    normalized per row, so rows near the boundary are renormalized rather
    than padded.

    Args:
        mesh: Structured grid
        radius: Filter radius in m

    Returns:
        FilterOperator: Row-stochastic CSR matrix

    Raises:
        ConfigurationError: If the radius is not positive
    """
    if not math.isfinite(radius) or radius <= 0:
        raise ConfigurationError(f"filter radius must be positive, got {radius}", key="filter_radius")

    nelx, nely, dx, dy = mesh.nelx, mesh.nely, mesh.dx, mesh.dy
    reach_x = min(nelx - 1, int(math.ceil(radius / dx)))
    reach_y = min(nely - 1, int(math.ceil(radius / dy)))
    i, j = np.divmod(np.arange(mesh.n_elements), nely)
    volumes = mesh.element_volumes

    rows, cols, weights = [], [], []
    for di in range(-reach_x, reach_x + 1):
        for dj in range(-reach_y, reach_y + 1):
            w = 1.0 - math.hypot(di * dx, dj * dy) / radius
            if w <= 0:
                continue
            ni, nj = i + di, j + dj
            inside = (ni >= 0) & (ni < nelx) & (nj >= 0) & (nj < nely)
            source = np.flatnonzero(inside)
            target = ni[inside] * nely + nj[inside]
            rows.append(source)
            cols.append(target)
            weights.append(w * volumes[target])

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    weights = np.concatenate(weights)
    matrix = sp.coo_matrix((weights, (rows, cols)), shape=(mesh.n_elements,) * 2).tocsr()
    row_sums = np.asarray(matrix.sum(axis=1)).ravel()
    matrix = sp.diags(1.0 / row_sums) @ matrix
    logger.debug(f"Filter radius {radius:.4g} m, {matrix.nnz} weights")
    return FilterOperator(matrix=matrix.tocsr(), radius=float(radius))


def _check_rows(op: FilterOperator, field: np.ndarray, name: str) -> np.ndarray:
    field = np.asarray(field, dtype=float)
    if field.ndim != 2 or field.shape[0] != op.matrix.shape[1]:
        raise ContractViolationError(
            f"{name} has shape {field.shape}, expected ({op.matrix.shape[1]}, m)"
        )
    return field


def apply_filter(op: FilterOperator, field: np.ndarray) -> np.ndarray:
    """Filter every design column with the same operator.

    Raises:
        ContractViolationError: If the field rows do not match the operator
    """
    field = _check_rows(op, field, "design field")
    return np.asarray(op.matrix @ field)


def project(field: np.ndarray, params: ProjectionParams, realization: Realization) -> np.ndarray:
    """Project a filtered field with the threshold of the given realization."""
    return tanh_projection(np.asarray(field, dtype=float), params.beta, params.eta(realization))


def projection_derivative(
    field: np.ndarray, params: ProjectionParams, realization: Realization
) -> np.ndarray:
    """Entrywise derivative of :func:`project` with respect to the filtered field."""
    return tanh_projection_derivative(
        np.asarray(field, dtype=float), params.beta, params.eta(realization)
    )


def chain_rule(df_drho_bar: np.ndarray, drho_bar: np.ndarray, op: FilterOperator) -> np.ndarray:
    """Carry a gradient on the projected field back to the raw design variables.

    Returns W^T (df/drho_bar * drho_bar/drho_tilde), column by column.

    Raises:
        ContractViolationError: If the operand shapes disagree
    """
    df_drho_bar = np.asarray(df_drho_bar, dtype=float)
    drho_bar = np.asarray(drho_bar, dtype=float)
    if df_drho_bar.shape != drho_bar.shape:
        raise ContractViolationError(
            f"gradient shape {df_drho_bar.shape} does not match projection "
            f"derivative shape {drho_bar.shape}"
        )
    product = _check_rows(op, df_drho_bar * drho_bar, "gradient")
    return np.asarray(op.matrix.T @ product)
