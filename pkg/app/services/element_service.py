"""Bilinear quadrilateral element integrals on an axis-aligned rectangle.

All integrals use 2x2 Gauss quadrature, which is exact for the bilinear
products involved. Local node order is counter-clockwise from the
bottom-left corner.
"""

import logging
from typing import Tuple

import numpy as np

from app.models.physics import ElementMatrices

logger = logging.getLogger(__name__)

_GAUSS = 1.0 / np.sqrt(3.0)
GAUSS_POINTS_2X2 = [(-_GAUSS, -_GAUSS), (_GAUSS, -_GAUSS), (_GAUSS, _GAUSS), (-_GAUSS, _GAUSS)]

_XI_NODES = np.array([-1.0, 1.0, 1.0, -1.0])
_ETA_NODES = np.array([-1.0, -1.0, 1.0, 1.0])


def shape_functions(xi: float, eta: float) -> np.ndarray:
    """Bilinear shape functions N_1..N_4 at natural coordinates."""
    return 0.25 * (1.0 + _XI_NODES * xi) * (1.0 + _ETA_NODES * eta)


def shape_gradients(xi: float, eta: float, dx: float, dy: float) -> np.ndarray:
    """Physical gradients (2 x 4) of the shape functions on a dx x dy rectangle."""
    dn_dxi = 0.25 * _XI_NODES * (1.0 + _ETA_NODES * eta)
    dn_deta = 0.25 * _ETA_NODES * (1.0 + _XI_NODES * xi)
    return np.vstack((dn_dxi * 2.0 / dx, dn_deta * 2.0 / dy))


def plane_stress_matrix(modulus: float, poisson: float) -> np.ndarray:
    factor = modulus / (1.0 - poisson**2)
    return factor * np.array(
        [
            [1.0, poisson, 0.0],
            [poisson, 1.0, 0.0],
            [0.0, 0.0, 0.5 * (1.0 - poisson)],
        ]
    )


def _strain_displacement(grad: np.ndarray) -> np.ndarray:
    b = np.zeros((3, 8))
    b[0, 0::2] = grad[0]
    b[1, 1::2] = grad[1]
    b[2, 0::2] = grad[1]
    b[2, 1::2] = grad[0]
    return b


def element_stiffness_unit(dx: float, dy: float, poisson: float, thickness: float) -> np.ndarray:
    """Plane-stress element stiffness (8 x 8) for unit Young's modulus.

    Args:
        dx: Element width in m
        dy: Element height in m
        poisson: Poisson ratio
        thickness: Out-of-plane depth in m

    Returns:
        np.ndarray: Symmetric stiffness with DOF order (u1, v1, ..., u4, v4)
    """
    d = plane_stress_matrix(1.0, poisson)
    det_j = 0.25 * dx * dy
    k0 = np.zeros((8, 8))
    for xi, eta in GAUSS_POINTS_2X2:
        b = _strain_displacement(shape_gradients(xi, eta, dx, dy))
        k0 += thickness * det_j * b.T @ d @ b
    return 0.5 * (k0 + k0.T)


def flow_element_matrices(dx: float, dy: float, thickness: float) -> Tuple[np.ndarray, np.ndarray]:
    """Return the conduction (grad N^T grad N) and capacity (N^T N) integrals, both 4 x 4."""
    det_j = 0.25 * dx * dy
    conduction = np.zeros((4, 4))
    capacity = np.zeros((4, 4))
    for xi, eta in GAUSS_POINTS_2X2:
        grad = shape_gradients(xi, eta, dx, dy)
        n = shape_functions(xi, eta)
        conduction += thickness * det_j * grad.T @ grad
        capacity += thickness * det_j * np.outer(n, n)
    return conduction, capacity


def coupling_element_matrix(dx: float, dy: float, thickness: float) -> np.ndarray:
    """Integral of N_u^T grad N_p (8 x 4) mapping nodal pressures to nodal forces."""
    det_j = 0.25 * dx * dy
    coupling = np.zeros((8, 4))
    for xi, eta in GAUSS_POINTS_2X2:
        n = shape_functions(xi, eta)
        grad = shape_gradients(xi, eta, dx, dy)
        nu = np.zeros((2, 8))
        nu[0, 0::2] = n
        nu[1, 1::2] = n
        coupling += thickness * det_j * nu.T @ grad
    return coupling


def build_element_matrices(dx: float, dy: float, poisson: float, thickness: float) -> ElementMatrices:
    conduction, capacity = flow_element_matrices(dx, dy, thickness)
    matrices = ElementMatrices(
        stiffness=element_stiffness_unit(dx, dy, poisson, thickness),
        conduction=conduction,
        capacity=capacity,
        coupling=coupling_element_matrix(dx, dy, thickness),
    )
    logger.debug(f"Element matrices built for {dx:.4g} x {dy:.4g} m, nu={poisson}")
    return matrices


def assembly_indices(row_map: np.ndarray, col_map: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Global (row, col) indices matching a row-major flatten of every element matrix.

    Args:
        row_map: (n_elements, r) global row indices per element
        col_map: (n_elements, c) global column indices per element
    """
    n_el, r = row_map.shape
    c = col_map.shape[1]
    rows = np.broadcast_to(row_map[:, :, None], (n_el, r, c)).ravel()
    cols = np.broadcast_to(col_map[:, None, :], (n_el, r, c)).ravel()
    return rows, cols
