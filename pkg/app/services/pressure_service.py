"""Darcy pressure model with drainage and the pressure-to-load transformation."""

import logging
import math
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from app.core.exceptions import ModelError
from app.models.mesh import BoundaryConditions, StructuredMesh
from app.models.physics import ElementMatrices, FactorizedMatrix, FlowParams, PressureState
from app.schemas.config import FlowConfig
from app.services.element_service import (
    assembly_indices,
    coupling_element_matrix,
    flow_element_matrices,
)
from app.services.field_service import tanh_projection, tanh_projection_derivative
from app.services.solver_service import factorize, solve_with_dirichlet

logger = logging.getLogger(__name__)


def drainage_base(
    k_solid: float, ratio: float, distance: float
) -> float:
    """Solid drainage coefficient D_s = (ln(ratio) / distance)^2 * K_s.

    Pressure decays to ``ratio`` of its value across ``distance`` of solid.
    """
    return (math.log(ratio) / distance) ** 2 * k_solid


def build_flow_params(config: FlowConfig, mesh: StructuredMesh) -> FlowParams:
    """Flow parameters for a mesh; the penetration depth is measured in element edges."""
    k_solid = config.k_void * config.epsilon
    base = 0.0
    if config.drainage:
        base = drainage_base(k_solid, config.drainage_ratio, config.drainage_distance * mesh.min_edge)
    return FlowParams(
        k_void=config.k_void,
        epsilon=config.epsilon,
        beta_k=config.beta_k,
        eta_k=config.eta_k,
        beta_d=config.beta_d,
        eta_d=config.eta_d,
        drainage_base=base,
    )


def _topology(rho_bar: np.ndarray) -> np.ndarray:
    rho_bar = np.asarray(rho_bar, dtype=float)
    return rho_bar[:, 0] if rho_bar.ndim == 2 else rho_bar


def flow_coefficient(rho1: np.ndarray, params: FlowParams) -> np.ndarray:
    """K = K_v (1 - (1 - eps) H(rho1)); depends on the topology column only."""
    h = tanh_projection(np.asarray(rho1, dtype=float), params.beta_k, params.eta_k)
    return params.k_void * (1.0 - (1.0 - params.epsilon) * h)


def flow_coefficient_derivative(rho1: np.ndarray, params: FlowParams) -> np.ndarray:
    dh = tanh_projection_derivative(np.asarray(rho1, dtype=float), params.beta_k, params.eta_k)
    return -params.k_void * (1.0 - params.epsilon) * dh


def drainage_coefficient(rho1: np.ndarray, params: FlowParams) -> np.ndarray:
    """D = D_s H(rho1): zero in void, D_s in solid."""
    return params.drainage_base * tanh_projection(
        np.asarray(rho1, dtype=float), params.beta_d, params.eta_d
    )


def drainage_coefficient_derivative(rho1: np.ndarray, params: FlowParams) -> np.ndarray:
    return params.drainage_base * tanh_projection_derivative(
        np.asarray(rho1, dtype=float), params.beta_d, params.eta_d
    )


def assemble_flow(
    mesh: StructuredMesh,
    rho_bar: np.ndarray,
    params: FlowParams,
    matrices: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> sp.csc_matrix:
    """Assemble the global flow matrix A = sum_e (K_e Kp + D_e Dp).

    Args:
        mesh: Structured grid
        rho_bar: Projected field (n, m) or topology column (n,)
        params: Flow parameters
        matrices: Precomputed (conduction, capacity) element integrals

    Returns:
        sp.csc_matrix: Symmetric flow matrix over all pressure DOFs
    """
    conduction, capacity = matrices or flow_element_matrices(mesh.dx, mesh.dy, mesh.thickness)
    rho1 = _topology(rho_bar)
    k = flow_coefficient(rho1, params)
    d = drainage_coefficient(rho1, params)
    values = (k[:, None] * conduction.ravel()[None, :] + d[:, None] * capacity.ravel()[None, :]).ravel()
    rows, cols = assembly_indices(mesh.pdof, mesh.pdof)
    return sp.coo_matrix((values, (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)).tocsc()


def solve_pressure(
    flow_matrix: sp.spmatrix, dirichlet_nodes: np.ndarray, dirichlet_values: np.ndarray
) -> Tuple[np.ndarray, FactorizedMatrix]:
    """Solve A p = 0 with prescribed nodal pressures.

    Returns:
        Tuple[np.ndarray, FactorizedMatrix]: Nodal pressures and the reusable factor

    Raises:
        ModelError: If the reduced flow matrix is singular
        NumericalError: If the solve fails its residual check
    """
    n = flow_matrix.shape[0]
    dirichlet_nodes = np.asarray(dirichlet_nodes, dtype=int)
    if len(dirichlet_nodes) == 0 and np.allclose(flow_matrix @ np.ones(n), 0.0):
        raise ModelError("flow matrix is singular: no prescribed pressure and no drainage")
    free = np.setdiff1d(np.arange(n), dirichlet_nodes)
    system = factorize(flow_matrix, free, name="flow matrix")
    pressure = solve_with_dirichlet(system, None, dirichlet_nodes, dirichlet_values)
    return pressure, system


def build_transformation(mesh: StructuredMesh, coupling: Optional[np.ndarray] = None) -> sp.csr_matrix:
    """Assemble T = sum_e int N_u^T grad N_p dV once per mesh; loads are F = -T p."""
    if coupling is None:
        coupling = coupling_element_matrix(mesh.dx, mesh.dy, mesh.thickness)
    rows, cols = assembly_indices(mesh.edof, mesh.pdof)
    values = np.tile(coupling.ravel(), mesh.n_elements)
    return sp.coo_matrix((values, (rows, cols)), shape=(mesh.n_dofs, mesh.n_nodes)).tocsr()


def pressure_state(
    mesh: StructuredMesh,
    rho_bar: np.ndarray,
    params: FlowParams,
    bcs: BoundaryConditions,
    transformation: sp.spmatrix,
    matrices: Optional[ElementMatrices] = None,
) -> PressureState:
    """Assemble, solve and convert the pressure of one realization into nodal loads."""
    element = (matrices.conduction, matrices.capacity) if matrices is not None else None
    flow_matrix = assemble_flow(mesh, rho_bar, params, element)
    pressure, system = solve_pressure(flow_matrix, bcs.pressure_nodes, bcs.pressure_values)
    rho1 = _topology(rho_bar)
    return PressureState(
        flow_matrix=flow_matrix,
        system=system,
        pressure=pressure,
        load=-(transformation @ pressure),
        flow_coefficient=flow_coefficient(rho1, params),
        drainage=drainage_coefficient(rho1, params),
    )


def flow_matrix_derivative(
    mesh: StructuredMesh,
    rho_bar: np.ndarray,
    params: FlowParams,
    element: int,
    matrices: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> np.ndarray:
    """Element derivative dA_e / d(rho_bar_e1) (4 x 4); material columns contribute nothing."""
    conduction, capacity = matrices or flow_element_matrices(mesh.dx, mesh.dy, mesh.thickness)
    rho1 = _topology(rho_bar)[element]
    dk = flow_coefficient_derivative(rho1, params)
    dd = drainage_coefficient_derivative(rho1, params)
    return dk * conduction + dd * capacity


def load_sensitivity_terms(
    mesh: StructuredMesh,
    rho_bar: np.ndarray,
    params: FlowParams,
    adjoint: np.ndarray,
    pressure: np.ndarray,
    matrices: Tuple[np.ndarray, np.ndarray],
) -> np.ndarray:
    """Per-element lambda_e^T (dA_e/d rho_bar_e1) p_e for every element at once."""
    conduction, capacity = matrices
    rho1 = _topology(rho_bar)
    dk = flow_coefficient_derivative(rho1, params)
    dd = drainage_coefficient_derivative(rho1, params)
    lam_e = adjoint[mesh.pdof]
    p_e = pressure[mesh.pdof]
    conduction_term = np.einsum("ei,ij,ej->e", lam_e, conduction, p_e)
    capacity_term = np.einsum("ei,ij,ej->e", lam_e, capacity, p_e)
    return dk * conduction_term + dd * capacity_term
