"""Adjoint sensitivities of the output displacement, strain energy and volumes.

Both K and A are symmetric, so every adjoint solve reuses the forward
factorization of its realization.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from app.core.exceptions import ConfigurationError
from app.models.mesh import PassiveMask, StructuredMesh
from app.models.physics import AdjointState, ElementMatrices, FilterOperator, FlowParams, RealizationState
from app.services.field_service import chain_rule
from app.services.pressure_service import load_sensitivity_terms
from app.services.solver_service import solve_free

logger = logging.getLogger(__name__)


def volume_limits(volume_fractions: Sequence[float]) -> List[float]:
    """Right-hand sides of the blueprint volume constraints.

    One material bounds the topology column by its fraction. With several
    materials the topology column is bounded by the sum of all fractions
    and material column k by fraction k.
    """
    fractions = [float(v) for v in volume_fractions]
    if len(fractions) == 1:
        return fractions
    return [sum(fractions)] + fractions[1:]


def volume_values(mesh: StructuredMesh, rho_bar: np.ndarray, limits: Sequence[float]) -> np.ndarray:
    """Volume ratios sum_i v_i rho_bar_ik / (V * limit_k), one per column."""
    volumes = mesh.element_volumes @ rho_bar
    return volumes / (mesh.total_volume * np.asarray(limits, dtype=float))


def flow_adjoint(mesh: StructuredMesh, state: RealizationState, rhs: np.ndarray) -> np.ndarray:
    """Solve A_ff x_f = rhs_f; x is zero on Dirichlet pressure nodes."""
    system = state.pressure.system
    result = np.zeros(mesh.n_nodes)
    result[system.free] = solve_free(system, rhs[system.free])
    return result


def adjoint_state(mesh: StructuredMesh, state: RealizationState, transformation: sp.spmatrix) -> AdjointState:
    """Structural adjoint w = K^-1 l and flow adjoint A^-1 T^T w."""
    stiffness = state.stiffness.system
    w = np.zeros(mesh.n_dofs)
    w[stiffness.free] = solve_free(stiffness, state.stiffness.selector[stiffness.free])
    flow = flow_adjoint(mesh, state, transformation.T @ w)
    return AdjointState(realization=state.realization, structural=w, flow=flow)


def objective_gradient(
    mesh: StructuredMesh,
    state: RealizationState,
    elements: ElementMatrices,
    flow: FlowParams,
    transformation: sp.spmatrix,
    adjoint: Optional[AdjointState] = None,
) -> np.ndarray:
    """d(u_out)/d(rho_bar) for one realization, shape (n_elements, m).

    Column k holds -w_e^T (dE/drho_bar_k k0) u_e; the topology column also
    carries the load term lambda_e^T (dA_e/drho_bar_1) p_e.
    """
    if adjoint is None:
        adjoint = adjoint_state(mesh, state, transformation)
    u = state.solution.displacement
    coupling = np.einsum("ei,ij,ej->e", adjoint.structural[mesh.edof], elements.stiffness, u[mesh.edof])
    gradient = -coupling[:, None] * state.stiffness.modulus_gradient
    gradient[:, 0] += load_sensitivity_terms(
        mesh,
        state.rho_bar,
        flow,
        adjoint.flow,
        state.pressure.pressure,
        (elements.conduction, elements.capacity),
    )
    return gradient


def strain_energy_gradient(
    mesh: StructuredMesh,
    state: RealizationState,
    elements: ElementMatrices,
    flow: FlowParams,
    transformation: sp.spmatrix,
    se_star: float,
) -> np.ndarray:
    """d(SE / SE*)/d(rho_bar) on one realization, shape (n_elements, m).

    The elastic term is self-adjoint; one flow adjoint with right-hand side
    T^T u carries the load term.

    Raises:
        ConfigurationError: If ``se_star`` is not positive
    """
    if not se_star > 0:
        raise ConfigurationError(f"SE* must be positive, got {se_star}", key="se_star")
    u = state.solution.displacement
    u_e = u[mesh.edof]
    energy = np.einsum("ei,ij,ej->e", u_e, elements.stiffness, u_e)
    gradient = -0.5 * energy[:, None] * state.stiffness.modulus_gradient
    mu = flow_adjoint(mesh, state, transformation.T @ u)
    gradient[:, 0] += load_sensitivity_terms(
        mesh,
        state.rho_bar,
        flow,
        mu,
        state.pressure.pressure,
        (elements.conduction, elements.capacity),
    )
    return gradient / se_star


def volume_gradients(
    mesh: StructuredMesh,
    drho_bar: np.ndarray,
    filter_op: FilterOperator,
    limits: Sequence[float],
    passive: Optional[PassiveMask] = None,
) -> List[np.ndarray]:
    """Raw-variable gradients of every volume ratio; constraint k touches column k only."""
    n, m = drho_bar.shape
    gradients = []
    for k, limit in enumerate(limits):
        df = np.zeros((n, m))
        df[:, k] = mesh.element_volumes / (mesh.total_volume * limit)
        gradients.append(to_design_gradient(df, drho_bar, filter_op, passive))
    return gradients


def to_design_gradient(
    df_drho_bar: np.ndarray,
    drho_bar: np.ndarray,
    filter_op: FilterOperator,
    passive: Optional[PassiveMask] = None,
) -> np.ndarray:
    """Chain rule to the raw variables with passive rows zeroed before and after."""
    df = np.array(df_drho_bar, dtype=float)
    if passive is not None:
        df[passive.passive] = 0.0
    gradient = chain_rule(df, drho_bar, filter_op)
    if passive is not None:
        gradient[passive.passive] = 0.0
    return gradient


def adjoint_identity_residual(state: RealizationState, adjoint: AdjointState) -> float:
    """|(-w)^T F + u_out| / |u_out|; zero when the adjoint solve is consistent."""
    value = -adjoint.structural @ state.pressure.load + state.u_out
    scale = abs(state.u_out)
    return float(abs(value) / scale) if scale > 0 else float(abs(value))
