"""Plane-stress structural analysis with the output spring."""

import logging
from typing import Optional

import numpy as np
import scipy.sparse as sp

from app.core.exceptions import ContractViolationError
from app.models.mesh import BoundaryConditions, StructuredMesh
from app.models.physics import DisplacementSolution, MaterialSet, StiffnessSystem
from app.services.element_service import assembly_indices, element_stiffness_unit
from app.services.material_service import interpolate, interpolate_gradient
from app.services.solver_service import factorize, relative_residual, solve_free

logger = logging.getLogger(__name__)


def assemble_stiffness(
    mesh: StructuredMesh,
    rho_bar: np.ndarray,
    mats: MaterialSet,
    bcs: BoundaryConditions,
    k0: Optional[np.ndarray] = None,
) -> StiffnessSystem:
    """Assemble K = sum_e E(rho_bar_e) k0, add the output spring and factorize.

    Element contributions are accumulated in element order, so identical
    inputs give bit-identical matrices.

    Args:
        mesh: Structured grid
        rho_bar: Projected field (n_elements, m)
        mats: Candidate materials
        bcs: Supports, symmetry rollers and output port
        k0: Unit-modulus element stiffness; built from ``mats`` when omitted

    Returns:
        StiffnessSystem: Global matrix, its free-DOF factor and modulus data

    Raises:
        ContractViolationError: If the field does not match the mesh
        ModelError: If the reduced stiffness is not positive definite
    """
    rho_bar = np.asarray(rho_bar, dtype=float)
    if rho_bar.shape != (mesh.n_elements, mats.n_materials):
        raise ContractViolationError(
            f"projected field has shape {rho_bar.shape}, "
            f"expected ({mesh.n_elements}, {mats.n_materials})"
        )
    if k0 is None:
        k0 = element_stiffness_unit(mesh.dx, mesh.dy, mats.poisson, mats.thickness)

    modulus = interpolate(rho_bar, mats)
    rows, cols = assembly_indices(mesh.edof, mesh.edof)
    values = (modulus[:, None] * k0.ravel()[None, :]).ravel()
    stiffness = sp.coo_matrix((values, (rows, cols)), shape=(mesh.n_dofs, mesh.n_dofs)).tocsc()
    if bcs.spring_stiffness:
        spring = sp.coo_matrix(
            ([bcs.spring_stiffness], ([bcs.output_dof], [bcs.output_dof])),
            shape=stiffness.shape,
        )
        stiffness = (stiffness + spring).tocsc()

    system = factorize(stiffness, bcs.free_dofs(mesh.n_dofs), name="stiffness matrix")
    return StiffnessSystem(
        stiffness=stiffness,
        system=system,
        modulus=modulus,
        modulus_gradient=interpolate_gradient(rho_bar, mats),
        selector=bcs.output_selector(mesh.n_dofs),
    )


def solve_displacement(system: StiffnessSystem, load: np.ndarray) -> DisplacementSolution:
    """Solve K u = F; report u_out = l^T u and SE = 1/2 u^T K u (spring included).

    Raises:
        NumericalError: If the solve fails its residual check
    """
    load = np.asarray(load, dtype=float)
    free = system.system.free
    u = np.zeros(system.stiffness.shape[0])
    u[free] = solve_free(system.system, load[free])
    residual = relative_residual(system.system, u[free], load[free])
    strain_energy = 0.5 * float(u @ (system.stiffness @ u))
    return DisplacementSolution(
        displacement=u,
        u_out=float(system.selector @ u),
        strain_energy=strain_energy,
        residual=residual,
    )


def element_strain_energy(mesh: StructuredMesh, system: StiffnessSystem, u: np.ndarray, k0: np.ndarray) -> np.ndarray:
    """Per-element 1/2 E_e u_e^T k0 u_e (excludes the spring)."""
    u_e = u[mesh.edof]
    return 0.5 * system.modulus * np.einsum("ei,ij,ej->e", u_e, k0, u_e)
