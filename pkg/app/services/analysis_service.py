"""One design through filter, projection, Darcy pressure and elasticity."""

import logging
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from app.core.exceptions import ContractViolationError
from app.models.mesh import BenchmarkProblem
from app.models.physics import (
    FlowParams,
    MaterialSet,
    ProjectionParams,
    RealizationState,
)
from app.schemas.config import RunConfig
from app.schemas.enums import ElementTag, Realization
from app.services.element_service import build_element_matrices
from app.services.elasticity_service import assemble_stiffness, solve_displacement
from app.services.field_service import apply_filter, build_filter, project, projection_derivative
from app.services.mesh_service import build_benchmark
from app.services.pressure_service import build_flow_params, build_transformation, pressure_state

logger = logging.getLogger(__name__)

BOTH_REALIZATIONS = (Realization.ERODED, Realization.BLUEPRINT)


def materials_from_config(config: RunConfig) -> MaterialSet:
    return MaterialSet(
        moduli=tuple(config.materials.moduli),
        penal=config.materials.penal,
        poisson=config.materials.poisson,
        thickness=config.materials.thickness,
    )


def problem_from_config(config: RunConfig) -> BenchmarkProblem:
    return build_benchmark(
        config.benchmark,
        nelx=config.mesh.nelx,
        nely=config.mesh.nely,
        thickness=config.materials.thickness,
        input_pressure=config.input_pressure,
        spring_stiffness=config.spring_stiffness,
    )


class MechanismAnalysis:
    """Design-independent data of a mechanism and the per-design analysis.

    The filter, the element integrals and the transformation T are built
    once and reused for every design.
    """

    def __init__(
        self,
        problem: BenchmarkProblem,
        materials: MaterialSet,
        flow: FlowParams,
        delta_eta: float = 0.05,
        filter_radius: Optional[float] = None,
    ):
        """
        Args:
            problem: Mesh, boundary conditions and passive mask
            materials: Candidate materials
            flow: Darcy parameters
            delta_eta: Erosion offset of the eroded threshold
            filter_radius: Filter radius in m; defaults to 8.4 minimum element edges
        """
        self.mesh, self.bcs, self.passive = problem
        self.materials = materials
        self.flow = flow
        self.delta_eta = delta_eta
        radius = filter_radius if filter_radius is not None else 8.4 * self.mesh.min_edge
        self.filter = build_filter(self.mesh, radius)
        self.elements = build_element_matrices(
            self.mesh.dx, self.mesh.dy, materials.poisson, materials.thickness
        )
        self.transformation = build_transformation(self.mesh, self.elements.coupling)
        self._pinned_rows = self._passive_rows()

    @classmethod
    def from_config(cls, config: RunConfig) -> "MechanismAnalysis":
        problem = problem_from_config(config)
        return cls(
            problem,
            materials_from_config(config),
            build_flow_params(config.flow, problem.mesh),
            delta_eta=config.projection.delta_eta,
            filter_radius=config.projection.filter_radius_factor * problem.mesh.min_edge,
        )

    @property
    def n_materials(self) -> int:
        return self.materials.n_materials

    def _passive_rows(self) -> Tuple[np.ndarray, np.ndarray]:
        """Element ids and pinned rows for every passive element."""
        m = self.n_materials
        elements = np.flatnonzero(self.passive.passive)
        rows = np.zeros((len(elements), m))
        for r, e in enumerate(elements):
            if self.passive.tags[e] == ElementTag.SOLID:
                forced = self.passive.forced_material[e]
                forced = m - 1 if forced < 0 else min(int(forced), m - 1)
                # column 1 is topology; columns 2..forced+1 select the candidate
                rows[r, : forced + 1] = 1.0
        return elements, rows

    def pin_design(self, rho: np.ndarray) -> np.ndarray:
        """Copy of ``rho`` with forced-solid and forced-void rows pinned."""
        rho = self._check_design(rho).copy()
        elements, rows = self._pinned_rows
        rho[elements] = rows
        return rho

    def _check_design(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        expected = (self.mesh.n_elements, self.n_materials)
        if rho.shape != expected:
            raise ContractViolationError(f"design has shape {rho.shape}, expected {expected}")
        return rho

    def physical_fields(
        self, rho: np.ndarray, beta: float, realizations: Iterable[Realization] = BOTH_REALIZATIONS
    ) -> Dict[Realization, Tuple[np.ndarray, np.ndarray]]:
        """Projected fields and their derivatives per realization, passive rows pinned.

        Pinned rows get a zero projection derivative since they do not
        depend on the design variables.
        """
        filtered = apply_filter(self.filter, self._check_design(rho))
        params = ProjectionParams(beta=beta, delta_eta=self.delta_eta)
        elements, rows = self._pinned_rows
        fields = {}
        for realization in realizations:
            rho_bar = project(filtered, params, realization)
            drho_bar = projection_derivative(filtered, params, realization)
            rho_bar[elements] = rows
            drho_bar[elements] = 0.0
            fields[realization] = (rho_bar, drho_bar)
        return fields

    def analyze(
        self, rho: np.ndarray, beta: float, realizations: Iterable[Realization] = BOTH_REALIZATIONS
    ) -> Dict[Realization, RealizationState]:
        """Run the pressure and displacement analyses for each realization."""
        params = ProjectionParams(beta=beta, delta_eta=self.delta_eta)
        states = {}
        for realization, (rho_bar, drho_bar) in self.physical_fields(rho, beta, realizations).items():
            pressure = pressure_state(
                self.mesh, rho_bar, self.flow, self.bcs, self.transformation, self.elements
            )
            stiffness = assemble_stiffness(
                self.mesh, rho_bar, self.materials, self.bcs, self.elements.stiffness
            )
            solution = solve_displacement(stiffness, pressure.load)
            states[realization] = RealizationState(
                realization=realization,
                eta=params.eta(realization),
                rho_bar=rho_bar,
                drho_bar=drho_bar,
                pressure=pressure,
                stiffness=stiffness,
                solution=solution,
            )
            logger.debug(
                f"{realization.value}: u_out={solution.u_out:.6e} m, "
                f"SE={solution.strain_energy:.6e} J, residual={solution.residual:.2e}"
            )
        return states
