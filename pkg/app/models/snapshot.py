"""Exportable field snapshot of one analysed design."""

from dataclasses import dataclass

import numpy as np

from app.core.exceptions import ContractViolationError


@dataclass(frozen=True, eq=False)
class FieldSnapshot:
    """Element densities and nodal fields on an nelx x nely grid.

    Element arrays use the element id i * nely + j, nodal arrays the node id
    i * (nely + 1) + j. Displacement is (n_nodes, 2).
    """

    nelx: int
    nely: int
    lx: float
    ly: float
    rho_blueprint: np.ndarray
    rho_eroded: np.ndarray
    pressure: np.ndarray
    displacement: np.ndarray

    def __post_init__(self):
        n_elements = self.nelx * self.nely
        n_nodes = (self.nelx + 1) * (self.nely + 1)
        if self.rho_blueprint.ndim != 2 or self.rho_blueprint.shape[0] != n_elements:
            raise ContractViolationError(
                f"blueprint field has shape {self.rho_blueprint.shape}, expected ({n_elements}, m)"
            )
        if self.rho_eroded.shape != self.rho_blueprint.shape:
            raise ContractViolationError(
                f"eroded field shape {self.rho_eroded.shape} != blueprint {self.rho_blueprint.shape}"
            )
        if self.pressure.shape != (n_nodes,):
            raise ContractViolationError(f"pressure has shape {self.pressure.shape}, expected ({n_nodes},)")
        if self.displacement.shape != (n_nodes, 2):
            raise ContractViolationError(
                f"displacement has shape {self.displacement.shape}, expected ({n_nodes}, 2)"
            )

    @property
    def n_materials(self) -> int:
        return self.rho_blueprint.shape[1]

    @property
    def n_elements(self) -> int:
        return self.nelx * self.nely

    @property
    def dx(self) -> float:
        return self.lx / self.nelx

    @property
    def dy(self) -> float:
        return self.ly / self.nely

    def element_grid(self, values: np.ndarray) -> np.ndarray:
        """Element values as an (nelx, nely) array indexed [i, j]."""
        return np.asarray(values).reshape(self.nelx, self.nely)

    def node_grid(self, values: np.ndarray) -> np.ndarray:
        """Nodal values as an (nelx + 1, nely + 1, ...) array indexed [i, j]."""
        values = np.asarray(values)
        return values.reshape((self.nelx + 1, self.nely + 1) + values.shape[1:])

    def element_centroids(self) -> np.ndarray:
        i, j = np.divmod(np.arange(self.n_elements), self.nely)
        return np.column_stack(((i + 0.5) * self.dx, (j + 0.5) * self.dy))
