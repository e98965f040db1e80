"""Structured grid, boundary conditions and passive masks."""

from dataclasses import dataclass, field
from typing import NamedTuple, Tuple

import numpy as np

from app.core.exceptions import ConfigurationError
from app.schemas.enums import ElementTag

EDGES = ("left", "right", "bottom", "top")


@dataclass(frozen=True, eq=False)
class StructuredMesh:
    """Rectangular grid of bilinear quadrilaterals.

    Numbering is column-major from the bottom-left corner:
    node (i, j) has id ``i * (nely + 1) + j`` and element (i, j) has id
    ``i * nely + j``. Element nodes run counter-clockwise from the
    bottom-left corner; node n owns displacement DOFs 2n (x) and 2n+1 (y)
    and pressure DOF n.
    """

    nelx: int
    nely: int
    lx: float
    ly: float
    thickness: float
    edof: np.ndarray = field(repr=False)
    pdof: np.ndarray = field(repr=False)
    node_coords: np.ndarray = field(repr=False)

    @property
    def dx(self) -> float:
        return self.lx / self.nelx

    @property
    def dy(self) -> float:
        return self.ly / self.nely

    @property
    def min_edge(self) -> float:
        return min(self.dx, self.dy)

    @property
    def n_elements(self) -> int:
        return self.nelx * self.nely

    @property
    def n_nodes(self) -> int:
        return (self.nelx + 1) * (self.nely + 1)

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes

    @property
    def element_volume(self) -> float:
        return self.dx * self.dy * self.thickness

    @property
    def element_volumes(self) -> np.ndarray:
        return np.full(self.n_elements, self.element_volume)

    @property
    def total_volume(self) -> float:
        return self.lx * self.ly * self.thickness

    @property
    def element_centroids(self) -> np.ndarray:
        i, j = np.divmod(np.arange(self.n_elements), self.nely)
        return np.column_stack(((i + 0.5) * self.dx, (j + 0.5) * self.dy))

    def node_id(self, i: int, j: int) -> int:
        return i * (self.nely + 1) + j

    def element_id(self, i: int, j: int) -> int:
        return i * self.nely + j

    def edge_nodes(self, edge: str) -> np.ndarray:
        """Return node ids on one edge of the domain, ordered along it."""
        if edge == "left":
            return np.array([self.node_id(0, j) for j in range(self.nely + 1)])
        if edge == "right":
            return np.array([self.node_id(self.nelx, j) for j in range(self.nely + 1)])
        if edge == "bottom":
            return np.array([self.node_id(i, 0) for i in range(self.nelx + 1)])
        if edge == "top":
            return np.array([self.node_id(i, self.nely) for i in range(self.nelx + 1)])
        raise ConfigurationError(f"Unknown edge '{edge}'", key="edge")

    def element_block(self, i_range: Tuple[int, int], j_range: Tuple[int, int]) -> np.ndarray:
        """Element ids with i in [i0, i1) and j in [j0, j1)."""
        ii, jj = np.meshgrid(np.arange(*i_range), np.arange(*j_range), indexing="ij")
        return (ii * self.nely + jj).ravel()


@dataclass(frozen=True, eq=False)
class BoundaryConditions:
    """Supports, symmetry rollers, pressure Dirichlet data and the output port."""

    fixed_dofs: np.ndarray
    symmetry_dofs: np.ndarray
    pressure_nodes: np.ndarray
    pressure_values: np.ndarray
    output_dof: int
    output_sign: float = 1.0
    spring_stiffness: float = 5e4

    def __post_init__(self):
        if len(self.pressure_nodes) != len(self.pressure_values):
            raise ConfigurationError("pressure_nodes and pressure_values differ in length")
        if len(np.unique(self.pressure_nodes)) != len(self.pressure_nodes):
            raise ConfigurationError("pressure Dirichlet nodes must be unique")
        values = np.asarray(self.pressure_values, dtype=float)
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ConfigurationError(
                "pressure Dirichlet values must be finite and non-negative",
                key="input_pressure",
            )
        if self.output_dof in set(self.constrained_dofs.tolist()):
            raise ConfigurationError("output DOF must not be constrained", key="output_dof")
        if self.spring_stiffness < 0:
            raise ConfigurationError("spring stiffness must be non-negative", key="spring_stiffness")

    @property
    def constrained_dofs(self) -> np.ndarray:
        return np.union1d(self.fixed_dofs, self.symmetry_dofs).astype(int)

    def free_dofs(self, n_dofs: int) -> np.ndarray:
        return np.setdiff1d(np.arange(n_dofs), self.constrained_dofs)

    def free_pressure_nodes(self, n_nodes: int) -> np.ndarray:
        return np.setdiff1d(np.arange(n_nodes), self.pressure_nodes)

    def output_selector(self, n_dofs: int) -> np.ndarray:
        selector = np.zeros(n_dofs)
        selector[self.output_dof] = self.output_sign
        return selector


@dataclass(frozen=True, eq=False)
class PassiveMask:
    """Per-element design tags.

    ``forced_material`` holds the 0-based candidate index for forced-solid
    elements; -1 selects the stiffest candidate.
    """

    tags: np.ndarray
    forced_material: np.ndarray

    def __post_init__(self):
        if self.tags.shape != self.forced_material.shape:
            raise ConfigurationError("passive tags and forced materials differ in shape")
        known = {int(t) for t in ElementTag}
        if not set(np.unique(self.tags).tolist()) <= known:
            raise ConfigurationError("unknown passive tag")

    @classmethod
    def all_design(cls, n_elements: int) -> "PassiveMask":
        return cls(
            tags=np.full(n_elements, int(ElementTag.DESIGN), dtype=np.int8),
            forced_material=np.full(n_elements, -1, dtype=int),
        )

    @property
    def design_elements(self) -> np.ndarray:
        return np.flatnonzero(self.tags == ElementTag.DESIGN)

    @property
    def solid_elements(self) -> np.ndarray:
        return np.flatnonzero(self.tags == ElementTag.SOLID)

    @property
    def void_elements(self) -> np.ndarray:
        return np.flatnonzero(self.tags == ElementTag.VOID)

    @property
    def passive(self) -> np.ndarray:
        return self.tags != ElementTag.DESIGN


class BenchmarkProblem(NamedTuple):
    mesh: StructuredMesh
    bcs: BoundaryConditions
    passive: PassiveMask
