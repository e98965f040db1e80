"""Structured grid construction and the benchmark domains."""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from app.core.exceptions import ConfigurationError
from app.models.mesh import BenchmarkProblem, BoundaryConditions, PassiveMask, StructuredMesh
from app.schemas.enums import ElementTag

logger = logging.getLogger(__name__)

BENCHMARKS = ("gripper", "contractor", "comparison-case", "patch")

# name -> (nelx, nely, lx, ly)
DEFAULT_GRIDS = {
    "gripper": (200, 100, 0.2, 0.1),
    "contractor": (100, 100, 0.1, 0.1),
    "comparison-case": (100, 50, 0.2, 0.1),
    "patch": (6, 4, 0.06, 0.04),
}

MIRROR_AXES = {
    "gripper": ("bottom",),
    "comparison-case": ("bottom",),
    "contractor": ("right", "bottom"),
    "patch": (),
}


def build_grid(nelx: int, nely: int, lx: float, ly: float, thickness: float) -> StructuredMesh:
    """Build a structured grid of bilinear quadrilaterals.

    Args:
        nelx: Elements in x
        nely: Elements in y
        lx: Domain width in m
        ly: Domain height in m
        thickness: Out-of-plane depth in m

    Returns:
        StructuredMesh: Column-major numbered grid

    Raises:
        ConfigurationError: If any dimension is not positive
    """
    for key, value in (("nelx", nelx), ("nely", nely)):
        if int(value) != value or value <= 0:
            raise ConfigurationError(f"{key} must be a positive integer, got {value}", key=key)
    for key, value in (("lx", lx), ("ly", ly), ("thickness", thickness)):
        if not math.isfinite(value) or value <= 0:
            raise ConfigurationError(f"{key} must be positive, got {value}", key=key)
    nelx, nely = int(nelx), int(nely)

    i, j = np.divmod(np.arange(nelx * nely), nely)
    n1 = i * (nely + 1) + j
    n2 = (i + 1) * (nely + 1) + j
    pdof = np.column_stack((n1, n2, n2 + 1, n1 + 1))
    edof = np.empty((nelx * nely, 8), dtype=int)
    edof[:, 0::2] = 2 * pdof
    edof[:, 1::2] = 2 * pdof + 1

    ni, nj = np.divmod(np.arange((nelx + 1) * (nely + 1)), nely + 1)
    coords = np.column_stack((ni * (lx / nelx), nj * (ly / nely)))

    return StructuredMesh(
        nelx=nelx,
        nely=nely,
        lx=float(lx),
        ly=float(ly),
        thickness=float(thickness),
        edof=edof,
        pdof=pdof,
        node_coords=coords,
    )


def block_count(size: float, pitch: float) -> int:
    """Number of elements covering a passive block edge; never below one."""
    return max(1, int(round(size / pitch)))


def mirror_axes(name: str) -> Tuple[str, ...]:
    """Reflections that rebuild the full mechanism from the modelled part."""
    if name not in MIRROR_AXES:
        raise ConfigurationError(f"Unknown benchmark '{name}'", key="benchmark")
    return MIRROR_AXES[name]


def _pressure_bc(
    mesh: StructuredMesh, input_edges: Tuple[str, ...], outlet_edges: Tuple[str, ...], pressure: float
) -> Tuple[np.ndarray, np.ndarray]:
    # input edges take precedence at shared corners
    inlet = np.unique(np.concatenate([mesh.edge_nodes(e) for e in input_edges]))
    outlet = np.unique(np.concatenate([mesh.edge_nodes(e) for e in outlet_edges]))
    outlet = np.setdiff1d(outlet, inlet)
    nodes = np.concatenate((inlet, outlet))
    values = np.concatenate((np.full(len(inlet), float(pressure)), np.zeros(len(outlet))))
    order = np.argsort(nodes)
    return nodes[order], values[order]


def _port_and_pad(mesh: StructuredMesh, passive_tags: np.ndarray) -> Tuple[int, np.ndarray]:
    """Tag the output-port blocks and the support pad; return the output node and support nodes."""
    nelx, nely = mesh.nelx, mesh.nely
    n_void_x = min(nelx, block_count(mesh.lx / 5, mesh.dx))
    n_void_y = min(nely - 1, block_count(mesh.ly / 5, mesh.dy))
    n_jaw_y = min(nely - n_void_y, block_count(mesh.ly / 50, mesh.dy))
    n_pad_x = min(nelx - n_void_x, block_count(mesh.lx / 20, mesh.dx))
    n_pad_y = min(nely - n_void_y - n_jaw_y, block_count(mesh.ly / 20, mesh.dy))

    void = mesh.element_block((nelx - n_void_x, nelx), (0, n_void_y))
    jaw = mesh.element_block((nelx - n_void_x, nelx), (n_void_y, n_void_y + n_jaw_y))
    pad = mesh.element_block((0, n_pad_x), (nely - n_pad_y, nely))
    passive_tags[void] = ElementTag.VOID
    passive_tags[jaw] = ElementTag.SOLID
    passive_tags[pad] = ElementTag.SOLID

    output_node = mesh.node_id(nelx, n_void_y)
    support_nodes = np.array([mesh.node_id(0, j) for j in range(nely - n_pad_y, nely + 1)])
    return output_node, support_nodes


def _dofs(nodes: np.ndarray, component: Optional[int] = None) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=int)
    if component is None:
        return np.sort(np.concatenate((2 * nodes, 2 * nodes + 1)))
    return np.sort(2 * nodes + component)


def build_benchmark(
    name: str,
    nelx: Optional[int] = None,
    nely: Optional[int] = None,
    thickness: float = 0.01,
    input_pressure: float = 1e5,
    spring_stiffness: float = 5e4,
) -> BenchmarkProblem:
    """Build the mesh, boundary conditions and passive mask of a benchmark.

    gripper / comparison-case: symmetric half over 0.2 x 0.1 m with the
    symmetry line at the bottom edge. Pressure enters through the left edge
    and vents through the top and right edges. The output port sits at the
    bottom-right (void block, solid jaw strip above it); the support pad
    sits at the top-left with its left-edge nodes clamped.

    contractor: top-left quarter over 0.1 x 0.1 m with symmetry lines at
    the right and bottom edges. Pressure enters through the left edge and
    vents through the top edge. The output node lies on the vertical
    symmetry line, so the quarter carries half the spring.

    patch: small fully-designable check domain, clamped and pressurized on
    the left edge, vented on the right, output = x-DOF of the top-right node.

    Raises:
        ConfigurationError: If the benchmark name is unknown
    """
    if name not in DEFAULT_GRIDS:
        raise ConfigurationError(
            f"Unknown benchmark '{name}'; expected one of {', '.join(BENCHMARKS)}",
            key="benchmark",
        )
    default_nelx, default_nely, lx, ly = DEFAULT_GRIDS[name]
    mesh = build_grid(nelx or default_nelx, nely or default_nely, lx, ly, thickness)
    tags = np.full(mesh.n_elements, int(ElementTag.DESIGN), dtype=np.int8)
    no_dofs = np.array([], dtype=int)

    if name == "patch":
        nodes, values = _pressure_bc(mesh, ("left",), ("right",), input_pressure)
        bcs = BoundaryConditions(
            fixed_dofs=_dofs(mesh.edge_nodes("left")),
            symmetry_dofs=no_dofs,
            pressure_nodes=nodes,
            pressure_values=values,
            output_dof=2 * mesh.node_id(mesh.nelx, mesh.nely),
            spring_stiffness=spring_stiffness,
        )
    elif name in ("gripper", "comparison-case"):
        output_node, support_nodes = _port_and_pad(mesh, tags)
        nodes, values = _pressure_bc(mesh, ("left",), ("top", "right"), input_pressure)
        bcs = BoundaryConditions(
            fixed_dofs=_dofs(support_nodes),
            symmetry_dofs=_dofs(mesh.edge_nodes("bottom"), component=1),
            pressure_nodes=nodes,
            pressure_values=values,
            output_dof=2 * output_node + 1,
            spring_stiffness=spring_stiffness,
        )
    else:
        output_node, support_nodes = _port_and_pad(mesh, tags)
        nodes, values = _pressure_bc(mesh, ("left",), ("top",), input_pressure)
        bcs = BoundaryConditions(
            fixed_dofs=_dofs(support_nodes),
            symmetry_dofs=np.union1d(
                _dofs(mesh.edge_nodes("right"), component=0),
                _dofs(mesh.edge_nodes("bottom"), component=1),
            ),
            pressure_nodes=nodes,
            pressure_values=values,
            output_dof=2 * output_node + 1,
            spring_stiffness=0.5 * spring_stiffness,
        )

    passive = PassiveMask(tags=tags, forced_material=np.full(mesh.n_elements, -1, dtype=int))
    logger.info(
        f"Benchmark {name}: {mesh.nelx}x{mesh.nely} over {mesh.lx}x{mesh.ly} m, "
        f"{len(passive.design_elements)} design / {len(passive.solid_elements)} solid / "
        f"{len(passive.void_elements)} void elements, output DOF {bcs.output_dof}"
    )
    return BenchmarkProblem(mesh=mesh, bcs=bcs, passive=passive)
