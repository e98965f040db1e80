"""Field snapshot writers, readers and symmetry mirroring.

Formats:
    vtk  legacy ASCII grid of quad cells (meshio); cell scalars rho_blueprint_<k>
         and rho_eroded_<k>, point scalars pressure, point vectors displacement.
         Points and cells follow node and element ids.
    csv  one row per element: index, x, y, rho_1 .. rho_m (blueprint), %.17g.
    pgm  binary P5 per blueprint column, 255 = solid, top image row = top of the domain.
"""

import logging
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import meshio
import numpy as np

from app.core.exceptions import ContractViolationError, ExportError
from app.models.mesh import StructuredMesh
from app.models.physics import RealizationState
from app.models.snapshot import FieldSnapshot
from app.schemas.enums import ExportFormat, Realization

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

VALID_AXES = ("bottom", "right")


def snapshot_from_states(mesh: StructuredMesh, states: Dict[Realization, RealizationState]) -> FieldSnapshot:
    """Snapshot of the blueprint pressure and displacement with both density realizations."""
    blueprint = states[Realization.BLUEPRINT]
    eroded = states[Realization.ERODED]
    return FieldSnapshot(
        nelx=mesh.nelx,
        nely=mesh.nely,
        lx=mesh.lx,
        ly=mesh.ly,
        rho_blueprint=np.array(blueprint.rho_bar, dtype=float),
        rho_eroded=np.array(eroded.rho_bar, dtype=float),
        pressure=np.array(blueprint.pressure.pressure, dtype=float),
        displacement=np.array(blueprint.solution.displacement, dtype=float).reshape(-1, 2),
    )


# --- mirroring ---------------------------------------------------------------


def _mirror_once(snapshot: FieldSnapshot, axis: str) -> FieldSnapshot:
    nx, ny = snapshot.nelx, snapshot.nely
    m = snapshot.n_materials

    def elements(values: np.ndarray) -> np.ndarray:
        grid = values.reshape(nx, ny, m)
        if axis == "bottom":
            full = np.concatenate((grid[:, ::-1], grid), axis=1)
        else:
            full = np.concatenate((grid, grid[::-1]), axis=0)
        return full.reshape(-1, m)

    pressure = snapshot.node_grid(snapshot.pressure)
    displacement = snapshot.node_grid(snapshot.displacement)
    if axis == "bottom":
        reflected = displacement[:, :0:-1].copy()
        reflected[..., 1] *= -1.0
        pressure = np.concatenate((pressure[:, :0:-1], pressure), axis=1)
        displacement = np.concatenate((reflected, displacement), axis=1)
        shape = (nx, 2 * ny, snapshot.lx, 2 * snapshot.ly)
    else:
        reflected = displacement[-2::-1].copy()
        reflected[..., 0] *= -1.0
        pressure = np.concatenate((pressure, pressure[-2::-1]), axis=0)
        displacement = np.concatenate((displacement, reflected), axis=0)
        shape = (2 * nx, ny, 2 * snapshot.lx, snapshot.ly)

    nelx, nely, lx, ly = shape
    return FieldSnapshot(
        nelx=nelx,
        nely=nely,
        lx=lx,
        ly=ly,
        rho_blueprint=elements(snapshot.rho_blueprint),
        rho_eroded=elements(snapshot.rho_eroded),
        pressure=pressure.ravel(),
        displacement=displacement.reshape(-1, 2),
    )


def mirror_full_design(snapshot: FieldSnapshot, axes: Sequence[str]) -> FieldSnapshot:
    """Reflect a half or quarter snapshot into the full mechanism.

    Args:
        snapshot: Half or quarter domain fields
        axes: Symmetry edges to reflect across, in order ("bottom" and/or "right")

    Returns:
        FieldSnapshot: Full-domain fields; displacement components normal to
        each mirror line change sign in the reflected copy

    Raises:
        ContractViolationError: If an axis is unknown or repeated
    """
    axes = tuple(axes)
    unknown = [a for a in axes if a not in VALID_AXES]
    if unknown:
        raise ContractViolationError(f"unknown mirror axis {unknown[0]!r}; expected one of {VALID_AXES}")
    if len(set(axes)) != len(axes):
        raise ContractViolationError(f"mirror axes repeat: {axes}")
    for axis in axes:
        snapshot = _mirror_once(snapshot, axis)
    return snapshot


# --- VTK -------------------------------------------------------------------


def _quad_mesh(snapshot: FieldSnapshot) -> Tuple[np.ndarray, np.ndarray]:
    """Node coordinates (x, y, 0) and counter-clockwise quads, both in id order."""
    i, j = np.divmod(np.arange((snapshot.nelx + 1) * (snapshot.nely + 1)), snapshot.nely + 1)
    points = np.column_stack((i * snapshot.dx, j * snapshot.dy, np.zeros(i.size)))
    ei, ej = np.divmod(np.arange(snapshot.n_elements), snapshot.nely)
    n1 = ei * (snapshot.nely + 1) + ej
    n2 = n1 + snapshot.nely + 1
    cells = np.column_stack((n1, n2, n2 + 1, n1 + 1))
    return points, cells


def write_vtk(snapshot: FieldSnapshot, path: PathLike) -> Path:
    """Write the snapshot as a legacy ASCII VTK file of quad cells."""
    path = Path(path)
    points, cells = _quad_mesh(snapshot)
    cell_data = {}
    for label, field in (("rho_blueprint", snapshot.rho_blueprint), ("rho_eroded", snapshot.rho_eroded)):
        for k in range(snapshot.n_materials):
            cell_data[f"{label}_{k + 1}"] = [np.ascontiguousarray(field[:, k], dtype=float)]
    displacement = np.column_stack((snapshot.displacement, np.zeros(len(points))))
    mesh = meshio.Mesh(
        points,
        [("quad", cells)],
        point_data={"pressure": np.asarray(snapshot.pressure, dtype=float), "displacement": displacement},
        cell_data=cell_data,
    )
    try:
        meshio.write(path, mesh, file_format="vtk", binary=False)
    except OSError as e:
        raise ExportError(f"cannot write {path}: {e}", path) from e
    return path


def _read_quad_mesh(path: Path) -> "meshio.Mesh":
    if not path.is_file():
        raise ExportError(f"cannot read {path}: no such file", path)
    try:
        mesh = meshio.read(path, file_format="vtk")
    except Exception as e:
        raise ExportError(f"malformed VTK file {path}: {e}", path) from e
    if len(mesh.cells) != 1 or mesh.cells[0].type != "quad":
        raise ExportError(f"{path} does not hold a single block of quad cells", path)
    return mesh


def read_vtk_cell_data(path: PathLike) -> Dict[str, np.ndarray]:
    """Cell arrays of a file written by ``write_vtk``, in element id order."""
    mesh = _read_quad_mesh(Path(path))
    return {name: np.asarray(blocks[0], dtype=float).ravel() for name, blocks in mesh.cell_data.items()}


def read_vtk(path: PathLike) -> FieldSnapshot:
    """Rebuild the snapshot written by ``write_vtk``.

    Raises:
        ExportError: If the file is missing, malformed or lacks a field
    """
    path = Path(path)
    mesh = _read_quad_mesh(path)
    nelx = np.unique(mesh.points[:, 0]).size - 1
    nely = np.unique(mesh.points[:, 1]).size - 1
    if nelx < 1 or nely < 1 or len(mesh.points) != (nelx + 1) * (nely + 1):
        raise ExportError(f"inconsistent grid in {path}", path)
    try:
        cells = read_vtk_cell_data(path)
        m = sum(1 for name in cells if name.startswith("rho_blueprint_"))
        blueprint = np.column_stack([cells[f"rho_blueprint_{k + 1}"] for k in range(m)])
        eroded = np.column_stack([cells[f"rho_eroded_{k + 1}"] for k in range(m)])
        pressure = np.asarray(mesh.point_data["pressure"], dtype=float).ravel()
        displacement = np.asarray(mesh.point_data["displacement"], dtype=float)[:, :2]
    except (KeyError, ValueError, IndexError) as e:
        raise ExportError(f"{path} lacks field data: {e}", path) from e
    return FieldSnapshot(
        nelx=nelx,
        nely=nely,
        lx=float(mesh.points[:, 0].max()),
        ly=float(mesh.points[:, 1].max()),
        rho_blueprint=blueprint,
        rho_eroded=eroded,
        pressure=pressure,
        displacement=np.ascontiguousarray(displacement),
    )


# --- CSV -------------------------------------------------------------------


def write_fields_csv(snapshot: FieldSnapshot, path: PathLike) -> Path:
    path = Path(path)
    m = snapshot.n_materials
    centroids = snapshot.element_centroids()
    header = ",".join(["index", "x", "y"] + [f"rho_{k + 1}" for k in range(m)])
    rows = [header]
    for e in range(snapshot.n_elements):
        values = [centroids[e, 0], centroids[e, 1], *snapshot.rho_blueprint[e]]
        rows.append(f"{e}," + ",".join(f"{v:.17g}" for v in values))
    _write_text(path, "\n".join(rows) + "\n")
    return path


def read_fields_csv(path: PathLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read ``write_fields_csv`` output.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: Element indices, centroids (n, 2), densities (n, m)
    """
    path = Path(path)
    text = _read_text(path)
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("index,x,y"):
        raise ExportError(f"{path} has no fields header", path)
    try:
        data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]], dtype=float)
    except ValueError as e:
        raise ExportError(f"malformed CSV row in {path}: {e}", path) from e
    data = data.reshape(len(lines) - 1, len(lines[0].split(",")))
    return data[:, 0].astype(int), data[:, 1:3], data[:, 3:]


# --- PGM -------------------------------------------------------------------


def density_image(snapshot: FieldSnapshot, column: int) -> np.ndarray:
    """8-bit image of one blueprint column, shape (nely, nelx), top row first."""
    grid = snapshot.element_grid(snapshot.rho_blueprint[:, column])
    return np.rint(255.0 * np.clip(grid.T[::-1], 0.0, 1.0)).astype(np.uint8)


def write_pgm(image: np.ndarray, path: PathLike) -> Path:
    path = Path(path)
    image = np.asarray(image, dtype=np.uint8)
    height, width = image.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    try:
        path.write_bytes(header + image.tobytes())
    except OSError as e:
        raise ExportError(f"cannot write {path}: {e}", path) from e
    return path


def read_pgm(path: PathLike) -> np.ndarray:
    """Read a binary P5 file with maxval 255."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ExportError(f"cannot read {path}: {e}", path) from e
    fields: List[bytes] = []
    position = 0
    while len(fields) < 4:
        while position < len(raw) and raw[position : position + 1].isspace():
            position += 1
        if raw[position : position + 1] == b"#":
            position = raw.index(b"\n", position) + 1
            continue
        start = position
        while position < len(raw) and not raw[position : position + 1].isspace():
            position += 1
        if start == position:
            raise ExportError(f"{path} has a truncated header", path)
        fields.append(raw[start:position])
    position += 1
    magic, width, height, maxval = fields
    if magic != b"P5" or int(maxval) != 255:
        raise ExportError(f"{path} is not an 8-bit binary PGM", path)
    width, height = int(width), int(height)
    pixels = np.frombuffer(raw[position : position + width * height], dtype=np.uint8)
    if pixels.size != width * height:
        raise ExportError(f"{path} has {pixels.size} pixels, expected {width * height}", path)
    return pixels.reshape(height, width)


# --- orchestration ---------------------------------------------------------


def export_snapshot(
    snapshot: FieldSnapshot,
    directory: PathLike,
    formats: Iterable[Union[str, ExportFormat]],
    prefix: str = "",
) -> List[Path]:
    """Write the snapshot in every requested format and return the written paths.

    Raises:
        ExportError: If the directory cannot be created or a file cannot be written
    """
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ExportError(f"cannot create {directory}: {e}", directory) from e

    written: List[Path] = []
    for fmt in (ExportFormat(f) for f in formats):
        if fmt == ExportFormat.VTK:
            written.append(write_vtk(snapshot, directory / f"{prefix}fields.vtk"))
        elif fmt == ExportFormat.CSV:
            written.append(write_fields_csv(snapshot, directory / f"{prefix}fields.csv"))
        elif fmt == ExportFormat.PGM:
            for k in range(snapshot.n_materials):
                written.append(write_pgm(density_image(snapshot, k), directory / f"{prefix}rho_{k + 1}.pgm"))
    logger.info(f"Exported {len(written)} file(s) to {directory}")
    return written


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="ascii")
    except OSError as e:
        raise ExportError(f"cannot write {path}: {e}", path) from e


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as e:
        raise ExportError(f"cannot read {path}: {e}", path) from e
