"""Central finite-difference validation of the adjoint gradients on a small mesh."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence

import numpy as np

from app.core.presets import THREE_MATERIALS, TWO_MATERIALS
from app.schemas.config import RunConfig
from app.schemas.enums import Realization
from app.services.analysis_service import MechanismAnalysis
from app.services.sensitivity_service import objective_gradient, strain_energy_gradient, to_design_gradient

logger = logging.getLogger(__name__)

TOLERANCE = 1e-3
CHECK_MATERIALS = {1: [1e8], 2: TWO_MATERIALS, 3: THREE_MATERIALS}
CHECK_FRACTIONS = {1: [0.3], 2: [0.2, 0.1], 3: [0.1, 0.1, 0.05]}


@dataclass
class FunctionCheck:
    name: str
    value: float
    max_relative_error: float
    compared: int


@dataclass
class GradientCheckReport:
    n_materials: int
    checks: List[FunctionCheck] = field(default_factory=list)
    tolerance: float = TOLERANCE

    @property
    def max_relative_error(self) -> float:
        return max((c.max_relative_error for c in self.checks), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_relative_error <= self.tolerance


def check_config(n_materials: int, nelx: int = 6, nely: int = 4) -> RunConfig:
    """Patch-domain configuration used by the check; a short filter keeps it local."""
    if n_materials not in CHECK_MATERIALS:
        raise ValueError(f"gradient check supports 1 to 3 materials, got {n_materials}")
    return RunConfig.model_validate(
        {
            "name": f"fd-check-{n_materials}mat",
            "benchmark": "patch",
            "mesh": {"nelx": nelx, "nely": nely},
            "materials": {"moduli": CHECK_MATERIALS[n_materials]},
            "volume_fractions": CHECK_FRACTIONS[n_materials],
            "projection": {"filter_radius_factor": 1.5},
        }
    )


def compare_gradients(adjoint: np.ndarray, fd: np.ndarray, value: float, h: float) -> FunctionCheck:
    """Largest relative error over components above the finite-difference noise floor."""
    adjoint = np.ravel(adjoint)
    fd = np.ravel(fd)
    floor = max(1e-8 * float(np.max(np.abs(adjoint), initial=0.0)), 1e4 * np.finfo(float).eps * abs(value) / h)
    mask = np.abs(fd) > floor
    if not np.any(mask):
        return FunctionCheck(name="", value=value, max_relative_error=0.0, compared=0)
    errors = np.abs(adjoint[mask] - fd[mask]) / np.abs(fd[mask])
    return FunctionCheck(name="", value=value, max_relative_error=float(errors.max()), compared=int(mask.sum()))


def central_difference(function: Callable[[np.ndarray], Sequence[float]], rho: np.ndarray, h: float) -> np.ndarray:
    """Central differences of a vector-valued function, shape (outputs, n, m)."""
    base = np.asarray(function(rho))
    result = np.zeros((len(base),) + rho.shape)
    for index in np.ndindex(rho.shape):
        plus = rho.copy()
        minus = rho.copy()
        plus[index] += h
        minus[index] -= h
        result[(slice(None),) + index] = (np.asarray(function(plus)) - np.asarray(function(minus))) / (2 * h)
    return result


def run_gradient_check(
    n_materials: int,
    nelx: int = 6,
    nely: int = 4,
    seed: int = 0,
    h: float = 1e-6,
    beta: float = 1.0,
) -> GradientCheckReport:
    """Compare adjoint gradients of u_out (both realizations) and g2 against central differences.

    Args:
        n_materials: Number of candidate materials (1 to 3)
        nelx: Elements in x of the patch domain
        nely: Elements in y of the patch domain
        seed: Seed of the random design in [0.2, 0.8]
        h: Finite-difference step
        beta: Projection steepness

    Returns:
        GradientCheckReport: Per-function maximum relative errors
    """
    analysis = MechanismAnalysis.from_config(check_config(n_materials, nelx, nely))
    mesh = analysis.mesh
    rho = np.random.default_rng(seed).uniform(0.2, 0.8, (mesh.n_elements, n_materials))

    states = analysis.analyze(rho, beta)
    se_star = states[Realization.ERODED].strain_energy
    names = ["u_out_eroded", "u_out_blueprint", "g2"]

    def evaluate(x: np.ndarray) -> List[float]:
        s = analysis.analyze(x, beta)
        return [
            s[Realization.ERODED].u_out,
            s[Realization.BLUEPRINT].u_out,
            s[Realization.ERODED].strain_energy / se_star,
        ]

    adjoint: Dict[str, np.ndarray] = {}
    for realization, name in ((Realization.ERODED, names[0]), (Realization.BLUEPRINT, names[1])):
        state = states[realization]
        df = objective_gradient(mesh, state, analysis.elements, analysis.flow, analysis.transformation)
        adjoint[name] = to_design_gradient(df, state.drho_bar, analysis.filter, analysis.passive)
    eroded = states[Realization.ERODED]
    dg2 = strain_energy_gradient(mesh, eroded, analysis.elements, analysis.flow, analysis.transformation, se_star)
    adjoint[names[2]] = to_design_gradient(dg2, eroded.drho_bar, analysis.filter, analysis.passive)

    values = evaluate(rho)
    fd = central_difference(evaluate, rho, h)
    report = GradientCheckReport(n_materials=n_materials)
    for k, name in enumerate(names):
        check = compare_gradients(adjoint[name], fd[k], values[k], h)
        check.name = name
        report.checks.append(check)
        level = logging.INFO if check.max_relative_error <= TOLERANCE else logging.WARNING
        logger.log(
            level,
            f"m={n_materials} {name}: value={check.value:.6e}, "
            f"max rel error={check.max_relative_error:.2e} over {check.compared} components",
        )
    return report
