"""Robust min-max optimization loop driven by MMA."""

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from app.core.exceptions import AnalysisAbortedError, TopOptError
from app.models.physics import BetaSchedule, RealizationState
from app.schemas.config import RunConfig
from app.schemas.enums import Realization
from app.schemas.results import IterationRecord
from app.services.analysis_service import MechanismAnalysis
from app.services.mma import MMASolver
from app.services.sensitivity_service import (
    adjoint_state,
    objective_gradient,
    strain_energy_gradient,
    to_design_gradient,
    volume_gradients,
    volume_limits,
    volume_values,
)

logger = logging.getLogger(__name__)

SE_STAR_FALLBACK = 0.5
U_REF_FLOOR = 1e-15


def compute_se_star(strain_energy: float) -> float:
    """Strain-energy cap from the first eroded analysis.

    The value is floored, then half a unit is added when the fractional
    part exceeds 0.5. A zero cap falls back to 0.5 with a warning.
    """
    floor = math.floor(strain_energy)
    se_star = float(floor) if strain_energy - floor <= 0.5 else floor + 0.5
    if se_star <= 0:
        logger.warning(
            f"SE^e = {strain_energy:.6g} J at the first iteration gives SE* = 0; "
            f"using SE* = {SE_STAR_FALLBACK}"
        )
        se_star = SE_STAR_FALLBACK
    logger.info(f"SE* = {se_star:g} J from SE^e = {strain_energy:.6g} J")
    return se_star


def beta_schedule_from_config(config: RunConfig) -> BetaSchedule:
    projection = config.projection
    return BetaSchedule(
        initial=projection.beta_initial,
        factor=projection.beta_factor,
        period=projection.beta_period,
        cap=projection.beta_max,
    )


def initial_design(config: RunConfig, analysis: MechanismAnalysis) -> np.ndarray:
    """Uniform design at the volume limits, or a seeded perturbation of it."""
    n = analysis.mesh.n_elements
    fractions = list(config.volume_fractions)
    row = [sum(fractions)] + fractions[1:] if len(fractions) > 1 else fractions
    rho = np.tile(np.asarray(row, dtype=float), (n, 1))
    if config.initial_design.kind == "random":
        rng = np.random.default_rng(config.seed)
        rho = rho + rng.uniform(-config.initial_design.amplitude, config.initial_design.amplitude, rho.shape)
        rho = np.clip(rho, 0.0, 1.0)
    return analysis.pin_design(rho)


@dataclass
class OptimizationResult:
    rho: np.ndarray = field(repr=False)
    history: List[IterationRecord] = field(repr=False)
    final: Dict[Realization, RealizationState] = field(repr=False)
    se_star: float
    u_ref: float
    iterations: int
    converged: bool
    termination_reason: str
    beta: float
    volumes: List[float]
    volume_limits: List[float]

    @property
    def f0(self) -> float:
        return max(self.final[Realization.ERODED].u_out, self.final[Realization.BLUEPRINT].u_out)

    @property
    def g2(self) -> float:
        return self.final[Realization.ERODED].strain_energy / self.se_star


class TopologyOptimizer:
    """Minimize the worst of the eroded and blueprint output displacements.

    Design vector: raw variables of designable elements (element-major,
    column-minor) followed by a bound variable z. Constraints passed to MMA:
    s u_e / u_ref - z, s u_b / u_ref - z, volume ratios - 1, SE^e / SE* - 1.
    """

    def __init__(
        self,
        config: RunConfig,
        analysis: Optional[MechanismAnalysis] = None,
        on_iteration: Optional[Callable[[IterationRecord], None]] = None,
        checkpoint_dir: Optional[Path] = None,
    ):
        self.config = config
        self.analysis = analysis or MechanismAnalysis.from_config(config)
        self.on_iteration = on_iteration
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else None
        self.schedule = beta_schedule_from_config(config)
        self.limits = volume_limits(config.volume_fractions)
        self.design = self.analysis.passive.design_elements
        self.n_materials = self.analysis.n_materials

    def _pack(self, rho: np.ndarray, z: float) -> np.ndarray:
        return np.concatenate((rho[self.design].ravel(), [z]))

    def _unpack(self, x: np.ndarray, rho: np.ndarray) -> np.ndarray:
        rho = rho.copy()
        rho[self.design] = x[:-1].reshape(len(self.design), self.n_materials)
        return rho

    def _design_rows(self, gradient: np.ndarray) -> np.ndarray:
        return gradient[self.design].ravel()

    def _analyze(self, rho: np.ndarray, beta: float, iteration: int) -> Dict[Realization, RealizationState]:
        try:
            return self.analysis.analyze(rho, beta)
        except TopOptError as e:
            checkpoint = self._checkpoint(rho, beta, iteration)
            raise AnalysisAbortedError(
                f"Analysis failed at iteration {iteration}: {e}", iteration, checkpoint
            ) from e

    def _checkpoint(self, rho: np.ndarray, beta: float, iteration: int) -> Optional[Path]:
        if self.checkpoint_dir is None:
            return None
        self.checkpoint_dir.mkdir(parents=True, exist_ok=True)
        path = self.checkpoint_dir / "checkpoint.npz"
        np.savez(path, rho=rho, beta=beta, iteration=iteration)
        logger.error(f"Checkpoint written to {path}")
        return path

    def run(self) -> OptimizationResult:
        """Run the optimization until the design settles at the final beta or the budget ends.

        Outputs enter MMA as objective_scale * u / u_ref, with u_ref the larger
        output magnitude of iteration 1, frozen for the rest of the run.

        Raises:
            AnalysisAbortedError: If an analysis fails; a checkpoint is written first
        """
        config = self.config
        opt = config.optimizer
        analysis = self.analysis
        mesh = analysis.mesh
        scale = opt.objective_scale
        n_design = len(self.design) * self.n_materials

        rho = initial_design(config, analysis)
        n = n_design + 1
        xmin = np.concatenate((np.zeros(n_design), [-opt.bound_limit]))
        xmax = np.concatenate((np.ones(n_design), [opt.bound_limit]))
        n_constraints = 2 + len(self.limits) + 1
        solver = MMASolver(n, n_constraints, xmin, xmax, move=opt.move_limit)

        history: List[IterationRecord] = []
        se_star = u_ref = z = 0.0
        converged = False
        reason = "max_iterations"
        beta = self.schedule.beta_at(1)
        iteration = 0

        for iteration in range(1, opt.max_iterations + 1):
            started = time.perf_counter()
            beta = self.schedule.beta_at(iteration)
            states = self._analyze(rho, beta, iteration)
            eroded = states[Realization.ERODED]
            blueprint = states[Realization.BLUEPRINT]

            if iteration == 1:
                u_ref = max(abs(eroded.u_out), abs(blueprint.u_out))
                if u_ref < U_REF_FLOOR:
                    u_ref = 1.0
                se_star = compute_se_star(eroded.strain_energy)
                z = scale * max(eroded.u_out, blueprint.u_out) / u_ref

            grads = {}
            for realization, state in states.items():
                adjoint = adjoint_state(mesh, state, analysis.transformation)
                df = objective_gradient(
                    mesh, state, analysis.elements, analysis.flow, analysis.transformation, adjoint
                )
                grads[realization] = to_design_gradient(df, state.drho_bar, analysis.filter, analysis.passive)
            dg2 = to_design_gradient(
                strain_energy_gradient(
                    mesh, eroded, analysis.elements, analysis.flow, analysis.transformation, se_star
                ),
                eroded.drho_bar,
                analysis.filter,
                analysis.passive,
            )
            volumes = volume_values(mesh, blueprint.rho_bar, self.limits)
            dvol = volume_gradients(mesh, blueprint.drho_bar, analysis.filter, self.limits, analysis.passive)
            g2 = eroded.strain_energy / se_star

            fval = np.concatenate(
                (
                    [scale * eroded.u_out / u_ref - z, scale * blueprint.u_out / u_ref - z],
                    volumes - 1.0,
                    [g2 - 1.0],
                )
            )
            rows = [
                np.append(scale / u_ref * self._design_rows(grads[Realization.ERODED]), -1.0),
                np.append(scale / u_ref * self._design_rows(grads[Realization.BLUEPRINT]), -1.0),
            ]
            rows += [np.append(self._design_rows(g), 0.0) for g in dvol]
            rows.append(np.append(self._design_rows(dg2), 0.0))
            df0dx = np.zeros(n)
            df0dx[-1] = 1.0

            x = self._pack(rho, z)
            x_new, _ = solver.update(x, df0dx, fval, np.vstack(rows))
            change = float(np.max(np.abs(x_new[:-1] - x[:-1]))) if n_design else 0.0
            rho = self._unpack(x_new, rho)
            z = float(x_new[-1])

            record = IterationRecord(
                iteration=iteration,
                f0=max(eroded.u_out, blueprint.u_out),
                u_out_eroded=eroded.u_out,
                u_out_blueprint=blueprint.u_out,
                strain_energy=eroded.strain_energy,
                se_star=se_star,
                g2=g2,
                volumes=[float(v) for v in volumes],
                beta=beta,
                change=change,
                wall_time=time.perf_counter() - started,
            )
            history.append(record)
            if self.on_iteration is not None:
                self.on_iteration(record)
            logger.info(
                f"it {iteration:4d} f0={record.f0:+.6e} ue={eroded.u_out:+.6e} "
                f"ub={blueprint.u_out:+.6e} vol={' '.join(f'{v:.4f}' for v in volumes)} "
                f"g2={g2:.4f} beta={beta:g} change={change:.2e}"
            )

            if change < opt.change_tolerance and beta >= self.schedule.cap:
                converged = True
                reason = "converged"
                break

        logger.info(f"Optimization stopped after {iteration} iterations: {reason}")
        final = self._analyze(rho, beta, iteration)
        final_volumes = volume_values(mesh, final[Realization.BLUEPRINT].rho_bar, self.limits)
        return OptimizationResult(
            rho=rho,
            history=history,
            final=final,
            se_star=se_star,
            u_ref=u_ref,
            iterations=iteration,
            converged=converged,
            termination_reason=reason,
            beta=beta,
            volumes=[float(v) for v in final_volumes],
            volume_limits=self.limits,
        )
