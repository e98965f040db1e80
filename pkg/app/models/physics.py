"""Material, flow and projection parameters plus the solved analysis states."""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import SuperLU

from app.core.exceptions import ConfigurationError
from app.schemas.enums import Realization

VOID_MODULUS_RATIO = 1e-6


@dataclass(frozen=True)
class MaterialSet:
    """Candidate moduli, ascending by stiffness, for extended SIMP."""

    moduli: Tuple[float, ...]
    penal: float = 3.0
    poisson: float = 0.4
    thickness: float = 0.01

    def __post_init__(self):
        if len(self.moduli) == 0:
            raise ConfigurationError("at least one candidate material is required", key="moduli")
        if any(not np.isfinite(e) or e <= 0 for e in self.moduli):
            raise ConfigurationError("all moduli must be positive", key="moduli")
        if any(b < a for a, b in zip(self.moduli, self.moduli[1:])):
            raise ConfigurationError("moduli must be ascending by stiffness", key="moduli")
        if self.penal < 1:
            raise ConfigurationError("SIMP penalty must be >= 1", key="penal")
        if not 0 <= self.poisson < 0.5:
            raise ConfigurationError("Poisson ratio must lie in [0, 0.5)", key="poisson")
        if self.thickness <= 0:
            raise ConfigurationError("thickness must be positive", key="thickness")

    @property
    def n_materials(self) -> int:
        return len(self.moduli)

    @property
    def void_modulus(self) -> float:
        return VOID_MODULUS_RATIO * min(self.moduli)

    def scaled(self, factor: float) -> "MaterialSet":
        return MaterialSet(
            moduli=tuple(factor * e for e in self.moduli),
            penal=self.penal,
            poisson=self.poisson,
            thickness=self.thickness,
        )


@dataclass(frozen=True)
class FlowParams:
    """Darcy flow coefficient and drainage parameters.

    ``drainage_base`` is the solid drainage coefficient D_s; it is zero when
    drainage is switched off.
    """

    k_void: float = 1.0
    epsilon: float = 1e-7
    beta_k: float = 10.0
    eta_k: float = 0.1
    beta_d: float = 10.0
    eta_d: float = 0.1
    drainage_base: float = 0.0

    def __post_init__(self):
        if self.k_void <= 0:
            raise ConfigurationError("k_void must be positive", key="k_void")
        if not 0 < self.epsilon < 1:
            raise ConfigurationError("epsilon must lie in (0, 1)", key="epsilon")
        if self.beta_k <= 0 or self.beta_d <= 0:
            raise ConfigurationError("flow Heaviside steepness must be positive", key="beta_k")
        if not 0 < self.eta_k < 1 or not 0 < self.eta_d < 1:
            raise ConfigurationError("flow Heaviside threshold must lie in (0, 1)", key="eta_k")
        if self.drainage_base < 0:
            raise ConfigurationError("drainage coefficient must be non-negative", key="drainage")

    @property
    def k_solid(self) -> float:
        return self.k_void * self.epsilon


@dataclass(frozen=True)
class ProjectionParams:
    """Heaviside projection steepness and the erosion offset."""

    beta: float = 1.0
    delta_eta: float = 0.05

    def __post_init__(self):
        if self.beta < 1:
            raise ConfigurationError("beta must be >= 1", key="beta")
        if not 0 <= self.delta_eta <= 0.5:
            raise ConfigurationError("delta_eta must lie in [0, 0.5]", key="delta_eta")
        if not 0 < self.eta(Realization.ERODED) < 1:
            raise ConfigurationError("eroded threshold must lie in (0, 1)", key="delta_eta")

    def eta(self, realization: Realization) -> float:
        if realization == Realization.ERODED:
            return 0.5 + self.delta_eta
        return 0.5


@dataclass(frozen=True)
class BetaSchedule:
    """Continuation of the projection steepness: multiplied every ``period`` iterations."""

    initial: float = 1.0
    factor: float = 2.0
    period: int = 50
    cap: float = 128.0

    def beta_at(self, iteration: int) -> float:
        """Steepness at a 1-based iteration."""
        if iteration < 1:
            raise ValueError(f"iteration must be >= 1, got {iteration}")
        return float(min(self.cap, self.initial * self.factor ** ((iteration - 1) // self.period)))


@dataclass(frozen=True, eq=False)
class FilterOperator:
    """Row-stochastic density filter matrix W, so that filtered = W @ design."""

    matrix: sp.csr_matrix = field(repr=False)
    radius: float


@dataclass(frozen=True, eq=False)
class FactorizedMatrix:
    """Sparse matrix restricted to its free DOFs, with a reusable LU factor."""

    matrix: sp.csc_matrix = field(repr=False)
    free: np.ndarray = field(repr=False)
    factor: SuperLU = field(repr=False)
    name: str = "matrix"


@dataclass(frozen=True, eq=False)
class PressureState:
    """Solved Darcy problem for one realization."""

    flow_matrix: sp.csc_matrix = field(repr=False)
    system: FactorizedMatrix = field(repr=False)
    pressure: np.ndarray = field(repr=False)
    load: np.ndarray = field(repr=False)
    flow_coefficient: np.ndarray = field(repr=False)
    drainage: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class StiffnessSystem:
    """Assembled stiffness with the output spring, factorized on the free DOFs."""

    stiffness: sp.csc_matrix = field(repr=False)
    system: FactorizedMatrix = field(repr=False)
    modulus: np.ndarray = field(repr=False)
    modulus_gradient: np.ndarray = field(repr=False)
    selector: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class DisplacementSolution:
    displacement: np.ndarray = field(repr=False)
    u_out: float
    strain_energy: float
    residual: float


@dataclass(frozen=True, eq=False)
class RealizationState:
    """Everything computed for one projected realization of a design."""

    realization: Realization
    eta: float
    rho_bar: np.ndarray = field(repr=False)
    drho_bar: np.ndarray = field(repr=False)
    pressure: PressureState = field(repr=False)
    stiffness: StiffnessSystem = field(repr=False)
    solution: DisplacementSolution = field(repr=False)

    @property
    def u_out(self) -> float:
        return self.solution.u_out

    @property
    def strain_energy(self) -> float:
        return self.solution.strain_energy


@dataclass(frozen=True, eq=False)
class AdjointState:
    """Adjoint vectors of one realization.

    ``structural`` is K^-1 l (the negative of the structural multiplier) and
    ``flow`` is A^-1 T^T K^-1 l, zero on Dirichlet pressure nodes.
    """

    realization: Realization
    structural: np.ndarray = field(repr=False)
    flow: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class ElementMatrices:
    """Element integrals shared by every element of a structured grid."""

    stiffness: np.ndarray = field(repr=False)
    conduction: np.ndarray = field(repr=False)
    capacity: np.ndarray = field(repr=False)
    coupling: np.ndarray = field(repr=False)
