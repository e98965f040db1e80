"""Run configuration schema."""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

SCHEMA_VERSION = 1

BenchmarkName = Literal["gripper", "contractor", "comparison-case", "patch"]


class MeshConfig(BaseModel):
    """Grid resolution; None keeps the benchmark's own resolution."""

    model_config = ConfigDict(extra="forbid")

    nelx: Optional[int] = Field(default=None, description="Elements in x", gt=0)
    nely: Optional[int] = Field(default=None, description="Elements in y", gt=0)


class MaterialConfig(BaseModel):
    """Candidate materials for extended SIMP."""

    model_config = ConfigDict(extra="forbid")

    moduli: List[float] = Field(
        ..., description="Young's moduli in N/m^2, ascending", min_length=1
    )
    penal: float = Field(default=3.0, description="SIMP penalty", ge=1.0)
    poisson: float = Field(default=0.4, description="Poisson ratio", ge=0.0, lt=0.5)
    thickness: float = Field(default=0.01, description="Out-of-plane depth in m", gt=0)

    @model_validator(mode="after")
    def _check_moduli(self) -> "MaterialConfig":
        if any(e <= 0 for e in self.moduli):
            raise ValueError("all moduli must be positive")
        if any(b < a for a, b in zip(self.moduli, self.moduli[1:])):
            raise ValueError("moduli must be ordered ascending by stiffness")
        return self


class ProjectionConfig(BaseModel):
    """Heaviside projection and beta continuation."""

    model_config = ConfigDict(extra="forbid")

    delta_eta: float = Field(default=0.05, description="Erosion offset", ge=0.0, le=0.5)
    beta_initial: float = Field(default=1.0, ge=1.0)
    beta_factor: float = Field(default=2.0, ge=1.0)
    beta_period: int = Field(default=50, description="Iterations per beta step", gt=0)
    beta_max: float = Field(default=128.0, ge=1.0)
    filter_radius_factor: float = Field(
        default=8.4, description="Filter radius in multiples of the min element edge", gt=0
    )


class FlowConfig(BaseModel):
    """Darcy flow with drainage."""

    model_config = ConfigDict(extra="forbid")

    k_void: float = Field(default=1.0, description="Void flow coefficient", gt=0)
    epsilon: float = Field(default=1e-7, description="K_s / K_v", gt=0, lt=1)
    beta_k: float = Field(default=10.0, gt=0)
    eta_k: float = Field(default=0.1, gt=0, lt=1)
    beta_d: float = Field(default=10.0, gt=0)
    eta_d: float = Field(default=0.1, gt=0, lt=1)
    drainage_ratio: float = Field(
        default=0.1, description="Pressure fraction left after the penetration depth", gt=0, lt=1
    )
    drainage_distance: float = Field(
        default=2.0, description="Penetration depth in element edges", gt=0
    )
    drainage: bool = Field(default=True, description="Include the drainage term")


class OptimizerConfig(BaseModel):
    """MMA and outer loop controls."""

    model_config = ConfigDict(extra="forbid")

    max_iterations: int = Field(default=400, ge=1)
    move_limit: float = Field(default=0.1, gt=0, le=1)
    objective_scale: float = Field(default=10.0, gt=0)
    change_tolerance: float = Field(default=1e-4, gt=0)
    bound_limit: float = Field(default=1000.0, description="|z| bound of the min-max variable", gt=0)


class InitialDesignConfig(BaseModel):
    """Starting design."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["uniform", "random"] = "uniform"
    amplitude: float = Field(default=0.05, ge=0.0, le=0.5)


class RunConfig(BaseModel):
    """Complete, validated configuration of one optimization run."""

    model_config = ConfigDict(extra="forbid")

    schema_version: int = Field(default=SCHEMA_VERSION)
    name: str = Field(default="run", min_length=1, max_length=100)
    benchmark: BenchmarkName
    mesh: MeshConfig = Field(default_factory=MeshConfig)
    materials: MaterialConfig
    volume_fractions: List[float] = Field(..., min_length=1)
    projection: ProjectionConfig = Field(default_factory=ProjectionConfig)
    flow: FlowConfig = Field(default_factory=FlowConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    initial_design: InitialDesignConfig = Field(default_factory=InitialDesignConfig)
    input_pressure: float = Field(default=1e5, description="Applied pressure in Pa", ge=0)
    spring_stiffness: float = Field(default=5e4, description="Output spring k_ss in N/m", ge=0)
    seed: int = Field(default=0, ge=0)
    output_dir: Optional[str] = Field(default=None, description="Overrides RESULTS_DIR")

    @property
    def n_materials(self) -> int:
        return len(self.materials.moduli)

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunConfig":
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported schema_version {self.schema_version}, expected {SCHEMA_VERSION}"
            )
        if len(self.volume_fractions) != self.n_materials:
            raise ValueError(
                "volume_fractions must have one entry per candidate material "
                f"({len(self.volume_fractions)} != {self.n_materials})"
            )
        if any(v <= 0 for v in self.volume_fractions):
            raise ValueError("volume fractions must be positive")
        if sum(self.volume_fractions) > 1.0:
            raise ValueError(
                f"sum of volume fractions {sum(self.volume_fractions):.4f} exceeds 1"
            )
        return self
