"""Iteration history and run summary schemas."""

from typing import List, Optional

from pydantic import BaseModel, Field


class IterationRecord(BaseModel):
    """One optimizer iteration."""

    iteration: int = Field(..., description="1-based iteration index", ge=1)
    f0: float = Field(..., description="max(u_out eroded, u_out blueprint) in m")
    u_out_eroded: float = Field(..., description="Eroded output displacement in m")
    u_out_blueprint: float = Field(..., description="Blueprint output displacement in m")
    strain_energy: float = Field(..., description="Eroded strain energy SE^e in J")
    se_star: float = Field(..., description="Strain-energy cap SE* in J")
    g2: float = Field(..., description="SE^e / SE*")
    volumes: List[float] = Field(..., description="Blueprint volume ratios, feasible when <= 1")
    beta: float = Field(..., description="Projection steepness")
    change: float = Field(..., description="max |delta rho| of this update")
    wall_time: Optional[float] = Field(default=None, description="Seconds spent on this iteration")


class RunSummary(BaseModel):
    """Final state of one optimization run."""

    run_id: str
    name: str
    benchmark: str
    n_materials: int
    nelx: int
    nely: int
    iterations: int
    converged: bool
    termination_reason: str
    f0: float
    u_out_eroded: float
    u_out_blueprint: float
    strain_energy: float
    se_star: float
    g2: float
    volumes: List[float]
    volume_limits: List[float]
    beta: float
    full_nelx: Optional[int] = None
    full_nely: Optional[int] = None
    files: List[str] = Field(default_factory=list)
