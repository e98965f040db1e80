"""Read-only endpoints over presets and stored optimization runs."""

from typing import List

from fastapi import APIRouter, Depends, HTTPException, Request
from pydantic import BaseModel, Field

from app.core.exceptions import ConfigurationError, RunNotFoundError, TopOptError
from app.core.presets import list_presets
from app.core.security import get_current_api_key
from app.schemas.config import RunConfig
from app.schemas.results import IterationRecord, RunSummary
from app.services.config_service import config_from_preset
from app.services.run_store import RunStore

router = APIRouter()


class PresetList(BaseModel):
    """Names of the built-in presets."""

    presets: List[str] = Field(..., description="Preset names accepted by --benchmark")


class RunList(BaseModel):
    """Run directories under the results root."""

    runs: List[str] = Field(..., description="Run ids, sorted")


def get_run_store(request: Request) -> RunStore:
    """Dependency returning the store created at startup."""
    return request.app.state.run_store


def handle_topopt_error(error: Exception) -> HTTPException:
    """Convert engine errors to HTTP exceptions.

    Args:
        error: Raised engine error

    Returns:
        HTTPException: 404 for unknown runs or presets, 422 for invalid input, 500 otherwise
    """
    if isinstance(error, RunNotFoundError):
        return HTTPException(status_code=404, detail={"message": str(error), "type": "not_found"})

    if isinstance(error, ConfigurationError):
        status_code = 404 if error.key == "preset" else 422
        return HTTPException(
            status_code=status_code,
            detail={"message": str(error), "type": "configuration_error", "key": error.key},
        )

    if isinstance(error, TopOptError):
        return HTTPException(status_code=500, detail={"message": str(error), "type": "engine_error"})

    return HTTPException(status_code=500, detail={"message": "Unexpected error", "type": "unknown_error"})


@router.get("/benchmarks", response_model=PresetList)
async def get_benchmarks() -> PresetList:
    """List the built-in presets."""
    return PresetList(presets=list_presets())


@router.get("/benchmarks/{preset}", response_model=RunConfig)
async def get_benchmark(preset: str) -> RunConfig:
    """Expanded, validated configuration of one preset."""
    try:
        return config_from_preset(preset)
    except TopOptError as e:
        raise handle_topopt_error(e)


@router.get("/", response_model=RunList)
async def get_runs(
    store: RunStore = Depends(get_run_store),
    api_key: str = Depends(get_current_api_key),
) -> RunList:
    """List stored runs."""
    return RunList(runs=store.list_runs())


@router.get("/{run_id}/summary", response_model=RunSummary)
async def get_run_summary(
    run_id: str,
    store: RunStore = Depends(get_run_store),
    api_key: str = Depends(get_current_api_key),
) -> RunSummary:
    """Final summary of one run."""
    try:
        return store.read_summary(run_id)
    except TopOptError as e:
        raise handle_topopt_error(e)


@router.get("/{run_id}/history", response_model=List[IterationRecord])
async def get_run_history(
    run_id: str,
    store: RunStore = Depends(get_run_store),
    api_key: str = Depends(get_current_api_key),
) -> List[IterationRecord]:
    """Iteration history of one run."""
    try:
        return store.read_history(run_id)
    except TopOptError as e:
        raise handle_topopt_error(e)
