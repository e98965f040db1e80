"""Results browser for pneumatic topology optimization runs."""
import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.api.v1.endpoints import runs
from app.core.config import settings
from app.core.logging import configure_logging
from app.services.run_store import RunStore

configure_logging()
logger = logging.getLogger(__name__)

SERVICE_NAME = "Pneumatic TopOpt Results"
VERSION = "1.0.0"


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan management"""
    app.state.run_store = RunStore(settings.results_dir)
    logger.info(f"Serving runs from {settings.results_dir}")

    yield

    logger.info("Shutting down results browser")


app = FastAPI(
    title=SERVICE_NAME,
    description="Read-only access to presets, run summaries and iteration histories",
    version=VERSION,
    docs_url="/docs" if settings.enable_docs else None,
    redoc_url="/redoc" if settings.enable_docs else None,
    lifespan=lifespan,
)

if settings.allowed_origins:
    app.add_middleware(
        CORSMiddleware,
        allow_origins=settings.allowed_origins,
        allow_credentials=True,
        allow_methods=["GET", "OPTIONS"],
        allow_headers=["Content-Type", "Authorization"],
    )
    logger.info(f"CORS enabled for origins: {settings.allowed_origins}")
else:
    logger.info("CORS disabled - no allowed origins specified")

app.include_router(runs.router, prefix="/api/runs", tags=["Runs"])


@app.get("/")
async def root():
    """Root endpoint"""
    return {"message": SERVICE_NAME, "version": VERSION, "status": "running"}


@app.get("/api/health")
async def health_check():
    """Basic health check endpoint"""
    return {
        "status": "healthy",
        "service": SERVICE_NAME,
        "environment": settings.environment,
        "results_dir": settings.results_dir,
    }
