"""Shared fixtures and the opt-in marker for long benchmark runs."""

import os

import numpy as np
import pytest

from app.core.presets import TWO_MATERIALS
from app.models.physics import FlowParams, MaterialSet
from app.services.mesh_service import build_benchmark


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full benchmark runs, enabled with RUN_SLOW=1")


def pytest_collection_modifyitems(config, items):
    if os.getenv("RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set RUN_SLOW=1 to run benchmark reproductions")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def patch_problem():
    """6 x 4 fully designable check domain."""
    return build_benchmark("patch")


@pytest.fixture
def two_materials():
    return MaterialSet(moduli=tuple(TWO_MATERIALS))


@pytest.fixture
def flow_params():
    return FlowParams(drainage_base=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(7)
