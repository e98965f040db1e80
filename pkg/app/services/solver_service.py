"""Sparse direct solves with Dirichlet elimination and residual checks."""

import logging
import time
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from app.core.exceptions import ModelError, NumericalError
from app.models.physics import FactorizedMatrix

logger = logging.getLogger(__name__)

# residuals above RESIDUAL_WARN are logged; only those above RESIDUAL_FAIL abort the solve
RESIDUAL_WARN = 1e-10
RESIDUAL_FAIL = 1e-6


def factorize(
    matrix: sp.spmatrix, free: np.ndarray, name: str, require_positive: bool = True
) -> FactorizedMatrix:
    """Factorize the free-free block of a symmetric matrix.

    The factorization uses a symmetric ordering without off-diagonal
    pivoting, so a non-positive pivot flags a matrix that is not positive
    definite.

    Args:
        matrix: Full symmetric matrix
        free: Indices of unconstrained DOFs
        name: Label used in logs and errors
        require_positive: Raise ModelError on a non-positive pivot

    Returns:
        FactorizedMatrix: Matrix, free indices and the LU factor

    Raises:
        ModelError: If the free block is singular or not positive definite
    """
    matrix = sp.csc_matrix(matrix)
    if len(free) == 0:
        raise ModelError(f"{name} has no free degrees of freedom")

    reduced = matrix[:, free].tocsr()[free, :].tocsc()
    started = time.perf_counter()
    try:
        factor = splu(
            reduced,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as e:
        raise ModelError(f"{name} is singular after eliminating constraints: {e}") from e

    pivots = factor.U.diagonal()
    if require_positive and (not np.all(np.isfinite(pivots)) or np.any(pivots <= 0)):
        raise ModelError(f"{name} is not positive definite after eliminating constraints")

    logger.debug(
        f"Factorized {name}: n={reduced.shape[0]}, nnz={reduced.nnz}, "
        f"{time.perf_counter() - started:.3f}s"
    )
    return FactorizedMatrix(matrix=matrix, free=np.asarray(free), factor=factor, name=name)


def solve_free(system: FactorizedMatrix, rhs_free: np.ndarray, check: bool = True) -> np.ndarray:
    """Solve the reduced system for a right-hand side on the free DOFs.

    Raises:
        NumericalError: If the solution is not finite or its residual is unusable
    """
    rhs_free = np.asarray(rhs_free, dtype=float)
    rhs_norm = np.linalg.norm(rhs_free)
    if rhs_norm == 0.0:
        return np.zeros_like(rhs_free)

    x = system.factor.solve(rhs_free)
    if check:
        residual = relative_residual(system, x, rhs_free)
        diagnostics = {"name": system.name, "size": len(rhs_free), "residual": residual}
        if not np.all(np.isfinite(x)) or not np.isfinite(residual):
            raise NumericalError(f"{system.name} solve returned non-finite values", diagnostics)
        if residual > RESIDUAL_FAIL:
            raise NumericalError(
                f"{system.name} solve residual {residual:.3e} exceeds {RESIDUAL_FAIL:g}",
                diagnostics,
            )
        if residual > RESIDUAL_WARN:
            logger.warning(f"{system.name} solve residual {residual:.3e} above {RESIDUAL_WARN:g}")
    return x


def relative_residual(system: FactorizedMatrix, x_free: np.ndarray, rhs_free: np.ndarray) -> float:
    free = system.free
    reduced_product = system.matrix[:, free] @ x_free
    rhs_norm = np.linalg.norm(rhs_free)
    return float(np.linalg.norm(reduced_product[free] - rhs_free) / rhs_norm) if rhs_norm else 0.0


def solve_with_dirichlet(
    system: FactorizedMatrix,
    rhs: Optional[np.ndarray],
    fixed: np.ndarray,
    fixed_values: np.ndarray,
) -> np.ndarray:
    """Solve the full system with prescribed values, returning the full vector."""
    n = system.matrix.shape[0]
    full = np.zeros(n)
    full[fixed] = fixed_values
    rhs_full = np.zeros(n) if rhs is None else np.asarray(rhs, dtype=float)
    lifted = rhs_full - system.matrix @ full
    full[system.free] = solve_free(system, lifted[system.free])
    return full
