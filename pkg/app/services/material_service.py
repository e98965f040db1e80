"""Extended SIMP interpolation of Young's modulus over m candidate materials."""

import logging
from typing import Tuple

import numpy as np

from app.core.exceptions import ContractViolationError
from app.models.physics import MaterialSet

logger = logging.getLogger(__name__)


def _as_rows(rho_bar: np.ndarray, mats: MaterialSet) -> Tuple[np.ndarray, bool]:
    rho_bar = np.asarray(rho_bar, dtype=float)
    single = rho_bar.ndim == 1
    rows = rho_bar[None, :] if single else rho_bar
    if rows.ndim != 2 or rows.shape[1] != mats.n_materials:
        raise ContractViolationError(
            f"design rows have {rows.shape[-1]} columns, expected {mats.n_materials}"
        )
    return rows, single


def _nested_moduli(rows: np.ndarray, mats: MaterialSet) -> np.ndarray:
    """B_k for k = 1..m (0-based columns), innermost first resolved."""
    m = mats.n_materials
    penalized = rows**mats.penal
    nested = np.empty_like(rows)
    nested[:, m - 1] = mats.moduli[m - 1]
    for k in range(m - 2, -1, -1):
        nested[:, k] = (1.0 - penalized[:, k + 1]) * mats.moduli[k] + penalized[:, k + 1] * nested[:, k + 1]
    return nested


def interpolate(rho_bar: np.ndarray, mats: MaterialSet) -> np.ndarray:
    """Young's modulus of one design row (m,) or of every row of an (n, m) field.

    E = (1 - r1^p) E_v + r1^p B_1 with B_k = (1 - r_{k+1}^p) E_k + r_{k+1}^p B_{k+1}
    and B_m = E_m.

    Raises:
        ContractViolationError: If the row length differs from the number of materials
    """
    rows, single = _as_rows(rho_bar, mats)
    nested = _nested_moduli(rows, mats)
    top = rows[:, 0] ** mats.penal
    modulus = (1.0 - top) * mats.void_modulus + top * nested[:, 0]
    return modulus[0] if single else modulus


def interpolate_gradient(rho_bar: np.ndarray, mats: MaterialSet) -> np.ndarray:
    """Partial derivatives dE/d(rho_bar_k), same shape as the input."""
    rows, single = _as_rows(rho_bar, mats)
    p = mats.penal
    nested = _nested_moduli(rows, mats)
    penalized = rows**p
    slope = p * rows ** (p - 1.0)

    gradient = np.empty_like(rows)
    gradient[:, 0] = slope[:, 0] * (nested[:, 0] - mats.void_modulus)
    # product of r_j^p over the enclosing levels
    enclosing = penalized[:, 0].copy()
    for k in range(1, mats.n_materials):
        gradient[:, k] = enclosing * slope[:, k] * (nested[:, k] - mats.moduli[k - 1])
        enclosing *= penalized[:, k]
    return gradient[0] if single else gradient
