"""Custom exceptions for the topology optimization engine."""

from pathlib import Path
from typing import Any, Dict, Optional


class TopOptError(Exception):
    """Base exception for all engine errors."""

    pass


class ConfigurationError(TopOptError):
    """Raised when a configuration value is missing or invalid."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class ContractViolationError(TopOptError, ValueError):
    """Raised when operand shapes or dimensions do not agree."""

    pass


class ModelError(TopOptError):
    """Raised when the physical model is ill-posed (singular or indefinite)."""

    pass


class NumericalError(TopOptError):
    """Raised when a linear solve fails or returns an unusable result."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class AnalysisAbortedError(TopOptError):
    """Raised when an optimization run stops because an analysis failed."""

    def __init__(
        self,
        message: str,
        iteration: int,
        checkpoint_path: Optional[Path] = None,
    ):
        super().__init__(message)
        self.iteration = iteration
        self.checkpoint_path = checkpoint_path


class ExportError(TopOptError):
    """Raised when a result file cannot be written or read back."""

    def __init__(self, message: str, path: Optional[Path] = None):
        super().__init__(message)
        self.path = path


class RunNotFoundError(TopOptError):
    """Raised when a stored run or one of its files does not exist."""

    pass
