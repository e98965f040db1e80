"""Enumerations shared by models, services and schemas."""

from enum import Enum, IntEnum


class Realization(str, Enum):
    """Projected design realization used in the robust formulation."""

    ERODED = "eroded"
    BLUEPRINT = "blueprint"


class ElementTag(IntEnum):
    """Design status of an element."""

    DESIGN = 0
    SOLID = 1
    VOID = 2


class ExportFormat(str, Enum):
    """Field export formats."""

    VTK = "vtk"
    CSV = "csv"
    PGM = "pgm"
