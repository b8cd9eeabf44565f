"""Exact finite-length Floquet solutions of a driven magnetic / spin-orbit bilayer."""

from .model import (AdmissibilityReport, DimensionlessParams, InvalidParameterError,
                    PhysicalParams, normalize_params, reference_params, validate_config)
from .dispersion import (EigenStructure, ModeTable, build_mode_table, spectral_constants)
from .assembler import (CoefficientTable, SolverOptions, construct, minimal_closed_form)

__all__ = [
    "AdmissibilityReport", "CoefficientTable", "DimensionlessParams", "EigenStructure",
    "InvalidParameterError", "ModeTable", "PhysicalParams", "SolverOptions",
    "build_mode_table", "construct", "minimal_closed_form", "normalize_params",
    "reference_params", "spectral_constants", "validate_config",
]
