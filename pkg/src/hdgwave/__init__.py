"""Hybrid Hermite / discontinuous-Galerkin overset-grid solver for the scalar wave equation."""

__version__ = "0.1.0"

from hdgwave.poly import (
    TensorPoly,
    SpaceTimePoly,
    OrthogonalExpansion,
    hermite_interpolate,
    legendre_project,
    chebyshev_project,
)
from hdgwave.model import WaveModel, BoundaryCondition

__all__ = [
    "TensorPoly",
    "SpaceTimePoly",
    "OrthogonalExpansion",
    "hermite_interpolate",
    "legendre_project",
    "chebyshev_project",
    "WaveModel",
    "BoundaryCondition",
    "__version__",
]
