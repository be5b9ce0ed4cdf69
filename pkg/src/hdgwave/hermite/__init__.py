from hdgwave.hermite.solver1d import HermiteSolver1D, HermiteState1D, CellExpansions1D
from hdgwave.hermite.solver2d import HermiteSolver2D, HermiteState2D, CellExpansions2D
from hdgwave.hermite.pml import PmlProfile, PmlState1D, PmlState2D, tanh_profile

__all__ = [
    "HermiteSolver1D",
    "HermiteState1D",
    "CellExpansions1D",
    "HermiteSolver2D",
    "HermiteState2D",
    "CellExpansions2D",
    "PmlProfile",
    "PmlState1D",
    "PmlState2D",
    "tanh_profile",
]
