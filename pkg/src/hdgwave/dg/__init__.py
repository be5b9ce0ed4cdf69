from hdgwave.dg.solver1d import DGSolver1D, Mesh1D
from hdgwave.dg.mesh import QuadMesh, RadialPatch, annulus_mesh
from hdgwave.dg.solver2d import DGSolver2D

__all__ = [
    "DGSolver1D",
    "Mesh1D",
    "QuadMesh",
    "RadialPatch",
    "annulus_mesh",
    "DGSolver2D",
]
