from hdgwave.overset.transfers import compute_schedule, node_transfer_1d, node_transfer_2d
from hdgwave.overset.coupled1d import OversetConfig1D, OversetSystem1D

__all__ = [
    "compute_schedule",
    "node_transfer_1d",
    "node_transfer_2d",
    "OversetConfig1D",
    "OversetSystem1D",
]
