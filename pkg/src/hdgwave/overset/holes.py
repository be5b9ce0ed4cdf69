"""Hole cutting: node status masks for the Cartesian grid.

Nodes outside the active region are cut; active nodes that cannot evolve
because a staggered partner was cut form the stair ring fed by the element
grids (status 2): primal stairs at full steps, dual stairs at half steps.
"""

from __future__ import annotations

import numpy as np

from hdgwave.hermite.solver2d import MaskedRegion
from hdgwave.poly import ContractViolation


def cut_holes(origin, h, n_cells, active_fn, stair_layers=1):
    """Status masks from a pointwise activity predicate.

    ``active_fn(x, y)`` returns a boolean array marking the active region.
    Returns a MaskedRegion; stair nodes (status 2) are active nodes within
    ``stair_layers`` staggered neighbors of a cut node.
    """
    nx, ny = n_cells
    x0, y0 = origin
    xp = x0 + h * np.arange(nx + 1)
    yp = y0 + h * np.arange(ny + 1)
    xd = x0 + h * (np.arange(nx) + 0.5)
    yd = y0 + h * (np.arange(ny) + 0.5)
    act_p = np.asarray(active_fn(xp[:, None], yp[None, :]), dtype=bool)
    act_d = np.asarray(active_fn(xd[:, None], yd[None, :]), dtype=bool)

    dual_status = np.zeros((nx, ny), dtype=np.int8)
    primal_status = np.zeros((nx + 1, ny + 1), dtype=np.int8)

    corners_ok_d = act_p[:-1, :-1] & act_p[1:, :-1] & act_p[:-1, 1:] & act_p[1:, 1:]
    dual_status[act_d & corners_ok_d] = 1
    dual_status[act_d & ~corners_ok_d] = 2

    # primal nodes need their four dual corners; rectangle-edge nodes have
    # fewer corners and rely on the physical ghost machinery, so only the
    # interior corner test applies there
    has_dual = dual_status > 0
    pad = np.ones((nx + 2, ny + 2), dtype=bool)
    pad[1:-1, 1:-1] = has_dual
    corners_ok_p = pad[:-1, :-1] & pad[1:, :-1] & pad[:-1, 1:] & pad[1:, 1:]
    primal_status[act_p & corners_ok_p] = 1
    primal_status[act_p & ~corners_ok_p] = 2

    for _ in range(stair_layers - 1):
        primal_status = _grow_stairs(primal_status)
        dual_status = _grow_stairs(dual_status)
    return MaskedRegion(primal_status, dual_status)


def _grow_stairs(status):
    out = status.copy()
    stair = status == 2
    neighbor = np.zeros_like(stair)
    neighbor[1:, :] |= stair[:-1, :]
    neighbor[:-1, :] |= stair[1:, :]
    neighbor[:, 1:] |= stair[:, :-1]
    neighbor[:, :-1] |= stair[:, 1:]
    out[(status == 1) & neighbor] = 2
    return out


def stair_nodes(masks: MaskedRegion, parity):
    """(i, j) index pairs of transfer-fed nodes of one parity."""
    status = masks.primal if parity == "primal" else masks.dual
    return np.argwhere(status == 2)


def check_transfer_coverage(nodes_xy, h, meshes, n_probe):
    """Every node's projection cell must be covered by some element ring.

    ``nodes_xy`` is (n, 2); raises listing uncovered nodes.
    """
    z = np.linspace(-0.5, 0.5, n_probe)
    uncovered = []
    for (x, y) in nodes_xy:
        ok = True
        for px in x + h * z:
            for py in y + h * z:
                if not any(mesh.patch.locate(px, py) is not None for mesh in meshes):
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            uncovered.append((float(x), float(y)))
    if uncovered:
        raise ContractViolation(
            f"{len(uncovered)} transfer nodes not covered by element grids, "
            f"first at {uncovered[0]}"
        )
