"""Inter-grid data transfer and substep scheduling.

Data moving toward the Hermite grid is sampled on a Gauss-Lobatto grid over
the receiving node's projection cell and fitted by an L2 Legendre projection
of the full transfer degree (2m+3 for displacement, 2m+1 for velocity); the
node's DOFs are the leading Taylor coefficients of that fit expressed about
the node.  The comparison mode 'interpolation' reproduces the classic overset
transfer instead: a pointwise polynomial interpolant of the target degree
only, which loses the projection's excess accuracy and destabilizes the
coupled evolution (diagnosed by the amplification-matrix suite).

Data moving toward the DG grid is evaluated from the Hermite space-time
expansions at the element's Chebyshev quadrature points, values plus as many
time derivatives as the Taylor stepper consumes, and projected onto the
element basis.
"""

from __future__ import annotations

import math

import numpy as np

from hdgwave.poly import ContractViolation, gll_nodes, legendre_project


def compute_schedule(cfl_a, q_u, h_a, h_b, c=1.0, max_cfl=0.75):
    """(dt_a, dt_b, n_dg): Hermite step, DG substep and substep count.

    n_dg = ceil(cfl * q_u / 0.15 * h_a / h_b), rounded up to an even count so
    each Hermite half step covers an integer number of substeps; dt_b then
    obeys the DG bound dt_b <= 0.15 h_b / (q_u c).
    """
    if cfl_a > max_cfl * (1 + 1e-12):
        raise ContractViolation(f"Hermite CFL {cfl_a} exceeds {max_cfl}")
    dt_a = cfl_a * h_a / c
    n_dg = math.ceil(cfl_a * q_u / 0.15 * h_a / h_b - 1e-12)
    if n_dg % 2:
        n_dg += 1
    dt_b = dt_a / n_dg
    assert dt_b <= 0.15 * h_b / (q_u * c) * (1 + 1e-9)
    return dt_a, dt_b, n_dg


def node_transfer_1d(sample_u, sample_v, cell_center, h, m, node=None,
                     mode="projection"):
    """Hermite node DOFs (u, v) from a donor-solution sampler.

    The projection cell is [cell_center - h/2, cell_center + h/2]; ``node``
    (default the cell center) is where the receiving DOF frame lives.
    """
    node = cell_center if node is None else node
    if mode == "projection":
        x, _ = gll_nodes(2 * m + 4)
        pts = cell_center + 0.5 * h * x
        eu = legendre_project(sample_u(pts), 2 * m + 3)
        ev = legendre_project(sample_v(pts), 2 * m + 1)
        pu = eu.to_tensor_poly((cell_center,), (h / 2,)).recentered((node,), (h,))
        pv = ev.to_tensor_poly((cell_center,), (h / 2,)).recentered((node,), (h,))
        return pu.coeffs[: m + 2].copy(), pv.coeffs[: m + 1].copy()
    if mode == "interpolation":
        xu, _ = gll_nodes(m + 2)
        pts_u = cell_center + 0.5 * h * xu
        cu = np.polynomial.polynomial.polyfit((pts_u - node) / h, sample_u(pts_u), m + 1)
        xv, _ = gll_nodes(max(m + 1, 2))
        pts_v = cell_center + 0.5 * h * xv
        cv = np.polynomial.polynomial.polyfit((pts_v - node) / h, sample_v(pts_v), m)
        return cu, cv
    raise ContractViolation(f"unknown transfer mode {mode!r}")


def node_transfer_2d(sample_u, sample_v, cell_center, h, m, node=None,
                     mode="projection"):
    """2D variant of node_transfer_1d on a tensor cell of width h per axis.

    ``sample_u(px, py)`` evaluates the donor on the tensor grid spanned by
    the 1D point sets px, py (returning an (len(px), len(py)) array).
    """
    node = cell_center if node is None else node
    if mode == "projection":
        x, _ = gll_nodes(2 * m + 4)
        px = cell_center[0] + 0.5 * h * x
        py = cell_center[1] + 0.5 * h * x
        eu = legendre_project(sample_u(px, py), 2 * m + 3)
        ev = legendre_project(sample_v(px, py), 2 * m + 1)
        pu = eu.to_tensor_poly(cell_center, (h / 2, h / 2)).recentered(node, (h, h))
        pv = ev.to_tensor_poly(cell_center, (h / 2, h / 2)).recentered(node, (h, h))
        return pu.coeffs[: m + 2, : m + 2].copy(), pv.coeffs[: m + 1, : m + 1].copy()
    if mode == "interpolation":
        out = []
        for deg in (m + 1, m):
            n = max(deg + 1, 2)
            x, _ = gll_nodes(n)
            px = cell_center[0] + 0.5 * h * x
            py = cell_center[1] + 0.5 * h * x
            vals = sample_u(px, py) if deg == m + 1 else sample_v(px, py)
            zx = (px - node[0]) / h
            zy = (py - node[1]) / h
            vx = np.vander(zx, deg + 1, increasing=True)
            vy = np.vander(zy, deg + 1, increasing=True)
            coeffs = np.linalg.solve(vx, np.linalg.solve(vy, vals.T).T)
            out.append(coeffs)
        return out[0], out[1]
    raise ContractViolation(f"unknown transfer mode {mode!r}")


class PrescribedElements:
    """Per-substep stage data for DG elements pinned by the Hermite solution.

    ``values[k]`` holds (u_rows, v_rows) with the k-th time derivative of the
    transferred solution; built fresh for each substep time.
    """

    def __init__(self, elements, values):
        self.elements = np.asarray(elements, dtype=int)
        self.values = values

    def stage_data(self, k):
        if k < len(self.values):
            return self.values[k]
        u0, v0 = self.values[0]
        return np.zeros_like(u0), np.zeros_like(v0)
