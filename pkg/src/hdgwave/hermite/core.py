"""Shared pieces of the staggered Hermite solvers.

DOF convention: the displacement at a node x_i is represented by scaled
Taylor coefficients u_l = h^l/l! d^l u/dx^l so that the nodal polynomial is
sum(u_l ((x - x_i)/h)^l).  With equal scales on both grids the two-point
interpolation map is grid-size independent, so one pair of matrices per DOF
count serves every cell (see poly.hermite_matrices).

Space-time expansions store coefficients over (chi, tau) with chi = (x - x_c)/h
and tau = (t - t_n)/dt; evaluating at tau = 1/2 advances half a step.
"""

from __future__ import annotations

import math

import numpy as np

from hdgwave.poly import gll_nodes, hermite_matrices, legendre_project


class CflViolation(RuntimeError):
    """Timestep exceeds the stability bound."""


class MissingDataError(RuntimeError):
    """A cell needs donor data from an inactive node."""


def check_cfl(c, dt, h, cfl_max):
    ratio = c * dt / h
    if ratio > cfl_max * (1 + 1e-12):
        raise CflViolation(
            f"c*dt/h = {ratio:.6g} exceeds the stability bound {cfl_max:.3g}"
        )
    return ratio


def scaled_init_dofs(fn, centers, h, n_dofs):
    """Scaled Taylor DOFs from a callable fn(x, order)."""
    out = np.empty(centers.shape + (n_dofs,))
    for l in range(n_dofs):
        out[..., l] = fn(centers, l) * h**l / math.factorial(l)
    return out


def projected_init_dofs_1d(fn, centers, h, n_dofs, full_degree):
    """Scaled DOFs by cell projection: sample fn on a GLL grid over each node
    cell, project to ``full_degree``, convert to the nodal monomial frame, and
    keep the leading Taylor coefficients (which carry the full projection
    accuracy)."""
    n_nodes = full_degree + 1
    x, _ = gll_nodes(n_nodes)
    pts = centers[:, None] + (h / 2.0) * x[None, :]
    vals = fn(pts)
    out = np.empty((len(centers), n_dofs))
    for i, c in enumerate(centers):
        exp = legendre_project(vals[i], full_degree)
        p = exp.to_tensor_poly((c,), (h / 2.0,)).recentered((c,), (h,))
        out[i] = p.coeffs[:n_dofs]
    return out


def expand_1d(u0, v0, c2, dt, h, s_max, forcing_stack=None, speed_coeffs=None):
    """Taylor-in-time recursion for the 1D wave system on a batch of cells.

    u0: (nc, LU) interpolant coefficients, v0: (nc, LV); returns stacks
    U (s_max+1, nc, LU) and V (s_max+1, nc, LV).  ``speed_coeffs`` switches to
    the variable-speed polynomial product path (per-cell coefficients of the
    squared speed, shape (nc, LA)).  ``forcing_stack`` holds per-cell
    space-time forcing coefficients, shape (nc, LF, s_max).
    """
    nc, lu = u0.shape
    lv = v0.shape[1]
    U = np.zeros((s_max + 1, nc, lu))
    V = np.zeros((s_max + 1, nc, lv))
    U[0] = u0
    V[0] = v0
    l = np.arange(lv)
    lap_fac = (l + 1) * (l + 2) / h**2  # coefficient weights of d^2/dx^2
    for s in range(1, s_max + 1):
        U[s, :, :lv] = (dt / s) * V[s - 1]
        if speed_coeffs is None:
            V[s] = (c2 * dt / s) * U[s - 1, :, 2 : lv + 2] * lap_fac[None, :]
        else:
            V[s] = (dt / s) * _flux_divergence_1d(U[s - 1], speed_coeffs, h)[:, :lv]
        if forcing_stack is not None and s - 1 < forcing_stack.shape[2]:
            lf = min(lv, forcing_stack.shape[1])
            V[s, :, :lf] += (dt / s) * forcing_stack[:, :lf, s - 1]
    return U, V


def _flux_divergence_1d(u, a, h):
    """(a(x) u_x)_x as batched scaled coefficients, truncated to u's degree."""
    nc, lu = u.shape
    la = a.shape[1]
    du = np.zeros((nc, lu))
    du[:, :-1] = u[:, 1:] * (np.arange(1, lu) / h)[None, :]
    prod = np.zeros((nc, lu))
    for k in range(lu):
        jmax = min(k, la - 1)
        for j in range(jmax + 1):
            prod[:, k] += a[:, j] * du[:, k - j]
    out = np.zeros((nc, lu))
    out[:, :-1] = prod[:, 1:] * (np.arange(1, lu) / h)[None, :]
    return out


def halfstep_sum(stack):
    """Evaluate a coefficient stack at tau = 1/2: sum_s stack[s] / 2^s."""
    weights = 0.5 ** np.arange(stack.shape[0])
    return np.tensordot(weights, stack, axes=(0, 0))


def interpolation_matrices(m):
    """(BLu, BRu, BLv, BRv) for order parameter m."""
    blu, bru = hermite_matrices(m + 2)
    blv, brv = hermite_matrices(m + 1)
    return blu, bru, blv, brv
