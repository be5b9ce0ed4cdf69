"""Physical boundary closure for the staggered Hermite method.

At the half time level the boundary node is closed by a polynomial that
interpolates the interior dual data and satisfies the boundary condition
together with its time-differentiated compatibility relations (time
derivatives traded for spatial ones through the wave equation).  The closure
polynomial is returned as ghost DOFs at the reflected dual position, which
lets the standard two-point cell kernel evolve boundary nodes like interior
ones.

For homogeneous data the closure reduces to the odd (Dirichlet) or even
(Neumann) mirror of the interior DOFs, which is used as a fast path.
"""

from __future__ import annotations

import math

import numpy as np

from hdgwave.model import BoundaryCondition


class SingularClosure(RuntimeError):
    pass


def mirror_signs(n_dofs, kind):
    """Per-order sign flip for ghost DOFs of a homogeneous mirror."""
    l = np.arange(n_dofs)
    if kind == "dirichlet":
        return np.where(l % 2 == 0, -1.0, 1.0)
    return np.where(l % 2 == 0, 1.0, -1.0)


def _dof_matrix(n_coeffs, chi0):
    """A[l, j] = C(j, l) chi0^(j-l): scaled DOFs at chi0 from center coefficients."""
    a = np.zeros((n_coeffs, n_coeffs))
    for l in range(n_coeffs):
        for j in range(l, n_coeffs):
            a[l, j] = math.comb(j, l) * chi0 ** (j - l)
    return a


def closure_polynomials(bc: BoundaryCondition, interior_u, interior_v, *, t, h, c2, m,
                        side, forcing_derivative=None):
    """Coefficients (centered at the boundary node, scale h) of the boundary
    displacement and velocity polynomials.

    ``interior_u``/``interior_v`` are the scaled DOFs of the dual node next to
    the boundary; ``side`` is 'left' or 'right'.  ``forcing_derivative(lx, lt)``
    returns d^lx/dx^lx d^lt/dt^lt f at the boundary at time t (zero if None).
    """
    chi0 = 0.5 if side == "left" else -0.5
    lu = 2 * m + 4
    lv = 2 * m + 2
    g = bc.data

    def forced(lx, lt):
        if forcing_derivative is None:
            return 0.0
        return forcing_derivative(lx, lt)

    c_u = _solve_one(bc.kind, g, interior_u, chi0, lu, h, c2, t, forced, time_shift=0)
    c_v = _solve_one(bc.kind, g, interior_v, chi0, lv, h, c2, t, forced, time_shift=1)
    return c_u, c_v


def _solve_one(kind, g, interior, chi0, n_coeffs, h, c2, t, forced, time_shift):
    """Solve for one closure polynomial.

    ``time_shift`` = 0 closes the displacement (conditions from g, g'', ...),
    1 closes the velocity (conditions from g', g''', ...).  Dirichlet data
    pins even coefficients, Neumann pins odd ones; the remaining half is the
    interpolation condition at the interior dual node.
    """
    constrained = np.zeros(n_coeffs)
    mask = np.zeros(n_coeffs, dtype=bool)
    if kind == "dirichlet":
        pinned = range(0, n_coeffs, 2)
    else:
        pinned = range(1, n_coeffs, 2)
    for p in pinned:
        if kind == "dirichlet":
            j = p // 2  # condition from the 2j-th time derivative of g
            rhs = g(t, 2 * j + time_shift)
            for i in range(j):
                lt = 2 * (j - 1 - i) + time_shift
                rhs = rhs - c2**i * forced(2 * i, lt)
            constrained[p] = h**p / math.factorial(p) * rhs / c2**j
        else:
            j = (p - 1) // 2
            rhs = g(t, 2 * j + time_shift)
            for i in range(j):
                lt = 2 * (j - 1 - i) + time_shift
                rhs = rhs - c2**i * forced(2 * i + 1, lt)
            constrained[p] = h**p / math.factorial(p) * rhs / c2**j
        mask[p] = True
    n_dofs = n_coeffs // 2
    a = _dof_matrix(n_coeffs, chi0)[:n_dofs]  # interior node supplies n_dofs conditions
    free = ~mask
    a_free = a[:, free]
    rhs_vec = np.asarray(interior, dtype=float)[:n_dofs] - a[:, mask] @ constrained[mask]
    cond = np.linalg.cond(a_free)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularClosure(
            f"boundary closure system is ill conditioned (cond = {cond:.3e})"
        )
    sol = np.linalg.solve(a_free, rhs_vec)
    coeffs = constrained.copy()
    coeffs[free] = sol
    return coeffs


def ghost_dofs_from_closure(coeffs, chi_ghost, n_dofs):
    """Scaled DOFs of the closure polynomial at the reflected dual position."""
    a = _dof_matrix(len(coeffs), chi_ghost)
    return (a @ coeffs)[:n_dofs]
