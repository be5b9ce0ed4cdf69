"""Dissipative Hermite solver for the 1D wave equation on staggered grids.

A full step of size dt is two half steps: primal nodes supply two-point cell
interpolants centered at dual nodes, the PDE recursion turns them into
space-time expansions, and evaluating at tau = 1/2 yields the DOFs on the
dual grid half a step later; the second half mirrors the construction back.
Physical boundaries are closed at the half level, either by the homogeneous
mirror fast path or by the full compatibility construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hdgwave.hermite import boundary as bnd
from hdgwave.hermite.core import (
    CflViolation,
    MissingDataError,
    check_cfl,
    expand_1d,
    halfstep_sum,
    interpolation_matrices,
    projected_init_dofs_1d,
    scaled_init_dofs,
)
from hdgwave.model import BoundaryCondition, WaveModel, project_speed_field
from hdgwave.poly import SpaceTimePoly, TensorPoly, gll_nodes, legendre_project


@dataclass
class HermiteState1D:
    """DOF arrays on one parity of the staggered pair."""

    u: np.ndarray  # (n_nodes, m + 2)
    v: np.ndarray  # (n_nodes, m + 1)
    parity: str  # 'primal' | 'dual'
    t: float

    def copy(self):
        return HermiteState1D(self.u.copy(), self.v.copy(), self.parity, self.t)


@dataclass
class CellExpansions1D:
    """Space-time expansions for a batch of cells (one per target node)."""

    centers: np.ndarray
    h: float
    t0: float
    dt: float
    U: np.ndarray  # (s_max + 1, nc, LU)
    V: np.ndarray  # (s_max + 1, nc, LV)

    def locate(self, x):
        i = int(np.floor((x - self.centers[0]) / self.h + 0.5))
        return min(max(i, 0), len(self.centers) - 1)

    def cell_poly(self, i, field="u") -> SpaceTimePoly:
        stack = self.U if field == "u" else self.V
        return SpaceTimePoly(
            (self.centers[i],), (self.h,), self.t0, self.dt, stack[:, i, :]
        )

    def slice_values(self, i, x, field="u"):
        """All time-slice values of cell i at points x: shape (s_max+1, ...)."""
        stack = self.U if field == "u" else self.V
        chi = (np.asarray(x, dtype=float) - self.centers[i]) / self.h
        # Horner over the coefficient axis
        c = stack[:, i, :]
        out = np.zeros((c.shape[0],) + chi.shape)
        for k in range(c.shape[1] - 1, -1, -1):
            out = out * chi + c[:, k][(...,) + (None,) * chi.ndim]
        return out


class HermiteSolver1D:
    """Order parameter m gives accuracy 2m+1; DOFs are m+2 and m+1 scaled
    derivatives of displacement and velocity per node."""

    def __init__(self, x0, h, n_cells, m, dt, model: WaveModel, bc_left=None,
                 bc_right=None, cfl_max=0.75):
        self.x0 = float(x0)
        self.h = float(h)
        self.n = int(n_cells)
        self.m = int(m)
        self.dt = float(dt)
        self.model = model
        self.bc_left = bc_left
        self.bc_right = bc_right
        self.cfl_max = cfl_max
        if model.constant_speed:
            check_cfl(model.c, dt, h, cfl_max)
            self._speed_primal = self._speed_dual = None
        else:
            cmax = math.sqrt(max(model.c2_at(self.primal_nodes()).max(),
                                 model.c2_at(self.dual_nodes()).max()))
            check_cfl(cmax, dt, h, cfl_max)
            deg = 2 * m + 3
            self._speed_dual = np.stack([
                project_speed_field(model, (c,), (h,), deg).coeffs
                for c in self.dual_nodes()
            ])
            self._speed_primal = np.stack([
                project_speed_field(model, (c,), (h,), deg).coeffs
                for c in self.primal_nodes()
            ])
        self.blu, self.bru, self.blv, self.brv = interpolation_matrices(m)
        self.s_max = 2 * m + 3

    # -- geometry ----------------------------------------------------------

    def primal_nodes(self):
        return self.x0 + self.h * np.arange(self.n + 1)

    def dual_nodes(self):
        return self.x0 + self.h * (np.arange(self.n) + 0.5)

    def nodes(self, parity):
        return self.primal_nodes() if parity == "primal" else self.dual_nodes()

    # -- initialization ----------------------------------------------------

    def initialize(self, g0, g1, method="derivatives") -> HermiteState1D:
        """Initial primal state from displacement g0 and velocity g1.

        ``method='derivatives'`` expects callables f(x, order); ``'project'``
        expects plain callables sampled and projected per node cell.
        """
        xs = self.primal_nodes()
        if method == "derivatives":
            u = scaled_init_dofs(g0, xs, self.h, self.m + 2)
            v = scaled_init_dofs(g1, xs, self.h, self.m + 1)
        elif method == "project":
            u = projected_init_dofs_1d(g0, xs, self.h, self.m + 2, 2 * self.m + 3)
            v = projected_init_dofs_1d(g1, xs, self.h, self.m + 1, 2 * self.m + 1)
        else:
            raise ValueError(f"unknown init method {method!r}")
        return HermiteState1D(u, v, "primal", 0.0)

    # -- interpolation and expansion phases ---------------------------------

    def interpolation_phase(self, state: HermiteState1D, active=None):
        """Cell interpolant coefficient arrays (u of degree 2m+3, v of 2m+1).

        ``active`` optionally marks node availability; an inactive donor makes
        the phase fail with the node named.
        """
        if active is not None:
            bad = np.flatnonzero(~np.asarray(active, dtype=bool))
            if bad.size:
                raise MissingDataError(f"inactive donor node index {bad[0]}")
        u_int = state.u[:-1] @ self.blu.T + state.u[1:] @ self.bru.T
        v_int = state.v[:-1] @ self.blv.T + state.v[1:] @ self.brv.T
        return u_int, v_int

    def cell_interpolants(self, state: HermiteState1D):
        """Interpolants as TensorPoly objects, one per cell of this parity."""
        u_int, v_int = self.interpolation_phase(state)
        centers = self._cell_centers(state.parity)
        out = []
        for i, c in enumerate(centers):
            out.append(
                (
                    TensorPoly((c,), (self.h,), u_int[i]),
                    TensorPoly((c,), (self.h,), v_int[i]),
                )
            )
        return out

    def _cell_centers(self, parity):
        return self.dual_nodes() if parity == "primal" else self.primal_nodes()[1:-1]

    def time_expand(self, u_int, v_int, centers, t0, forcing_override=None) -> CellExpansions1D:
        """Space-time expansions from interpolant coefficient batches."""
        speed = None
        if not self.model.constant_speed:
            speed = self._speed_for_centers(centers)
        fstack = forcing_override
        if fstack is None and (self.model.forcing is not None
                               or self.model.forcing_poly is not None):
            fstack = self._forcing_stack(centers, t0)
        c2 = self.model.c2 if self.model.constant_speed else None
        U, V = expand_1d(u_int, v_int, c2, self.dt, self.h, self.s_max,
                         forcing_stack=fstack, speed_coeffs=speed)
        return CellExpansions1D(np.asarray(centers), self.h, t0, self.dt, U, V)

    def _speed_for_centers(self, centers):
        dual = self.dual_nodes()
        if len(centers) and np.isclose(centers[0], dual[0]):
            return self._speed_dual
        primal = self.primal_nodes()
        idx = np.rint((np.asarray(centers) - primal[0]) / self.h).astype(int)
        return self._speed_primal[idx]

    def _forcing_stack(self, centers, t0):
        """Per-cell space-time Taylor coefficients of the forcing."""
        lf = 2 * self.m + 2
        out = np.zeros((len(centers), lf, self.s_max))
        if self.model.forcing_poly is not None:
            for i, c in enumerate(centers):
                arr = self.model.forcing_poly(c, self.h, t0, self.dt)
                out[i, : arr.shape[0], : arr.shape[1]] = arr[:lf, : self.s_max]
            return out
        f = self.model.forcing
        nx = 2 * self.m + 4
        nt = self.s_max + 1
        gx, _ = gll_nodes(nx)
        gt, _ = gll_nodes(nt)
        for i, c in enumerate(centers):
            px = c + 0.5 * self.h * gx
            pt = t0 + 0.5 * self.dt * (gt + 1.0)
            vals = f(px[:, None], pt[None, :])
            exp = legendre_project(vals, (nx - 1, nt - 1))
            p = exp.to_tensor_poly((c, t0 + 0.5 * self.dt), (self.h / 2, self.dt / 2))
            p = p.recentered((c, t0), (self.h, self.dt))
            arr = p.coeffs
            out[i, : min(lf, arr.shape[0]), : min(self.s_max, arr.shape[1])] = arr[
                :lf, : self.s_max
            ]
        return out

    # -- stepping ------------------------------------------------------------

    def half_step(self, state: HermiteState1D):
        """Advance dt/2 to the opposite parity; returns (new_state, expansions)."""
        if state.parity == "primal":
            u_int, v_int = self.interpolation_phase(state)
            centers = self.dual_nodes()
        else:
            u_ext, v_ext = self._extend_dual(state)
            u_int = u_ext[:-1] @ self.blu.T + u_ext[1:] @ self.bru.T
            v_int = v_ext[:-1] @ self.blv.T + v_ext[1:] @ self.brv.T
            centers = self.primal_nodes()
        exp = self.time_expand(u_int, v_int, centers, state.t)
        new_u = halfstep_sum(exp.U)[:, : self.m + 2]
        new_v = halfstep_sum(exp.V)[:, : self.m + 1]
        parity = "dual" if state.parity == "primal" else "primal"
        return HermiteState1D(new_u, new_v, parity, state.t + self.dt / 2), exp

    def step(self, state: HermiteState1D):
        """One full step; keeps the two half-step expansions on the solver."""
        mid, exp1 = self.half_step(state)
        out, exp2 = self.half_step(mid)
        self.last_expansions = (exp1, exp2)
        return out

    def _extend_dual(self, state):
        """Dual arrays extended by one ghost node per physical end."""
        nu, nv = self.m + 2, self.m + 1
        gu_l, gv_l = self._ghost(state, self.bc_left, "left")
        gu_r, gv_r = self._ghost(state, self.bc_right, "right")
        u = np.vstack([gu_l, state.u, gu_r])
        v = np.vstack([gv_l, state.v, gv_r])
        return u, v

    def _ghost(self, state, bc, side):
        """Ghost DOF rows beyond one end of the dual grid at the half level."""
        nu, nv = self.m + 2, self.m + 1
        idx = 0 if side == "left" else -1
        if bc is None or bc == "transfer":
            return np.zeros((1, nu)), np.zeros((1, nv))
        if not isinstance(bc, BoundaryCondition):
            raise TypeError(f"unsupported boundary spec {bc!r}")
        if bc.homogeneous and self.model.forcing is None and self.model.forcing_poly is None:
            su = bnd.mirror_signs(nu, bc.kind)
            sv = bnd.mirror_signs(nv, bc.kind)
            return state.u[idx] * su, state.v[idx] * sv
        c_u, c_v = self.apply_physical_bc(state, bc, side)
        chi_ghost = -0.5 if side == "left" else 0.5
        gu = bnd.ghost_dofs_from_closure(c_u, chi_ghost, nu)
        gv = bnd.ghost_dofs_from_closure(c_v, chi_ghost, nv)
        return gu[None, :], gv[None, :]

    def apply_physical_bc(self, state: HermiteState1D, bc: BoundaryCondition, side):
        """Boundary closure polynomials (coefficient arrays centered at the
        boundary node with scale h) for the dual state at its half level."""
        if state.parity != "dual":
            raise ValueError("boundary closure applies to the dual state")
        idx = 0 if side == "left" else -1
        xb = self.x0 if side == "left" else self.x0 + self.n * self.h
        c2 = self.model.c2 if self.model.constant_speed else float(self.model.c2_at(np.array([xb]))[0])
        fd = self._boundary_forcing_derivative(xb, state.t)
        return bnd.closure_polynomials(
            bc, state.u[idx], state.v[idx], t=state.t, h=self.h, c2=c2,
            m=self.m, side=side, forcing_derivative=fd,
        )

    def _boundary_forcing_derivative(self, xb, t):
        if self.model.forcing is None and self.model.forcing_poly is None:
            return None
        stack = self._forcing_stack(np.array([xb]), t)[0]  # (LF, s_max)

        def deriv(lx, lt):
            if lx >= stack.shape[0] or lt >= stack.shape[1]:
                return 0.0
            return (
                stack[lx, lt]
                * math.factorial(lx)
                * math.factorial(lt)
                / self.h**lx
                / self.dt**lt
            )

        return deriv

    # -- evaluation and diagnostics -----------------------------------------

    def evaluate(self, state: HermiteState1D, xs):
        """(u, v) values at points xs from the piecewise cell interpolants."""
        xs = np.asarray(xs, dtype=float)
        u_int, v_int = self.interpolation_phase(state)
        centers = self._cell_centers(state.parity)
        lo = centers[0]
        idx = np.clip(np.rint((xs - lo) / self.h).astype(int), 0, len(centers) - 1)
        chi = (xs - centers[idx]) / self.h
        u = np.zeros_like(xs)
        v = np.zeros_like(xs)
        for k in range(u_int.shape[1] - 1, -1, -1):
            u = u * chi + u_int[idx, k]
        for k in range(v_int.shape[1] - 1, -1, -1):
            v = v * chi + v_int[idx, k]
        return u, v

    def energy(self, state: HermiteState1D, x_max=None):
        """Quadrature of v^2/2 + c^2 u_x^2/2 over the cell interpolants.

        ``x_max`` cuts the integral there (partial cells integrated over
        their covered portion); the coupled system uses it to make the
        two-grid energy a partition of the domain.
        """
        u_int, v_int = self.interpolation_phase(state)
        centers = self._cell_centers(state.parity)
        nq = 2 * self.m + 5
        xq, wq = gll_nodes(nq)
        total = 0.0
        lo_all = centers - self.h / 2
        hi_all = np.minimum(centers + self.h / 2, np.inf if x_max is None else x_max)
        keep = hi_all > lo_all + 1e-15
        for i in np.flatnonzero(keep):
            lo, hi = lo_all[i], hi_all[i]
            pts = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xq
            chi = (pts - centers[i]) / self.h
            vu = np.vander(chi, u_int.shape[1], increasing=True)
            vv = np.vander(chi, v_int.shape[1], increasing=True)
            dv = np.zeros_like(vu)
            for k in range(1, u_int.shape[1]):
                dv[:, k] = k * vu[:, k - 1] / self.h
            ux = dv @ u_int[i]
            vvals = vv @ v_int[i]
            c2 = self.model.c2 if self.model.constant_speed else self.model.c2_at(pts)
            dens = 0.5 * vvals**2 + 0.5 * c2 * ux**2
            total += float(np.sum(dens * wq) * 0.5 * (hi - lo))
        return total
