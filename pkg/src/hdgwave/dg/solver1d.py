"""Energy-based discontinuous Galerkin solver for the 1D wave equation.

Per element, displacement lives in polynomials of degree q_u and velocity in
degree q_v = q_u - 1 (Chebyshev or Legendre tensor basis on [-1, 1]).  The
displacement equation is tested with gradients of the test space, which makes
the discrete energy rate a sum of non-positive face terms once the upwind
fluxes are chosen; the constant mode is fixed by the cell-mean equation.
Time stepping is a truncated Taylor series of repeated operator applications.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hdgwave.hermite.core import CflViolation
from hdgwave.model import BoundaryCondition
from hdgwave.poly import basis_vander, basis_vander_deriv, gauss_nodes


@dataclass
class Mesh1D:
    """Interval mesh given by its node coordinates (ascending)."""

    nodes: np.ndarray

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("mesh nodes must be strictly ascending")

    @property
    def n_elements(self):
        return len(self.nodes) - 1

    @property
    def centers(self):
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    @property
    def widths(self):
        return np.diff(self.nodes)


class DGSolver1D:
    """Upwind-flux DG with Taylor time stepping on an interval mesh.

    ``bc_left``/``bc_right`` are BoundaryCondition instances or the string
    'internal' for an overset internal boundary (exterior trace taken equal to
    the interior one; such elements are normally prescribed from outside).
    Dirichlet data is the displacement trace g(t, order); Neumann data is the
    coordinate derivative trace.
    """

    def __init__(self, mesh: Mesh1D, q_u, model, bc_left, bc_right,
                 tau1=0.5, tau2=0.5, basis="chebyshev"):
        self.mesh = mesh
        self.q_u = int(q_u)
        self.q_v = self.q_u - 1
        self.model = model
        self.bc_left = bc_left
        self.bc_right = bc_right
        self.tau1 = float(tau1)
        self.tau2 = float(tau2)
        self.basis = basis
        self.nu = self.q_u + 1
        self.nv = self.q_v + 1
        self.ne = mesh.n_elements
        if not model.constant_speed:
            raise ValueError("the interval DG solver expects a constant speed")
        self.c2 = model.c2
        self._setup()

    def _setup(self):
        nq = self.q_u + 2
        xq, wq = gauss_nodes(nq)
        self.xq, self.wq = xq, wq
        self.Vu = basis_vander(self.basis, xq, self.q_u)
        self.Du = basis_vander_deriv(self.basis, xq, self.q_u)
        self.Vv = basis_vander(self.basis, xq, self.q_v)
        self.Dv = basis_vander_deriv(self.basis, xq, self.q_v)
        ends = np.array([-1.0, 1.0])
        self.Eu = basis_vander(self.basis, ends, self.q_u)  # (2, nu)
        self.EDu = basis_vander_deriv(self.basis, ends, self.q_u)
        self.Ev = basis_vander(self.basis, ends, self.q_v)

        jac = self.mesh.widths / 2.0  # (ne,)
        self.jac = jac
        c2 = self.c2
        mv = np.einsum("qa,q,qb->ab", self.Vv, wq, self.Vv)
        ku = np.einsum("qa,q,qb->ab", self.Du, wq, self.Du) * c2
        self.A_vu = np.einsum("qa,q,qb->ab", self.Dv, wq, self.Du) * c2  # scaled 1/jac later
        self.A_uv = np.einsum("qa,q,qb->ab", self.Du, wq, self.Dv) * c2
        self.mean_u = np.einsum("q,qb->b", wq, self.Vu)  # times jac
        self.mean_v = np.einsum("q,qb->b", wq, self.Vv)
        self.Minv = np.stack([np.linalg.inv(mv * j) for j in jac])
        kinvs = []
        for j in jac:
            k = ku / j
            k = k.copy()
            k[0, :] = self.mean_u * j  # constant test row is void; impose the mean
            kinvs.append(np.linalg.inv(k))
        self.Kinv = np.stack(kinvs)
        # raw stiffness kept for the energy quadrature
        self.ku_raw = ku

    # -- state helpers -------------------------------------------------------

    def zero_state(self):
        return np.zeros((self.ne, self.nu)), np.zeros((self.ne, self.nv))

    def project_function(self, fn, degree=None):
        """Element coefficients of fn.

        The projection itself is basis independent (weighted sampling at
        Chebyshev-Gauss points); a basis change afterwards re-expresses the
        same polynomial in the solver's basis.
        """
        from hdgwave.poly import chebyshev_gauss_nodes, chebyshev_project, convert_basis

        deg = self.q_u if degree is None else degree
        n = deg + 1
        xs, _ = chebyshev_gauss_nodes(n)
        out = np.zeros((self.ne, deg + 1))
        for e in range(self.ne):
            pts = self.mesh.centers[e] + self.jac[e] * xs
            coeffs = chebyshev_project(fn(pts), deg).coeffs
            out[e] = convert_basis(coeffs, "chebyshev", self.basis)
        return out

    def initialize(self, g0, g1):
        u = self.project_function(g0, self.q_u)
        v = self.project_function(g1, self.q_v)
        return u, v

    # -- traces and fluxes ---------------------------------------------------

    def _traces(self, u, v):
        """Endpoint traces: v and W = c^2 u_x at both ends of every element."""
        vtr = v @ self.Ev.T  # (ne, 2)
        wtr = (u @ self.EDu.T) * (self.c2 / self.jac[:, None])
        return vtr, wtr

    def _bc_ghost(self, bc, v_int, w_int, t, data_order):
        if bc == "internal":
            return v_int, w_int
        if not isinstance(bc, BoundaryCondition):
            raise TypeError(f"unsupported boundary spec {bc!r}")
        if bc.kind == "dirichlet":
            return 2.0 * bc.data(t, data_order + 1) - v_int, w_int
        return v_int, 2.0 * self.c2 * bc.data(t, data_order) - w_int

    def _face_fluxes(self, u, v, t, data_order):
        """Numerical fluxes (v*, W*) at the ne + 1 faces, left-to-right states."""
        vtr, wtr = self._traces(u, v)
        vl = np.empty(self.ne + 1)
        vr = np.empty(self.ne + 1)
        wl = np.empty(self.ne + 1)
        wr = np.empty(self.ne + 1)
        vl[1:] = vtr[:, 1]
        wl[1:] = wtr[:, 1]
        vr[: self.ne] = vtr[:, 0]
        wr[: self.ne] = wtr[:, 0]
        vr_end, wr_end = self._bc_ghost(self.bc_right, vtr[-1, 1], wtr[-1, 1], t, data_order)
        vl0, wl0 = self._bc_ghost(self.bc_left, vtr[0, 0], wtr[0, 0], t, data_order)
        vl[0], wl[0] = vl0, wl0
        vr[-1], wr[-1] = vr_end, wr_end
        vstar = 0.5 * (vl + vr) - self.tau1 * (wl - wr)
        wstar = 0.5 * (wl + wr) - self.tau2 * (vl - vr)
        return vstar, wstar, (vl, vr, wl, wr)

    # -- spatial operator ----------------------------------------------------

    def apply(self, u, v, t=0.0, data_order=0):
        """Semi-discrete rates (du/dt, dv/dt).

        ``data_order`` differentiates the boundary data in time, which is what
        repeated operator application inside the Taylor step requires.
        """
        vstar, wstar, (vl, vr, wl, wr) = self._face_fluxes(u, v, t, data_order)
        inv_jac = 1.0 / self.jac

        rhs_v = -np.einsum("ab,eb,e->ea", self.A_vu, u, inv_jac)
        rhs_v += np.outer(wstar[1:], self.Ev[1]) - np.outer(wstar[:-1], self.Ev[0])

        rhs_u = np.einsum("ab,eb,e->ea", self.A_uv, v, inv_jac)
        vtr, _ = self._traces(u, v)
        jump_r = vstar[1:] - vtr[:, 1]
        jump_l = vstar[:-1] - vtr[:, 0]
        rhs_u += (self.c2 * inv_jac)[:, None] * (
            np.outer(jump_r, self.EDu[1]) - np.outer(jump_l, self.EDu[0])
        )
        rhs_u[:, 0] = (v @ self.mean_v) * self.jac  # cell-mean equation

        du = np.einsum("eab,eb->ea", self.Kinv, rhs_u)
        dv = np.einsum("eab,eb->ea", self.Minv, rhs_v)
        return du, dv

    def face_dissipation(self, u, v, t=0.0, data_order=0):
        """Sum over faces of -tau1 [[W]]^2 - tau2 [[v]]^2.

        Physical ghost faces count at half weight: only one element side
        contributes to the energy there.
        """
        _, _, (vl, vr, wl, wr) = self._face_fluxes(u, v, t, data_order)
        jw = wl - wr
        jv = vl - vr
        weight = np.ones(self.ne + 1)
        weight[0] = weight[-1] = 0.5
        return float(np.sum(weight * (-self.tau1 * jw**2 - self.tau2 * jv**2)))

    # -- diagnostics ---------------------------------------------------------

    def energy(self, u, v):
        """H = sum over elements of int v^2/2 + c^2 u_x^2/2."""
        vq = v @ self.Vv.T  # (ne, nq)
        uxq = (u @ self.Du.T) / self.jac[:, None]
        dens = 0.5 * vq**2 + 0.5 * self.c2 * uxq**2
        return float(np.sum(dens * self.wq[None, :] * self.jac[:, None]))

    def evaluate(self, u, v, xs):
        """Pointwise values of (u, v) at xs inside the mesh."""
        xs = np.asarray(xs, dtype=float)
        idx = np.clip(np.searchsorted(self.mesh.nodes, xs, side="right") - 1, 0, self.ne - 1)
        r = (xs - self.mesh.centers[idx]) / self.jac[idx]
        vu = basis_vander(self.basis, r, self.q_u)
        vv = basis_vander(self.basis, r, self.q_v)
        return np.einsum("pn,pn->p", vu, u[idx]), np.einsum("pn,pn->p", vv, v[idx])

    # -- time stepping -------------------------------------------------------

    def max_stable_dt(self):
        return 0.15 * np.min(self.mesh.widths) / (self.q_u * self.model.c)

    def taylor_step(self, u, v, t, dt_b, stages=None, prescribed=None,
                    check_cfl=True):
        """One Taylor substep of size dt_b with ``stages`` operator applications.

        ``prescribed`` optionally pins elements whose coefficients are given
        externally: an object with ``elements`` (index array) and
        ``stage_data(k)`` returning (u_rows, v_rows) holding the k-th time
        derivative of the prescribed solution at time t.
        """
        stages = self.q_u + 1 if stages is None else stages
        if stages < self.q_u + 1:
            raise ValueError("Taylor stages must exceed the spatial degree")
        if check_cfl:
            lim = self.max_stable_dt()
            if dt_b > lim * (1 + 1e-9):
                raise CflViolation(
                    f"dt_b = {dt_b:.4g} exceeds 0.15 h_b / (q_u c) = {lim:.4g}"
                )
        yu, yv = u.copy(), v.copy()
        if prescribed is not None:
            pu, pv = prescribed.stage_data(0)
            yu[prescribed.elements] = pu
            yv[prescribed.elements] = pv
        acc_u = yu.copy()
        acc_v = yv.copy()
        fac = 1.0
        for k in range(1, stages + 1):
            yu, yv = self.apply(yu, yv, t, data_order=k - 1)
            if prescribed is not None:
                pu, pv = prescribed.stage_data(k)
                yu[prescribed.elements] = pu
                yv[prescribed.elements] = pv
            fac *= dt_b / k
            acc_u += fac * yu
            acc_v += fac * yv
        return acc_u, acc_v
