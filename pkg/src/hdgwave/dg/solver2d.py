"""Energy-based discontinuous Galerkin solver on curvilinear quad rings.

Same variational structure as the interval solver: the displacement equation
is tested with gradients (plus the cell-mean row), the velocity equation with
the velocity space, and upwind numerical fluxes make every face contribute
non-positively to the discrete energy rate.  Geometry enters through metric
factors at tensor Gauss points; trace matrices carry c^2 (grad phi . n) along
each element edge with outward orientation.
"""

from __future__ import annotations

import math

import numpy as np

from hdgwave.hermite.core import CflViolation
from hdgwave.model import BoundaryCondition
from hdgwave.poly import basis_vander, basis_vander_deriv, chebyshev_gauss_nodes, chebyshev_project, convert_basis, gauss_nodes

EDGE_SOUTH, EDGE_EAST, EDGE_NORTH, EDGE_WEST = 0, 1, 2, 3


class DGSolver2D:
    """Upwind-flux DG with Taylor stepping on a QuadMesh ring.

    ``bc_inner``/``bc_outer`` attach to the mesh's physical rings
    (BoundaryCondition with uniform trace data g(t, order); Neumann data is
    the outward normal flux).  Rings marked 'internal' expect their elements
    to be prescribed externally; their faces use the interior trace.
    """

    def __init__(self, mesh, q_u, model, bc_inner=None, bc_outer=None,
                 tau1=0.5, tau2=0.5, basis="chebyshev"):
        self.mesh = mesh
        self.q_u = int(q_u)
        self.q_v = self.q_u - 1
        self.model = model
        self.bc_inner = bc_inner
        self.bc_outer = bc_outer
        self.tau1 = float(tau1)
        self.tau2 = float(tau2)
        self.basis = basis
        self.nu = (self.q_u + 1) ** 2
        self.nv = (self.q_v + 1) ** 2
        self.ne = mesh.n_elements
        self._setup()

    # -- setup -----------------------------------------------------------------

    def _tensor_basis(self, deg, pts_r, pts_s):
        """Value/gradient tensor bases at the grid pts_r x pts_s, flattened."""
        vr = basis_vander(self.basis, pts_r, deg)
        vs = basis_vander(self.basis, pts_s, deg)
        dr = basis_vander_deriv(self.basis, pts_r, deg)
        ds = basis_vander_deriv(self.basis, pts_s, deg)
        n1 = len(pts_r)
        n2 = len(pts_s)
        nb = (deg + 1) ** 2
        V = np.einsum("pa,qb->pqab", vr, vs).reshape(n1 * n2, nb)
        Dr = np.einsum("pa,qb->pqab", dr, vs).reshape(n1 * n2, nb)
        Ds = np.einsum("pa,qb->pqab", vr, ds).reshape(n1 * n2, nb)
        return V, Dr, Ds

    def _pointwise_basis(self, deg, r_pts, s_pts):
        """Value/gradient bases at a list of (r, s) points (not a grid)."""
        r_pts = np.atleast_1d(r_pts)
        s_pts = np.atleast_1d(s_pts)
        vr = basis_vander(self.basis, r_pts, deg)
        vs = basis_vander(self.basis, s_pts, deg)
        dr = basis_vander_deriv(self.basis, r_pts, deg)
        ds = basis_vander_deriv(self.basis, s_pts, deg)
        n = len(r_pts)
        nb = (deg + 1) ** 2
        V = np.einsum("pa,pb->pab", vr, vs).reshape(n, nb)
        Dr = np.einsum("pa,pb->pab", dr, vs).reshape(n, nb)
        Ds = np.einsum("pa,pb->pab", vr, ds).reshape(n, nb)
        return V, Dr, Ds

    def _setup(self):
        mesh = self.mesh
        patch = mesh.patch
        nq = self.q_u + 2
        xq, wq = gauss_nodes(nq)
        self.nq2 = nq * nq
        wq2 = np.outer(wq, wq).ravel()
        self.Vu, self.Dur, self.Dus = self._tensor_basis(self.q_u, xq, xq)
        self.Vv, self.Dvr, self.Dvs = self._tensor_basis(self.q_v, xq, xq)

        ne = self.ne
        rr, ss = np.meshgrid(xq, xq, indexing="ij")
        rr, ss = rr.ravel(), ss.ravel()
        self.rx = np.empty((ne, self.nq2))
        self.ry = np.empty((ne, self.nq2))
        self.sx = np.empty((ne, self.nq2))
        self.sy = np.empty((ne, self.nq2))
        self.wdet = np.empty((ne, self.nq2))
        self.c2q = np.empty((ne, self.nq2))
        xq_phys = np.empty((ne, self.nq2))
        yq_phys = np.empty((ne, self.nq2))
        for e in range(ne):
            i, j = mesh.element_indices(e)
            a, b, c, d = patch.element_jacobian(i, j, rr, ss)
            det = a * d - b * c
            if np.min(np.abs(det)) <= 0 or np.min(det) * np.max(det) < 0:
                raise RuntimeError(
                    f"degenerate metric in element {e} (min |det| {np.min(np.abs(det)):.3e})"
                )
            self.rx[e] = d / det
            self.ry[e] = -c / det
            self.sx[e] = -b / det
            self.sy[e] = a / det
            self.wdet[e] = wq2 * np.abs(det)
            px, py = patch.element_map(i, j, rr, ss)
            xq_phys[e], yq_phys[e] = px, py
        if self.model.constant_speed:
            self.c2q[:] = self.model.c2
        else:
            self.c2q = self.model.c2_at(xq_phys, yq_phys)
        self._assemble_volume()
        self._build_faces(xq, wq)

    def _assemble_volume(self):
        cw = self.c2q * self.wdet
        gx_u = self.Dur[None] * self.rx[:, :, None] + self.Dus[None] * self.sx[:, :, None]
        gy_u = self.Dur[None] * self.ry[:, :, None] + self.Dus[None] * self.sy[:, :, None]
        # (ne, nq2, Nu) arrays; moderate size at desk scale
        self._gx_u, self._gy_u = gx_u, gy_u
        gx_v = self.Dvr[None] * self.rx[:, :, None] + self.Dvs[None] * self.sx[:, :, None]
        gy_v = self.Dvr[None] * self.ry[:, :, None] + self.Dvs[None] * self.sy[:, :, None]
        self._gx_v, self._gy_v = gx_v, gy_v

        ku = np.einsum("eqa,eqb,eq->eab", gx_u, gx_u, cw)
        ku += np.einsum("eqa,eqb,eq->eab", gy_u, gy_u, cw)
        self.ku_raw = ku.copy()
        self.mean_u = np.einsum("qb,eq->eb", self.Vu, self.wdet)
        self.mean_v = np.einsum("qb,eq->eb", self.Vv, self.wdet)
        ku[:, 0, :] = self.mean_u
        self.Kinv = np.linalg.inv(ku)
        mv = np.einsum("qa,qb,eq->eab", self.Vv, self.Vv, self.wdet)
        self.Minv = np.linalg.inv(mv)

    def _edge_points(self, edge, t):
        """Reference coordinates along an edge parametrized by t in [-1, 1]."""
        if edge == EDGE_SOUTH:
            return t, -np.ones_like(t)
        if edge == EDGE_NORTH:
            return t, np.ones_like(t)
        if edge == EDGE_WEST:
            return -np.ones_like(t), t
        return np.ones_like(t), t

    def _build_faces(self, xq, wq):
        mesh = self.mesh
        patch = mesh.patch
        nfq = len(xq)
        self.nfq = nfq
        # reference value-trace matrices per edge id
        self.Ev_edge = []
        self.Eu_edge = []
        for edge in range(4):
            er, es = self._edge_points(edge, xq)
            Vu_e, _, _ = self._pointwise_basis(self.q_u, er, es)
            Vv_e, _, _ = self._pointwise_basis(self.q_v, er, es)
            self.Eu_edge.append(Vu_e)
            self.Ev_edge.append(Vv_e)

        faces = []  # (eL, edgeL, eR, edgeR, role): eR = -1 for boundary faces
        nth, nrad = patch.n_theta, patch.n_rad
        for i in range(nth):
            for j in range(nrad):
                e = mesh.eid(i, j)
                # east neighbor (periodic in theta)
                en = mesh.eid((i + 1) % nth, j)
                faces.append((e, EDGE_EAST, en, EDGE_WEST, "interior"))
                # north neighbor or outer boundary
                if j + 1 < nrad:
                    faces.append((e, EDGE_NORTH, mesh.eid(i, j + 1), EDGE_SOUTH, "interior"))
                else:
                    faces.append((e, EDGE_NORTH, -1, -1, "outer"))
                if j == 0:
                    faces.append((e, EDGE_SOUTH, -1, -1, "inner"))
        self.faces = faces
        nf = len(faces)

        # per face: quadrature weights (arc length), normals, per-side trace data
        self.face_w = np.empty((nf, nfq))
        self.Wface_L = np.empty((nf, nfq, self.nu))  # c^2 grad(phi).n_face on side L
        self.Wface_R = np.zeros((nf, nfq, self.nu))
        self.face_sides = np.empty((nf, 2, 2), dtype=int)  # (eid, edge) for L, R
        self.face_role = []
        eps = 1e-3
        for f, (eL, edgeL, eR, edgeR, role) in enumerate(faces):
            iL, jL = mesh.element_indices(eL)
            er, es = self._edge_points(edgeL, xq)
            px, py = patch.element_map(iL, jL, er, es)
            tx = np.zeros(nfq)
            ty = np.zeros(nfq)
            for sgn, wgt in ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)):
                erp, esp = self._edge_points(edgeL, xq + sgn * eps)
                pxp, pyp = patch.element_map(iL, jL, erp, esp)
                tx += wgt * pxp
                ty += wgt * pyp
            tx /= 12 * eps
            ty /= 12 * eps
            arc = np.hypot(tx, ty)
            nx, ny = ty / arc, -tx / arc
            # orient outward from L using an interior probe point
            rin, sin_ = self._edge_points(edgeL, np.array([0.0]))
            probe_r = rin * 0.9
            probe_s = sin_ * 0.9
            qx, qy = patch.element_map(iL, jL, probe_r, probe_s)
            mid = nfq // 2
            if (px[mid] - qx[0]) * nx[mid] + (py[mid] - qy[0]) * ny[mid] < 0:
                nx, ny = -nx, -ny
            self.face_w[f] = arc * wq
            self.Wface_L[f] = self._w_trace(eL, edgeL, xq, nx, ny, px, py)
            if eR >= 0:
                iR, jR = mesh.element_indices(eR)
                prx, pry = patch.element_map(iR, jR, *self._edge_points(edgeR, xq))
                if not (np.allclose(prx, px, atol=1e-10) and np.allclose(pry, py, atol=1e-10)):
                    raise RuntimeError(f"face {f}: paired quadrature points mismatch")
                self.Wface_R[f] = self._w_trace(eR, edgeR, xq, nx, ny, px, py)
            self.face_sides[f, 0] = (eL, edgeL)
            self.face_sides[f, 1] = (eR, edgeR)
            self.face_role.append(role)

        # per (element, edge): owning face and side
        self.face_of = np.full((self.ne, 4), -1, dtype=int)
        self.side_of = np.zeros((self.ne, 4), dtype=int)
        for f, (eL, edgeL, eR, edgeR, role) in enumerate(faces):
            self.face_of[eL, edgeL] = f
            self.side_of[eL, edgeL] = 0
            if eR >= 0:
                self.face_of[eR, edgeR] = f
                self.side_of[eR, edgeR] = 1

    def _w_trace(self, e, edge, xq, nx, ny, px, py):
        """Matrix mapping u coefficients to c^2 grad(u).n at the edge points."""
        mesh = self.mesh
        i, j = mesh.element_indices(e)
        er, es = self._edge_points(edge, xq)
        a, b, c, d = mesh.patch.element_jacobian(i, j, er, es)
        det = a * d - b * c
        rx, ry = d / det, -c / det
        sx, sy = -b / det, a / det
        c2 = self.model.c2 if self.model.constant_speed else self.model.c2_at(px, py)
        _, Dur1, Dus1 = self._pointwise_basis(self.q_u, er, es)
        gx = Dur1 * rx[:, None] + Dus1 * sx[:, None]
        gy = Dur1 * ry[:, None] + Dus1 * sy[:, None]
        c2col = np.full(len(xq), c2) if np.isscalar(c2) else c2
        return c2col[:, None] * (gx * nx[:, None] + gy * ny[:, None])

    # -- state helpers -----------------------------------------------------------

    def zero_state(self):
        return np.zeros((self.ne, self.nu)), np.zeros((self.ne, self.nv))

    def project_function(self, fn, degree=None):
        """Element coefficients by Chebyshev-point sampling (basis converted)."""
        deg = self.q_u if degree is None else degree
        zq, _ = chebyshev_gauss_nodes(deg + 1)
        out = np.zeros((self.ne, (deg + 1) ** 2))
        rr, ss = np.meshgrid(zq, zq, indexing="ij")
        for e in range(self.ne):
            i, j = self.mesh.element_indices(e)
            px, py = self.mesh.patch.element_map(i, j, rr, ss)
            coeffs = chebyshev_project(fn(px, py), deg).coeffs
            out[e] = convert_basis(coeffs, "chebyshev", self.basis).ravel()
        return out

    def initialize(self, g0, g1):
        return self.project_function(g0, self.q_u), self.project_function(g1, self.q_v)

    # -- operator ------------------------------------------------------------------

    def _bc_for(self, role):
        return self.bc_inner if role == "inner" else self.bc_outer

    def _face_values(self, u, v, t, data_order):
        """Traces, fluxes and jumps at every face."""
        eL = self.face_sides[:, 0, 0]
        edL = self.face_sides[:, 0, 1]
        eR = self.face_sides[:, 1, 0]
        edR = self.face_sides[:, 1, 1]
        nf = len(self.faces)
        vL = np.empty((nf, self.nfq))
        vR = np.empty((nf, self.nfq))
        wL = np.einsum("fpn,fn->fp", self.Wface_L, u[eL])
        wR = np.empty((nf, self.nfq))
        for edge in range(4):
            selL = edL == edge
            if np.any(selL):
                vL[selL] = v[eL[selL]] @ self.Ev_edge[edge].T
            selR = (edR == edge) & (eR >= 0)
            if np.any(selR):
                vR[selR] = v[eR[selR]] @ self.Ev_edge[edge].T
        interiorR = eR >= 0
        wR[interiorR] = np.einsum(
            "fpn,fn->fp", self.Wface_R[interiorR], u[eR[interiorR]]
        )
        for f in np.flatnonzero(~interiorR):
            role = self.face_role[f]
            bc = self._bc_for(role)
            if bc is None or bc == "internal":
                vR[f] = vL[f]
                wR[f] = wL[f]
            elif isinstance(bc, BoundaryCondition):
                if bc.kind == "dirichlet":
                    vR[f] = 2.0 * bc.data(t, data_order + 1) - vL[f]
                    wR[f] = wL[f]
                else:
                    vR[f] = vL[f]
                    wR[f] = 2.0 * bc.data(t, data_order) - wL[f]
            else:
                raise TypeError(f"unsupported boundary spec {bc!r}")
        vstar = 0.5 * (vL + vR) - self.tau1 * (wL - wR)
        wstar = 0.5 * (wL + wR) - self.tau2 * (vL - vR)
        return vL, vR, wL, wR, vstar, wstar

    def apply(self, u, v, t=0.0, data_order=0):
        """Semi-discrete rates (du/dt, dv/dt)."""
        cw = self.c2q * self.wdet
        ur = np.einsum("qn,en->eq", self.Dur, u)
        us = np.einsum("qn,en->eq", self.Dus, u)
        ux = ur * self.rx + us * self.sx
        uy = ur * self.ry + us * self.sy
        vr = np.einsum("qn,en->eq", self.Dvr, v)
        vs = np.einsum("qn,en->eq", self.Dvs, v)
        vx = vr * self.rx + vs * self.sx
        vy = vr * self.ry + vs * self.sy

        rhs_v = -(
            np.einsum("eqb,eq->eb", self._gx_v, ux * cw)
            + np.einsum("eqb,eq->eb", self._gy_v, uy * cw)
        )
        rhs_u = (
            np.einsum("eqb,eq->eb", self._gx_u, vx * cw)
            + np.einsum("eqb,eq->eb", self._gy_u, vy * cw)
        )

        vL, vR, wL, wR, vstar, wstar = self._face_values(u, v, t, data_order)
        for edge in range(4):
            fids = self.face_of[:, edge]
            have = fids >= 0
            f = fids[have]
            side = self.side_of[have, edge]
            sign = np.where(side == 0, 1.0, -1.0)
            flux_w = wstar[f] * self.face_w[f] * sign[:, None]
            rhs_v[have] += flux_w @ self.Ev_edge[edge]
            v_self = np.where(side[:, None] == 0, vL[f], vR[f])
            jump = (vstar[f] - v_self) * self.face_w[f]
            # the trace matrices carry the face normal; the R side's outward
            # normal is its negative
            wmat = np.where(
                (side == 0)[:, None, None], self.Wface_L[f], -self.Wface_R[f]
            )
            rhs_u[have] += np.einsum("fpn,fp->fn", wmat, jump)

        rhs_u[:, 0] = np.einsum("eb,eb->e", self.mean_v, v)
        du = np.einsum("eab,eb->ea", self.Kinv, rhs_u)
        dv = np.einsum("eab,eb->ea", self.Minv, rhs_v)
        return du, dv

    def face_dissipation(self, u, v, t=0.0, data_order=0):
        """Sum of -tau1 [[W]]^2 - tau2 [[v]]^2 over faces (quadrature along
        faces; physical ghost faces at half weight)."""
        vL, vR, wL, wR, _, _ = self._face_values(u, v, t, data_order)
        jw = wL - wR
        jv = vL - vR
        weight = np.where(self.face_sides[:, 1, 0] >= 0, 1.0, 0.5)
        per_face = np.sum((-self.tau1 * jw**2 - self.tau2 * jv**2) * self.face_w, axis=1)
        return float(np.sum(per_face * weight))

    # -- diagnostics / stepping ------------------------------------------------------

    def energy(self, u, v):
        vq = np.einsum("qn,en->eq", self.Vv, v)
        ur = np.einsum("qn,en->eq", self.Dur, u)
        us = np.einsum("qn,en->eq", self.Dus, u)
        ux = ur * self.rx + us * self.sx
        uy = ur * self.ry + us * self.sy
        dens = 0.5 * vq**2 + 0.5 * self.c2q * (ux**2 + uy**2)
        return float(np.sum(dens * self.wdet))

    def energy_rate(self, u, v, du, dv):
        """d/dt of the discrete energy given the rates (for the identity test)."""
        vq = np.einsum("qn,en->eq", self.Vv, v)
        dvq = np.einsum("qn,en->eq", self.Vv, dv)
        ux = np.einsum("qn,en->eq", self.Dur, u) * self.rx + np.einsum("qn,en->eq", self.Dus, u) * self.sx
        uy = np.einsum("qn,en->eq", self.Dur, u) * self.ry + np.einsum("qn,en->eq", self.Dus, u) * self.sy
        dux = np.einsum("qn,en->eq", self.Dur, du) * self.rx + np.einsum("qn,en->eq", self.Dus, du) * self.sx
        duy = np.einsum("qn,en->eq", self.Dur, du) * self.ry + np.einsum("qn,en->eq", self.Dus, du) * self.sy
        dens = vq * dvq + self.c2q * (ux * dux + uy * duy)
        return float(np.sum(dens * self.wdet))

    def max_stable_dt(self):
        return 0.15 * self.mesh.min_element_size() / (self.q_u * self.model.c)

    def taylor_step(self, u, v, t, dt_b, stages=None, prescribed=None, check_cfl=True):
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

    # -- evaluation --------------------------------------------------------------------

    def evaluate_points(self, u, v, xs, ys):
        """(u, v) at physical points inside the ring (None outside)."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        out_u = np.full(len(xs), np.nan)
        out_v = np.full(len(xs), np.nan)
        eids, rs, ss_, keep = [], [], [], []
        for n, (x, y) in enumerate(zip(xs, ys)):
            loc = self.mesh.patch.locate(x, y)
            if loc is None:
                continue
            (i, j), (r, s) = loc
            eids.append(self.mesh.eid(i, j))
            rs.append(r)
            ss_.append(s)
            keep.append(n)
        if keep:
            Vu1, _, _ = self._pointwise_basis(self.q_u, np.array(rs), np.array(ss_))
            Vv1, _, _ = self._pointwise_basis(self.q_v, np.array(rs), np.array(ss_))
            eids = np.array(eids)
            out_u[keep] = np.einsum("pn,pn->p", Vu1, u[eids])
            out_v[keep] = np.einsum("pn,pn->p", Vv1, v[eids])
        return out_u, out_v

    def evaluate_ref_grid(self, u, v, pts_per_axis=10):
        """Tensor evaluation on every element; returns (x, y, u, v) flattened."""
        z = (np.arange(pts_per_axis) + 0.5) / pts_per_axis * 2 - 1
        Vu, _, _ = self._tensor_basis(self.q_u, z, z)
        Vv, _, _ = self._tensor_basis(self.q_v, z, z)
        uvals = np.einsum("pn,en->ep", Vu, u)
        vvals = np.einsum("pn,en->ep", Vv, v)
        xs = np.empty_like(uvals)
        ys = np.empty_like(uvals)
        rr, ss = np.meshgrid(z, z, indexing="ij")
        for e in range(self.ne):
            i, j = self.mesh.element_indices(e)
            px, py = self.mesh.patch.element_map(i, j, rr.ravel(), ss.ravel())
            xs[e], ys[e] = px, py
        return xs.ravel(), ys.ravel(), uvals.ravel(), vvals.ravel()
