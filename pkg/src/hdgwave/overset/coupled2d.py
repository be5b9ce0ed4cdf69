"""Coupled Hermite - DG evolution on overset 2D grids.

A Cartesian background grid (with holes cut around the element rings) runs
the Hermite method; each body carries a curvilinear ring running the element
method.  One coupled step mirrors the 1D construction: the ring elements with
internal boundary faces are prescribed from the Hermite space-time expansions
of the matching half step, the dual stair ring is injected from the element
solution at the half level, and the primal stair ring is projected from the
element solution at the full level.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field

import numpy as np

from hdgwave.dg.solver2d import DGSolver2D
from hdgwave.hermite.solver2d import HermiteSolver2D, HermiteState2D, MaskedRegion
from hdgwave.model import WaveModel
from hdgwave.overset import holes
from hdgwave.overset.transfers import PrescribedElements, compute_schedule, node_transfer_2d
from hdgwave.poly import (
    ContractViolation,
    basis_to_monomial_matrix,
    chebyshev_gauss_nodes,
    convert_basis,
    gll_nodes,
)


@dataclass
class BodyGrid:
    """One element ring: mesh plus its physical boundary data."""

    mesh: object
    bc_inner: object = None  # BoundaryCondition or 'internal'
    bc_outer: object = None


@dataclass
class Scene2D:
    """Configuration of a coupled 2D run."""

    origin: tuple
    h: float
    n_cells: tuple
    m: int
    bodies: list
    active_fn: object
    cfl: float = 0.5
    c: float = 1.0
    bc: dict = field(default_factory=dict)  # hermite rectangle sides
    transfer: str = "projection"
    q_u: int | None = None
    stages: int | None = None
    tau1: float = 0.5
    tau2: float = 0.5
    basis: str = "chebyshev"
    stair_layers: int = 1
    pml: object = None
    max_cfl: float = 0.75


@dataclass
class CoupledState2D:
    hermite: HermiteState2D
    dg: list  # per body: (u, v)
    pml: object
    t: float


class _BodyTransfer:
    """Per-body transfer bundle: prescribed elements and their node tables."""

    def __init__(self, system, solver, mesh):
        self.solver = solver
        m = system.m
        self.elements = mesh.boundary_elements("internal")
        if len(self.elements) == 0:
            raise ContractViolation("element ring has no internal boundary")
        nn = 2 * m + 2
        zc, _ = chebyshev_gauss_nodes(nn)
        rr, ss = np.meshgrid(zc, zc, indexing="ij")
        pts = []
        for e in self.elements:
            i, j = mesh.element_indices(e)
            px, py = mesh.patch.element_map(i, j, rr.ravel(), ss.ravel())
            pts.append(np.stack([px, py], axis=1))
        self.node_xy = np.stack(pts)  # (nbe, nn^2, 2)
        self.nn = nn
        # discrete Chebyshev projection matrix (values at zc -> coefficients)
        tvals = np.cos(np.outer(np.arange(nn), np.arccos(zc)))
        self.proj1d = tvals * (2.0 / nn)
        self.proj1d[0] *= 0.5
        # donor cells on the Hermite grid for both halves
        self.cells1 = system._containing_cells(self.node_xy.reshape(-1, 2), "dual")
        self.cells2 = system._containing_cells(self.node_xy.reshape(-1, 2), "primal")
        self.tables = None  # (au, av) arrays (n_nodes, S+1)

    def build_tables(self, system, expansions, which):
        cells = self.cells1 if which == 1 else self.cells2
        pos = system._kept_positions(cells, which)
        xy = self.node_xy.reshape(-1, 2)
        centers = expansions.centers[pos]
        zx = (xy[:, 0] - centers[:, 0]) / expansions.h
        zy = (xy[:, 1] - centers[:, 1]) / expansions.h
        lu = expansions.U.shape[2]
        lv = expansions.V.shape[2]
        vxu = zx[:, None] ** np.arange(lu)[None, :]
        vyu = zy[:, None] ** np.arange(lu)[None, :]
        au = np.einsum("spab,pa,pb->ps", expansions.U[:, pos], vxu, vyu)
        vxv = vxu[:, :lv]
        vyv = vyu[:, :lv]
        av = np.einsum("spab,pa,pb->ps", expansions.V[:, pos], vxv, vyv)
        self.tables = (au, av)

    def prescribed_at(self, system, tau, order_count):
        au, av = self.tables
        s_levels = au.shape[1]
        dmat = _derivative_matrix(tau, order_count, s_levels, system.dt_a)
        du = au @ dmat.T  # (n_nodes, K)
        dv = av @ dmat.T
        nbe = len(self.elements)
        nn = self.nn
        du = du.reshape(nbe, nn, nn, order_count)
        dv = dv.reshape(nbe, nn, nn, order_count)
        cu = np.einsum("ab,ebck,dc->eadk", self.proj1d, du, self.proj1d)
        cv = np.einsum("ab,ebck,dc->eadk", self.proj1d, dv, self.proj1d)
        nu1 = self.solver.q_u + 1
        nv1 = self.solver.q_v + 1
        values = []
        for k in range(order_count):
            u_rows = np.zeros((nbe, nu1, nu1))
            u_rows[:, :nn, :nn] = cu[..., k]
            v_rows = cv[..., k]
            if system.basis != "chebyshev":
                u_rows = np.stack([
                    convert_basis(u_rows[e], "chebyshev", system.basis) for e in range(nbe)
                ])
                v_rows = np.stack([
                    convert_basis(v_rows[e], "chebyshev", system.basis) for e in range(nbe)
                ])
            values.append((u_rows.reshape(nbe, -1), v_rows.reshape(nbe, -1)))
        return PrescribedElements(self.elements, values)


def _derivative_matrix(tau, order_count, s_levels, dt):
    """D[k, s] such that sum_s a_s D[k, s] is the k-th time derivative."""
    d = np.zeros((order_count, s_levels))
    for k in range(order_count):
        for s in range(k, s_levels):
            d[k, s] = (
                math.factorial(s) / math.factorial(s - k) * tau ** (s - k) / dt**k
            )
    return d


class _StairSampler:
    """Precomputed donor data for one set of stair nodes."""

    def __init__(self, system, nodes_xy):
        self.nodes_xy = nodes_xy
        m = system.m
        z, _ = gll_nodes(2 * m + 4)
        self.z = z
        npts = len(z)
        self.body_idx = []
        self.eids = []
        self.basis_u = []
        self.basis_v = []
        for (x, y) in nodes_xy:
            gx = x + 0.5 * system.h * z
            gy = y + 0.5 * system.h * z
            bid = np.full(npts * npts, -1, dtype=int)
            eid = np.zeros(npts * npts, dtype=int)
            rs = np.zeros((npts * npts, 2))
            for p, (px, py) in enumerate(
                (a, b) for a in gx for b in gy
            ):
                for b, body in enumerate(system.body_solvers):
                    loc = body.mesh.patch.locate(px, py)
                    if loc is not None:
                        (i, j), (r, s) = loc
                        bid[p] = b
                        eid[p] = body.mesh.eid(i, j)
                        rs[p] = (r, s)
                        break
            if np.any(bid < 0):
                raise ContractViolation(
                    f"transfer cell of node ({x:.4g}, {y:.4g}) not covered by element grids"
                )
            sol = system.body_solvers[bid[0]]
            bu, _, _ = sol._pointwise_basis(sol.q_u, rs[:, 0], rs[:, 1])
            bv, _, _ = sol._pointwise_basis(sol.q_v, rs[:, 0], rs[:, 1])
            self.body_idx.append(bid)
            self.eids.append(eid)
            self.basis_u.append(bu)
            self.basis_v.append(bv)

    def fill(self, system, dg_states, target_u, target_v, nodes_idx):
        m = system.m
        npts = len(self.z)
        for n, (i, j) in enumerate(nodes_idx):
            bid = self.body_idx[n]
            eid = self.eids[n]
            uvals = np.empty(npts * npts)
            vvals = np.empty(npts * npts)
            for b in np.unique(bid):
                sel = bid == b
                ub, vb = dg_states[b]
                uvals[sel] = np.einsum("pn,pn->p", self.basis_u[n][sel], ub[eid[sel]])
                vvals[sel] = np.einsum("pn,pn->p", self.basis_v[n][sel], vb[eid[sel]])
            x, y = self.nodes_xy[n]
            du, dv = node_transfer_2d(
                lambda px, py, vals=uvals: vals.reshape(npts, npts),
                lambda px, py, vals=vvals: vals.reshape(npts, npts),
                (x, y), system.h, m, mode=system.transfer,
            )
            target_u[i, j] = du
            target_v[i, j] = dv


class OversetSystem2D:
    def __init__(self, scene: Scene2D):
        self.scene = scene
        self.m = scene.m
        self.h = scene.h
        self.origin = scene.origin
        self.transfer = scene.transfer
        self.basis = scene.basis
        self.q_u = 2 * scene.m + 2 if scene.q_u is None else scene.q_u
        self.stages = self.q_u + 1 if scene.stages is None else scene.stages
        model = WaveModel(speed_squared=scene.c**2)
        self.model = model

        self.masks = holes.cut_holes(scene.origin, scene.h, scene.n_cells,
                                     scene.active_fn, scene.stair_layers)
        self.body_solvers = []
        h_b = np.inf
        for body in scene.bodies:
            solver = DGSolver2D(body.mesh, self.q_u, model,
                                bc_inner=body.bc_inner, bc_outer=body.bc_outer,
                                tau1=scene.tau1, tau2=scene.tau2, basis=scene.basis)
            self.body_solvers.append(solver)
            h_b = min(h_b, body.mesh.min_element_size())
        self.h_b = h_b
        self.dt_a, self.dt_b, self.n_dg = compute_schedule(
            scene.cfl, self.q_u, scene.h, h_b, scene.c, max_cfl=scene.max_cfl
        )
        self.hermite = HermiteSolver2D(
            scene.origin, scene.h, scene.n_cells, scene.m, self.dt_a, model,
            bc=scene.bc, masks=self.masks, cfl_max=scene.max_cfl,
        )
        self.pml = None
        if scene.pml is not None:
            from hdgwave.hermite.pml import PmlSolver2D

            self.pml = PmlSolver2D(self.hermite, scene.pml)

        self._setup_transfers()
        self.timings = {"hermite": 0.0, "dg": 0.0, "h_to_dg": 0.0, "dg_to_h": 0.0}

    # -- donor plumbing ---------------------------------------------------------

    def _containing_cells(self, xy, parity):
        """Flat indices of the donor cells of the given half's expansions."""
        x0, y0 = self.origin
        if parity == "dual":
            # cells centered at dual nodes; grid (nx, ny)
            i = np.floor((xy[:, 0] - x0) / self.h).astype(int)
            j = np.floor((xy[:, 1] - y0) / self.h).astype(int)
            i = np.clip(i, 0, self.hermite.nx - 1)
            j = np.clip(j, 0, self.hermite.ny - 1)
            ok = self.masks.dual[i, j] >= 0  # geometric containment
            comp = self._computable_cells("dual")
            if not np.all(comp[i, j]):
                raise ContractViolation("element node donor cell lacks data (first half)")
            return i * self.hermite.ny + j
        i = np.clip(np.rint((xy[:, 0] - x0) / self.h).astype(int), 0, self.hermite.nx)
        j = np.clip(np.rint((xy[:, 1] - y0) / self.h).astype(int), 0, self.hermite.ny)
        comp = self._computable_cells("primal")
        if not np.all(comp[i, j]):
            raise ContractViolation("element node donor cell lacks data (second half)")
        return i * (self.hermite.ny + 1) + j

    def _computable_cells(self, which):
        """Cells whose corner data exists: dual-centered cells need active
        primal corners; primal-centered cells need dual corners with data."""
        if which == "dual":
            act = self.masks.primal > 0
            return act[:-1, :-1] & act[1:, :-1] & act[:-1, 1:] & act[1:, 1:]
        has = self.masks.dual > 0
        pad = np.zeros((has.shape[0] + 2, has.shape[1] + 2), bool)
        pad[1:-1, 1:-1] = has
        return pad[:-1, :-1] & pad[1:, :-1] & pad[:-1, 1:] & pad[1:, 1:]

    def _kept_positions(self, cells, which):
        kept = self.keep1 if which == 1 else self.keep2
        lookup = self.pos1 if which == 1 else self.pos2
        return lookup[cells]

    def _setup_transfers(self):
        self.transfers = [
            _BodyTransfer(self, solver, solver.mesh) for solver in self.body_solvers
        ]
        all1 = np.concatenate([t.cells1 for t in self.transfers])
        all2 = np.concatenate([t.cells2 for t in self.transfers])
        self.keep1 = np.unique(all1)
        self.keep2 = np.unique(all2)
        n1 = self.hermite.nx * self.hermite.ny
        n2 = (self.hermite.nx + 1) * (self.hermite.ny + 1)
        self.pos1 = np.full(n1, -1, dtype=int)
        self.pos1[self.keep1] = np.arange(len(self.keep1))
        self.pos2 = np.full(n2, -1, dtype=int)
        self.pos2[self.keep2] = np.arange(len(self.keep2))

        self.primal_stairs = holes.stair_nodes(self.masks, "primal")
        self.dual_stairs = holes.stair_nodes(self.masks, "dual")
        xp = self.origin[0] + self.h * self.primal_stairs[:, 0]
        yp = self.origin[1] + self.h * self.primal_stairs[:, 1]
        xd = self.origin[0] + self.h * (self.dual_stairs[:, 0] + 0.5)
        yd = self.origin[1] + self.h * (self.dual_stairs[:, 1] + 0.5)
        self.primal_sampler = _StairSampler(self, np.stack([xp, yp], axis=1))
        self.dual_sampler = _StairSampler(self, np.stack([xd, yd], axis=1))

    # -- initialization -----------------------------------------------------------

    def initialize(self, g0, g1, method="project") -> CoupledState2D:
        h_state = self.hermite.initialize(g0, g1, method=method)
        dg = []
        if method == "derivatives":
            u0 = lambda x, y: g0(x, y, 0, 0)
            v0 = lambda x, y: g1(x, y, 0, 0)
        else:
            u0, v0 = g0, g1
        for solver in self.body_solvers:
            dg.append(solver.initialize(u0, v0))
        pml_state = self.pml.zero_state() if self.pml else None
        return CoupledState2D(h_state, dg, pml_state, 0.0)

    # -- stepping --------------------------------------------------------------------

    def _half(self, state, pml_state, keep):
        if self.pml is None:
            new, exp = self.hermite.half_step(state, keep_cells=keep)
            return new, None, exp
        new, new_pml, exp = self.pml.half_step(state, pml_state, keep_cells=keep)
        return new, new_pml, exp

    def advance(self, state: CoupledState2D) -> CoupledState2D:
        t0 = state.t
        half = self.n_dg // 2

        tic = _time.perf_counter()
        mid, pml_mid, exp1 = self._half(state.hermite, state.pml, self.keep1)
        self.timings["hermite"] += _time.perf_counter() - tic

        tic = _time.perf_counter()
        for tr in self.transfers:
            tr.build_tables(self, exp1, which=1)
        self.timings["h_to_dg"] += _time.perf_counter() - tic

        dg = [(u.copy(), v.copy()) for (u, v) in state.dg]
        dg = self._substep_sweep(dg, t0, range(0, half), 0.0)

        tic = _time.perf_counter()
        self._overwrite_boundaries(dg, 0.5)
        self.dual_sampler.fill(self, dg, mid.u, mid.v, self.dual_stairs)
        self.timings["dg_to_h"] += _time.perf_counter() - tic

        tic = _time.perf_counter()
        out, pml_out, exp2 = self._half(mid, pml_mid, self.keep2)
        self.timings["hermite"] += _time.perf_counter() - tic

        tic = _time.perf_counter()
        for tr in self.transfers:
            tr.build_tables(self, exp2, which=2)
        self.timings["h_to_dg"] += _time.perf_counter() - tic

        dg = self._substep_sweep(dg, t0, range(half, self.n_dg), 0.5)

        tic = _time.perf_counter()
        self._overwrite_boundaries(dg, 0.5)
        self.primal_sampler.fill(self, dg, out.u, out.v, self.primal_stairs)
        self.timings["dg_to_h"] += _time.perf_counter() - tic
        out.t = t0 + self.dt_a
        return CoupledState2D(out, dg, pml_out, t0 + self.dt_a)

    def _substep_sweep(self, dg, t0, steps, tau_origin):
        for nu in steps:
            tau = nu / self.n_dg
            for b, solver in enumerate(self.body_solvers):
                tic = _time.perf_counter()
                pres = self.transfers[b].prescribed_at(self, tau - tau_origin,
                                                       self.stages + 1)
                self.timings["h_to_dg"] += _time.perf_counter() - tic
                tic = _time.perf_counter()
                u, v = solver.taylor_step(
                    dg[b][0], dg[b][1], t0 + tau * self.dt_a, self.dt_b,
                    stages=self.stages, prescribed=pres,
                )
                dg[b] = (u, v)
                self.timings["dg"] += _time.perf_counter() - tic
        return dg

    def _overwrite_boundaries(self, dg, tau):
        for b in range(len(dg)):
            pres = self.transfers[b].prescribed_at(self, tau, 1)
            u_rows, v_rows = pres.stage_data(0)
            dg[b][0][pres.elements] = u_rows
            dg[b][1][pres.elements] = v_rows

    # -- diagnostics --------------------------------------------------------------------

    def max_error(self, state: CoupledState2D, exact_u, oversample=10):
        """Max displacement error over the active Hermite region and all rings."""
        x, y, u, _, valid = self.hermite.evaluate_grid(state.hermite, oversample)
        diff = np.abs(u - exact_u(x, y, state.t))
        err = float(np.max(diff[valid])) if np.any(valid) else 0.0
        for b, solver in enumerate(self.body_solvers):
            xs, ys, uu, _ = solver.evaluate_ref_grid(*state.dg[b], oversample)
            err = max(err, float(np.max(np.abs(uu - exact_u(xs, ys, state.t)))))
        return err

    def dof_counts(self):
        m = self.m
        n_h = int(np.sum(self.masks.primal > 0)) * ((m + 2) ** 2 + (m + 1) ** 2)
        n_b = sum(s.ne * (s.nu + s.nv) for s in self.body_solvers)
        return {"hermite": n_h, "dg": n_b}
