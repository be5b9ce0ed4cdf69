"""Coupled Hermite - DG evolution on a pair of overlapping 1D grids.

Grid a (Cartesian, Hermite) spans the whole domain with spacing h_a = L/n_a;
grid b (n_b elements of width 0.9 h_a by default) covers the right end, so
the overlap is the fixed multiple n_b h_b of the Hermite spacing.  The two
rightmost Hermite carriers are fed by the element grid instead of evolving:
the last dual node is injected at the half level and the last primal node
after the full step.  The element grid takes an even number of Taylor
substeps per Hermite step, its boundary element prescribed from the Hermite
space-time expansions of the matching half step; each expansion is only ever
evaluated inside its own half-step window.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field

import numpy as np

from hdgwave.dg.solver1d import DGSolver1D, Mesh1D
from hdgwave.hermite.solver1d import HermiteSolver1D
from hdgwave.model import BoundaryCondition, WaveModel
from hdgwave.overset.transfers import (
    PrescribedElements,
    compute_schedule,
    node_transfer_1d,
)
from hdgwave.poly import ContractViolation, chebyshev_gauss_nodes, chebyshev_project, convert_basis


@dataclass
class OversetConfig1D:
    m: int = 1
    cfl: float = 0.5
    n_a: int = 20
    n_b: int = 5
    hb_over_ha: float = 0.9
    c: float = 1.0
    domain: tuple = (0.0, 1.0)
    transfer: str = "projection"
    q_u: int | None = None
    stages: int | None = None
    tau1: float = 0.5
    tau2: float = 0.5
    basis: str = "chebyshev"
    bc_left: BoundaryCondition = field(default_factory=lambda: BoundaryCondition("dirichlet"))
    bc_right: BoundaryCondition = field(default_factory=lambda: BoundaryCondition("neumann"))
    max_cfl: float = 0.75

    @property
    def order(self):
        return 2 * self.m + 1


@dataclass
class CoupledState1D:
    hermite: object
    dg_u: np.ndarray
    dg_v: np.ndarray
    t: float


class OversetSystem1D:
    def __init__(self, config: OversetConfig1D):
        self.config = config
        m = config.m
        length = config.domain[1] - config.domain[0]
        self.h_a = length / config.n_a
        self.h_b = config.hb_over_ha * self.h_a
        self.x_a0 = config.domain[0]
        self.x_a_end = config.domain[1]
        self.x_b0 = config.domain[1] - config.n_b * self.h_b
        if self.x_b0 <= self.x_a0:
            raise ContractViolation("element grid covers the whole domain")

        self.q_u = 2 * m + 2 if config.q_u is None else config.q_u
        self.stages = self.q_u + 1 if config.stages is None else config.stages
        self.dt_a, self.dt_b, self.n_dg = compute_schedule(
            config.cfl, self.q_u, self.h_a, self.h_b, config.c, max_cfl=config.max_cfl
        )
        model = WaveModel(speed_squared=config.c**2)
        self.model = model
        self.hermite = HermiteSolver1D(
            self.x_a0, self.h_a, config.n_a, m, self.dt_a, model,
            bc_left=config.bc_left, bc_right="transfer",
            cfl_max=config.max_cfl,
        )
        mesh = Mesh1D(self.x_b0 + self.h_b * np.arange(config.n_b + 1))
        self.dg = DGSolver1D(
            mesh, self.q_u, model,
            bc_left="internal", bc_right=config.bc_right,
            tau1=config.tau1, tau2=config.tau2, basis=config.basis,
        )
        self._setup_donors()
        self.timings = {"hermite": 0.0, "dg": 0.0, "h_to_dg": 0.0, "dg_to_h": 0.0}

    def _setup_donors(self):
        m = self.config.m
        # transfer-fed Hermite carriers: last primal node and last dual node;
        # both project over the last grid-a cell, which must sit inside grid b
        self.stair_x = self.x_a_end
        self.dual_stair_x = self.x_a_end - self.h_a / 2.0
        cell_lo = self.x_a_end - self.h_a
        if cell_lo < self.x_b0 - 1e-12:
            raise ContractViolation(
                f"projection cell [{cell_lo:.4g}, {self.x_a_end:.4g}] not covered "
                f"by the element grid starting at {self.x_b0:.4g}"
            )
        self.boundary_elements = np.array([0])
        nodes, _ = chebyshev_gauss_nodes(2 * m + 2)
        centers = self.dg.mesh.centers[self.boundary_elements]
        self.dg_node_x = (
            centers[:, None] + self.dg.jac[self.boundary_elements][:, None] * nodes[None, :]
        )
        margin = 2 * self.h_a
        if np.any(self.dg_node_x > self.x_a_end - margin) or np.any(self.dg_node_x < self.x_a0):
            raise ContractViolation(
                "prescribed-element nodes not covered by interior Hermite cells"
            )
        self._cheb_deg = 2 * m + 1

    # -- initialization ------------------------------------------------------

    def initialize(self, g0, g1, method="derivatives"):
        h_state = self.hermite.initialize(g0, g1, method=method)
        if method == "derivatives":
            u0 = lambda x: g0(x, 0)
            v0 = lambda x: g1(x, 0)
        else:
            u0, v0 = g0, g1
        dg_u, dg_v = self.dg.initialize(u0, v0)
        return CoupledState1D(h_state, dg_u, dg_v, 0.0)

    # -- transfers -----------------------------------------------------------

    def _hermite_node_tables(self, expansions):
        """Per prescribed-element node: time-slice values of u and v."""
        tables = []
        for x in self.dg_node_x.ravel():
            i = expansions.locate(x)
            au = expansions.slice_values(i, np.array([x]), "u")[:, 0]
            av = expansions.slice_values(i, np.array([x]), "v")[:, 0]
            tables.append((au, av))
        return tables

    def _prescribed_at(self, tables, tau, order_count):
        """Stage data for every derivative order at scaled time tau."""
        ne_b = len(self.boundary_elements)
        n_nodes = self.dg_node_x.shape[1]
        values = []
        for k in range(order_count):
            u_nodes = np.empty((ne_b, n_nodes))
            v_nodes = np.empty((ne_b, n_nodes))
            for j, (au, av) in enumerate(tables):
                e, p = divmod(j, n_nodes)
                u_nodes[e, p] = _time_derivative(au, tau, k, self.dt_a)
                v_nodes[e, p] = _time_derivative(av, tau, k, self.dt_a)
            u_rows = np.zeros((ne_b, self.dg.nu))
            v_rows = np.zeros((ne_b, self.dg.nv))
            for e in range(ne_b):
                cu = chebyshev_project(u_nodes[e], self._cheb_deg).coeffs
                cv = chebyshev_project(v_nodes[e], self._cheb_deg).coeffs
                u_rows[e, : len(cu)] = convert_basis(cu, "chebyshev", self.config.basis)
                v_rows[e, : len(cv)] = convert_basis(cv, "chebyshev", self.config.basis)
            values.append((u_rows, v_rows))
        return PrescribedElements(self.boundary_elements, values)

    def _overwrite_boundary(self, dg_u, dg_v, tables, tau):
        pres = self._prescribed_at(tables, tau, 1)
        u_rows, v_rows = pres.stage_data(0)
        dg_u[self.boundary_elements] = u_rows
        dg_v[self.boundary_elements] = v_rows

    def _node_from_dg(self, dg_u, dg_v, cell_center, node):
        return node_transfer_1d(
            lambda pts: self.dg.evaluate(dg_u, dg_v, pts)[0],
            lambda pts: self.dg.evaluate(dg_u, dg_v, pts)[1],
            cell_center, self.h_a, self.config.m, node=node,
            mode=self.config.transfer,
        )

    # -- time stepping -------------------------------------------------------

    def advance(self, state: CoupledState1D) -> CoupledState1D:
        t0 = state.t
        half = self.n_dg // 2

        tic = _time.perf_counter()
        mid, exp1 = self.hermite.half_step(state.hermite)
        self.timings["hermite"] += _time.perf_counter() - tic

        tic = _time.perf_counter()
        tab1 = self._hermite_node_tables(exp1)
        self.timings["h_to_dg"] += _time.perf_counter() - tic

        dg_u, dg_v = state.dg_u.copy(), state.dg_v.copy()
        dg_u, dg_v = self._substep_sweep(dg_u, dg_v, tab1, t0, range(0, half), 0.0)

        tic = _time.perf_counter()
        self._overwrite_boundary(dg_u, dg_v, tab1, 0.5)
        du, dv = self._node_from_dg(dg_u, dg_v, self.dual_stair_x, self.dual_stair_x)
        mid.u[-1] = du
        mid.v[-1] = dv
        self.timings["dg_to_h"] += _time.perf_counter() - tic

        tic = _time.perf_counter()
        out, exp2 = self.hermite.half_step(mid)
        self.timings["hermite"] += _time.perf_counter() - tic

        tic = _time.perf_counter()
        tab2 = self._hermite_node_tables(exp2)
        self.timings["h_to_dg"] += _time.perf_counter() - tic

        dg_u, dg_v = self._substep_sweep(dg_u, dg_v, tab2, t0, range(half, self.n_dg), 0.5)

        tic = _time.perf_counter()
        self._overwrite_boundary(dg_u, dg_v, tab2, 0.5)
        su, sv = self._node_from_dg(
            dg_u, dg_v, self.x_a_end - self.h_a / 2.0, self.stair_x
        )
        out.u[-1] = su
        out.v[-1] = sv
        self.timings["dg_to_h"] += _time.perf_counter() - tic
        out.t = t0 + self.dt_a
        return CoupledState1D(out, dg_u, dg_v, t0 + self.dt_a)

    def _substep_sweep(self, dg_u, dg_v, tables, t0, steps, tau_origin):
        for nu in steps:
            tau = nu / self.n_dg
            tic = _time.perf_counter()
            pres = self._prescribed_at(tables, tau - tau_origin, self.stages + 1)
            self.timings["h_to_dg"] += _time.perf_counter() - tic
            tic = _time.perf_counter()
            dg_u, dg_v = self.dg.taylor_step(
                dg_u, dg_v, t0 + tau * self.dt_a, self.dt_b,
                stages=self.stages, prescribed=pres,
            )
            self.timings["dg"] += _time.perf_counter() - tic
        return dg_u, dg_v

    # -- state vector packing (stability analysis) ----------------------------

    def pack(self, state: CoupledState1D) -> np.ndarray:
        return np.concatenate([
            state.hermite.u.ravel(), state.hermite.v.ravel(),
            state.dg_u.ravel(), state.dg_v.ravel(),
        ])

    def unpack(self, w, t=0.0) -> CoupledState1D:
        from hdgwave.hermite.solver1d import HermiteState1D

        n_nodes = self.config.n_a + 1
        m = self.config.m
        sizes = [n_nodes * (m + 2), n_nodes * (m + 1),
                 self.dg.ne * self.dg.nu, self.dg.ne * self.dg.nv]
        parts = np.split(np.asarray(w, dtype=float), np.cumsum(sizes)[:-1])
        h = HermiteState1D(
            parts[0].reshape(n_nodes, m + 2).copy(),
            parts[1].reshape(n_nodes, m + 1).copy(), "primal", t,
        )
        return CoupledState1D(
            h, parts[2].reshape(self.dg.ne, self.dg.nu).copy(),
            parts[3].reshape(self.dg.ne, self.dg.nv).copy(), t,
        )

    @property
    def n_dofs(self):
        n_nodes = self.config.n_a + 1
        m = self.config.m
        return n_nodes * (2 * m + 3) + self.dg.ne * (self.dg.nu + self.dg.nv)

    # -- diagnostics -----------------------------------------------------------

    def total_energy(self, state: CoupledState1D):
        """Energy over a partition of the domain (Hermite left of the element
        grid, elements beyond), so the overlap is not double counted."""
        return (
            self.hermite.energy(state.hermite, x_max=self.x_b0)
            + self.dg.energy(state.dg_u, state.dg_v)
        )

    def max_error(self, state: CoupledState1D, exact_u, oversample=10):
        """Max pointwise displacement error over both grids, oversampled."""
        xa = np.linspace(self.x_a0, self.x_a_end, oversample * self.config.n_a + 1)
        ua, _ = self.hermite.evaluate(state.hermite, xa)
        err_a = np.max(np.abs(ua - exact_u(xa, state.t)))
        xb = np.linspace(self.x_b0, self.config.domain[1], oversample * self.config.n_b + 1)
        ub, _ = self.dg.evaluate(state.dg_u, state.dg_v, xb)
        err_b = np.max(np.abs(ub - exact_u(xb, state.t)))
        return max(err_a, err_b)

    def dof_counts(self):
        return {
            "hermite": (self.config.n_a + 1) * (2 * self.config.m + 3),
            "dg": self.dg.ne * (self.dg.nu + self.dg.nv),
        }


def _time_derivative(a, tau, k, dt):
    """k-th time derivative of sum_s a_s tau^s (tau scaled by dt)."""
    s_max = len(a) - 1
    out = 0.0
    for s in range(s_max, k - 1, -1):
        fac = math.factorial(s) / math.factorial(s - k)
        out = out * tau + a[s] * fac
    return out / dt**k
