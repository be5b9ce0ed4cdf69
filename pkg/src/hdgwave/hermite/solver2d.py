"""Dissipative Hermite solver for the 2D wave equation on staggered grids.

Tensor-product generalization of the 1D solver: nodes carry (m+2)^2 and
(m+1)^2 scaled Taylor DOFs for displacement and velocity, cells build tensor
two-point interpolants, and the time recursion uses the optimal start-up pair
of auxiliary interpolants (full degree in one direction, velocity degree in
the other) so the timestep bound stays order independent.

Hole cutting enters through node status masks: 0 inactive, 1 evolved,
2 transfer-fed.  The kernels compute everywhere on the rectangle and the
masks decide which results survive; transfer-fed nodes are overwritten by the
overset system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hdgwave.hermite import boundary as bnd
from hdgwave.hermite.core import check_cfl, interpolation_matrices
from hdgwave.model import BoundaryCondition, WaveModel
from hdgwave.poly import gll_nodes, legendre_project


@dataclass
class HermiteState2D:
    u: np.ndarray  # (nnx, nny, m+2, m+2)
    v: np.ndarray  # (nnx, nny, m+1, m+1)
    parity: str
    t: float

    def copy(self):
        return HermiteState2D(self.u.copy(), self.v.copy(), self.parity, self.t)


@dataclass
class CellExpansions2D:
    """Space-time stacks for a subset of cells (flattened cell index list)."""

    centers: np.ndarray  # (nc, 2)
    h: float
    t0: float
    dt: float
    U: np.ndarray  # (S+1, nc, LU, LU); slices s >= 1 live in the [:LV, :LV] block
    V: np.ndarray  # (S+1, nc, LV, LV)

    def slice_values(self, i, x, y, field="u"):
        stack = self.U if field == "u" else self.V
        cx, cy = self.centers[i]
        zx = (float(x) - cx) / self.h
        zy = (float(y) - cy) / self.h
        c = stack[:, i]
        vx = zx ** np.arange(c.shape[1])
        vy = zy ** np.arange(c.shape[2])
        return np.einsum("skl,k,l->s", c, vx, vy)


class MaskedRegion:
    """Node status arrays for both parities of one rectangular grid."""

    def __init__(self, primal_status, dual_status):
        self.primal = np.asarray(primal_status, dtype=np.int8)
        self.dual = np.asarray(dual_status, dtype=np.int8)

    @classmethod
    def all_active(cls, nx, ny):
        return cls(np.ones((nx + 1, ny + 1), np.int8), np.ones((nx, ny), np.int8))


class HermiteSolver2D:
    """Square-celled staggered solver; bc maps each side ('left', 'right',
    'bottom', 'top') to a homogeneous BoundaryCondition mirror, 'transfer',
    or None (side inactive or hole-cut)."""

    def __init__(self, origin, h, n_cells, m, dt, model: WaveModel, bc=None,
                 masks: MaskedRegion | None = None, cfl_max=0.75):
        self.origin = (float(origin[0]), float(origin[1]))
        self.h = float(h)
        self.nx, self.ny = int(n_cells[0]), int(n_cells[1])
        self.m = int(m)
        self.dt = float(dt)
        self.model = model
        if not model.constant_speed:
            raise NotImplementedError("the 2D solver supports constant speed only")
        if model.forcing is not None or model.forcing_poly is not None:
            raise NotImplementedError("the 2D solver supports zero forcing only")
        check_cfl(model.c, dt, h, cfl_max)
        self.bc = {"left": None, "right": None, "bottom": None, "top": None}
        if bc:
            self.bc.update(bc)
        for spec in self.bc.values():
            if isinstance(spec, BoundaryCondition) and not spec.homogeneous:
                raise NotImplementedError(
                    "flat Cartesian boundaries support homogeneous mirrors only"
                )
        self.masks = masks or MaskedRegion.all_active(self.nx, self.ny)
        self.blu, self.bru, self.blv, self.brv = interpolation_matrices(m)
        self.lu = 2 * m + 4
        self.lv = 2 * m + 2
        self.s_max = 4 * m + 4

    # -- geometry ------------------------------------------------------------

    def axis_nodes(self, parity, axis):
        n = self.nx if axis == 0 else self.ny
        base = self.origin[axis]
        if parity == "primal":
            return base + self.h * np.arange(n + 1)
        return base + self.h * (np.arange(n) + 0.5)

    def cell_centers(self, parity):
        """Flattened (nc, 2) centers of the target cells of a half step from
        the given parity."""
        if parity == "primal":
            xs = self.axis_nodes("dual", 0)
            ys = self.axis_nodes("dual", 1)
        else:
            xs = self.axis_nodes("primal", 0)
            ys = self.axis_nodes("primal", 1)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.stack([gx.ravel(), gy.ravel()], axis=1)

    # -- initialization ------------------------------------------------------

    def initialize(self, g0, g1, method="project") -> HermiteState2D:
        """Initial primal state; 'project' samples plain callables f(x, y) on
        per-node cells, 'derivatives' expects f(x, y, kx, ky)."""
        nnx, nny = self.nx + 1, self.ny + 1
        nu, nv = self.m + 2, self.m + 1
        u = np.zeros((nnx, nny, nu, nu))
        v = np.zeros((nnx, nny, nv, nv))
        xs = self.axis_nodes("primal", 0)
        ys = self.axis_nodes("primal", 1)
        active = self.masks.primal > 0
        if method == "derivatives":
            for kx in range(nu):
                for ky in range(nu):
                    scale = self.h ** (kx + ky) / (math.factorial(kx) * math.factorial(ky))
                    vals = g0(xs[:, None], ys[None, :], kx, ky) * scale
                    u[:, :, kx, ky] = np.where(active, vals, 0.0)
                    if kx < nv and ky < nv:
                        vv = g1(xs[:, None], ys[None, :], kx, ky) * scale
                        v[:, :, kx, ky] = np.where(active, vv, 0.0)
            return HermiteState2D(u, v, "primal", 0.0)
        if method != "project":
            raise ValueError(f"unknown init method {method!r}")
        deg = 2 * self.m + 3
        zq, _ = gll_nodes(deg + 1)
        half = (self.h / 2, self.h / 2)
        fullscale = (self.h, self.h)
        n_q = deg + 1
        for i, j in zip(*np.nonzero(active)):
            px = xs[i] + 0.5 * self.h * zq
            py = ys[j] + 0.5 * self.h * zq
            vals0 = np.broadcast_to(np.asarray(g0(px[:, None], py[None, :]), float),
                                    (n_q, n_q))
            vals1 = np.broadcast_to(np.asarray(g1(px[:, None], py[None, :]), float),
                                    (n_q, n_q))
            eu = legendre_project(vals0, deg)
            ev = legendre_project(vals1, 2 * self.m + 1)
            center = (xs[i], ys[j])
            pu = eu.to_tensor_poly(center, half).recentered(center, fullscale)
            pv = ev.to_tensor_poly(center, half).recentered(center, fullscale)
            u[i, j] = pu.coeffs[:nu, :nu]
            v[i, j] = pv.coeffs[:nv, :nv]
        return HermiteState2D(u, v, "primal", 0.0)

    # -- interpolation ---------------------------------------------------------

    def _tensor_interpolants(self, u, v):
        """Full, auxiliary and velocity interpolants for every cell of the
        (possibly ghost-extended) corner arrays."""
        m = self.m
        blu, bru, blv, brv = self.blu, self.bru, self.blv, self.brv
        tx_full = np.einsum("al,ijlk->ijak", blu, u[:-1]) + np.einsum(
            "al,ijlk->ijak", bru, u[1:]
        )
        ty_vx = np.einsum("al,ijlk->ijak", blv, u[:-1, :, : m + 1, :]) + np.einsum(
            "al,ijlk->ijak", brv, u[1:, :, : m + 1, :]
        )
        tv = np.einsum("al,ijlk->ijak", blv, v[:-1]) + np.einsum(
            "al,ijlk->ijak", brv, v[1:]
        )
        full = np.einsum("bk,ijak->ijab", blu, tx_full[:, :-1]) + np.einsum(
            "bk,ijak->ijab", bru, tx_full[:, 1:]
        )
        aux_x = np.einsum("bk,ijak->ijab", blv, tx_full[:, :-1, :, : m + 1]) + np.einsum(
            "bk,ijak->ijab", brv, tx_full[:, 1:, :, : m + 1]
        )
        aux_y = np.einsum("bk,ijak->ijab", blu, ty_vx[:, :-1]) + np.einsum(
            "bk,ijak->ijab", bru, ty_vx[:, 1:]
        )
        v_int = np.einsum("bk,ijak->ijab", blv, tv[:, :-1]) + np.einsum(
            "bk,ijak->ijab", brv, tv[:, 1:]
        )
        return full, aux_x, aux_y, v_int

    # -- time recursion --------------------------------------------------------

    def _expand(self, full, aux_x, aux_y, v_int, keep=None):
        """Space-time recursion with optimal start-up; returns the half-step
        DOF sums and optionally the expansion stacks for kept cells."""
        m = self.m
        lu, lv = self.lu, self.lv
        c2 = self.model.c2
        dt, h = self.dt, self.h
        ncx, ncy = full.shape[0], full.shape[1]
        kfac = (np.arange(lv) + 1) * (np.arange(lv) + 2) / h**2

        u_sum = full[:, :, : m + 2, : m + 2].copy()
        v_sum = v_int[:, :, : m + 1, : m + 1].copy()
        keep_u = keep_v = None
        if keep is not None:
            flat = lambda a: a.reshape(ncx * ncy, *a.shape[2:])[keep]
            keep_u = np.zeros((self.s_max + 1, len(keep), lu, lu))
            keep_v = np.zeros((self.s_max + 1, len(keep), lv, lv))
            keep_u[0] = flat(full)
            keep_v[0] = flat(v_int)

        u_prev = None
        v_prev = v_int
        half = 1.0
        for s in range(1, self.s_max + 1):
            half *= 0.5
            u_s = (dt / s) * v_prev
            v_s = np.zeros_like(v_prev)
            if s == 1:
                v_s += c2 * dt * kfac[None, None, :, None] * aux_x[:, :, 2:, :]
                v_s += c2 * dt * kfac[None, None, None, :] * aux_y[:, :, :, 2:]
            else:
                v_s[:, :, : lv - 2, :] += (
                    (c2 * dt / s) * kfac[None, None, : lv - 2, None] * u_prev[:, :, 2:, :]
                )
                v_s[:, :, :, : lv - 2] += (
                    (c2 * dt / s) * kfac[None, None, None, : lv - 2] * u_prev[:, :, :, 2:]
                )
            u_sum += half * u_s[:, :, : m + 2, : m + 2]
            v_sum += half * v_s[:, :, : m + 1, : m + 1]
            if keep is not None:
                keep_u[s, :, :lv, :lv] = flat(u_s)
                keep_v[s] = flat(v_s)
            u_prev, v_prev = u_s, v_s
        return u_sum, v_sum, keep_u, keep_v

    # -- ghosts and stepping -----------------------------------------------------

    def _mirror_pad(self, u, v):
        """Extend dual arrays by mirror or zero ghosts on all four sides."""
        nu, nv = self.m + 2, self.m + 1

        def pad(arr, n_dofs):
            def ghost(spec, block, axis_dof):
                if isinstance(spec, BoundaryCondition):
                    signs = bnd.mirror_signs(n_dofs, spec.kind)
                    shape = [1] * arr_pad.ndim
                    shape[axis_dof] = n_dofs
                    return block * signs.reshape(shape)
                return np.zeros_like(block)

            arr_pad = arr
            arr_pad = np.concatenate(
                [ghost(self.bc["left"], arr_pad[:1], 2), arr_pad,
                 ghost(self.bc["right"], arr_pad[-1:], 2)], axis=0)
            arr_pad = np.concatenate(
                [ghost(self.bc["bottom"], arr_pad[:, :1], 3), arr_pad,
                 ghost(self.bc["top"], arr_pad[:, -1:], 3)], axis=1)
            return arr_pad

        return pad(u, nu), pad(v, nv)

    def half_step(self, state: HermiteState2D, keep_cells=None):
        """Advance dt/2 to the opposite parity.

        ``keep_cells`` (flattened indices into this half's cell grid) selects
        cells whose space-time expansions are returned for transfer use.
        """
        if state.parity == "primal":
            full, ax, ay, vi = self._tensor_interpolants(state.u, state.v)
            status = self.masks.dual
        else:
            ue, ve = self._mirror_pad(state.u, state.v)
            full, ax, ay, vi = self._tensor_interpolants(ue, ve)
            status = self.masks.primal
        u_sum, v_sum, ku, kv = self._expand(full, ax, ay, vi, keep=keep_cells)
        live = status == 1
        u_new = np.where(live[:, :, None, None], u_sum, 0.0)
        v_new = np.where(live[:, :, None, None], v_sum, 0.0)
        parity = "dual" if state.parity == "primal" else "primal"
        new_state = HermiteState2D(u_new, v_new, parity, state.t + self.dt / 2)
        exp = None
        if keep_cells is not None:
            centers = self.cell_centers(state.parity)[keep_cells]
            exp = CellExpansions2D(centers, self.h, state.t, self.dt, ku, kv)
        return new_state, exp

    # -- evaluation ----------------------------------------------------------------

    def interpolant_coeffs(self, state: HermiteState2D):
        """Displacement and velocity interpolant arrays on this parity's cells."""
        if state.parity == "primal":
            full, _, _, vi = self._tensor_interpolants(state.u, state.v)
        else:
            ue, ve = self._mirror_pad(state.u, state.v)
            full, _, _, vi = self._tensor_interpolants(ue, ve)
        return full, vi

    def cell_status_for(self, parity):
        """Status of the target cells a half step from ``parity`` produces."""
        return self.masks.dual if parity == "primal" else self.masks.primal

    def evaluate_grid(self, state: HermiteState2D, pts_per_cell=10):
        """Tensor evaluation on pts_per_cell^2 points per cell.

        Returns (x, y, u, v, valid) with the leading two axes flattened to
        (ncx*p, ncy*p); ``valid`` marks points in cells whose corners all hold
        data.
        """
        full, vi = self.interpolant_coeffs(state)
        ncx, ncy = full.shape[0], full.shape[1]
        p = pts_per_cell
        z = (np.arange(p) + 0.5) / p - 0.5
        vx_u = np.vander(z, full.shape[2], increasing=True)
        vx_v = np.vander(z, vi.shape[2], increasing=True)
        uvals = np.einsum("ijab,pa,qb->ipjq", full, vx_u, vx_u)
        vvals = np.einsum("ijab,pa,qb->ipjq", vi, vx_v, vx_v)
        valid_cells = self._full_data_cells(state.parity)
        valid = np.broadcast_to(valid_cells[:, None, :, None], uvals.shape).copy()
        centers = self.cell_centers(state.parity)
        cx = centers[:, 0].reshape(ncx, ncy)
        cy = centers[:, 1].reshape(ncx, ncy)
        x = np.broadcast_to(cx[:, None, :, None], uvals.shape) + self.h * z[None, :, None, None]
        y = np.broadcast_to(cy[:, None, :, None], uvals.shape) + self.h * z[None, None, None, :]
        shape = (ncx * p, ncy * p)
        return (x.reshape(shape), y.reshape(shape), uvals.reshape(shape),
                vvals.reshape(shape), valid.reshape(shape))

    def _full_data_cells(self, parity):
        """Cells whose four corners hold data (used to mask evaluation)."""
        corner = self.masks.primal if parity == "primal" else self.masks.dual
        has = corner > 0
        if parity == "primal":
            return has[:-1, :-1] & has[1:, :-1] & has[:-1, 1:] & has[1:, 1:]
        padded = np.zeros((has.shape[0] + 2, has.shape[1] + 2), bool)
        padded[1:-1, 1:-1] = has
        for side, axis in (("left", 0), ("right", 0), ("bottom", 1), ("top", 1)):
            if isinstance(self.bc[side], BoundaryCondition):
                if side in ("left", "bottom"):
                    sl = [slice(None)] * 2
                    sl[axis] = 0
                    src = [slice(None)] * 2
                    src[axis] = 1
                    padded[tuple(sl)] = padded[tuple(src)]
                else:
                    sl = [slice(None)] * 2
                    sl[axis] = -1
                    src = [slice(None)] * 2
                    src[axis] = -2
                    padded[tuple(sl)] = padded[tuple(src)]
        return padded[:-1, :-1] & padded[1:, :-1] & padded[:-1, 1:] & padded[1:, 1:]

    def evaluate_points(self, state: HermiteState2D, xs, ys):
        """Pointwise (u, v); each point must lie in a cell with full data."""
        full, vi = self.interpolant_coeffs(state)
        ncx, ncy = full.shape[0], full.shape[1]
        centers = self.cell_centers(state.parity)
        cx0 = centers[0, 0]
        cy0 = centers[0, 1]
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        out_u = np.empty(len(xs))
        out_v = np.empty(len(xs))
        for n, (x, y) in enumerate(zip(xs, ys)):
            i = int(np.clip(np.rint((x - cx0) / self.h), 0, ncx - 1))
            j = int(np.clip(np.rint((y - cy0) / self.h), 0, ncy - 1))
            zx = (x - (cx0 + i * self.h)) / self.h
            zy = (y - (cy0 + j * self.h)) / self.h
            vx = zx ** np.arange(full.shape[2])
            vy = zy ** np.arange(full.shape[3])
            out_u[n] = np.einsum("ab,a,b->", full[i, j], vx, vy)
            vxv = zx ** np.arange(vi.shape[2])
            vyv = zy ** np.arange(vi.shape[3])
            out_v[n] = np.einsum("ab,a,b->", vi[i, j], vxv, vyv)
        return out_u, out_v
