"""Centered tensor-product polynomial arithmetic.

Polynomials are stored as full coefficient arrays of scaled Taylor
coefficients: a 1D polynomial with center ``c`` and scale ``h`` takes the
value ``sum(coeffs[k] * ((x - c)/h)**k)``.  In 2D the coefficient array is
indexed ``coeffs[k, l]`` for the power ``k`` in x and ``l`` in y.  The scale
keeps coefficient magnitudes uniform under grid refinement.

The module also provides quadrature nodes (Gauss, Gauss-Lobatto, Chebyshev),
two-point Hermite interpolation through confluent Newton tables, and
orthogonal (Legendre / Chebyshev) expansions with projections and basis
changes used by the overset transfer machinery.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import legendre as npleg


class ContractViolation(ValueError):
    """Raised when an operation is called outside its contract."""


# ---------------------------------------------------------------------------
# quadrature nodes
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def gll_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre-Lobatto nodes and weights on [-1, 1].

    Interior nodes are the roots of P'_{n-1}, found by Newton iteration from
    Chebyshev-Lobatto starting guesses, converged below 1e-14.
    """
    if n < 2:
        raise ContractViolation("GLL rule needs at least 2 nodes")
    if n == 2:
        return np.array([-1.0, 1.0]), np.array([1.0, 1.0])
    # starting guesses: Chebyshev-Lobatto points
    x = -np.cos(np.pi * np.arange(n) / (n - 1))
    pn = np.zeros(n)
    pn[-1] = 1.0  # coefficients of P_{n-1}
    dpn = npleg.legder(pn)
    d2pn = npleg.legder(dpn)
    xi = x[1:-1].copy()
    for _ in range(100):
        f = npleg.legval(xi, dpn)
        df = npleg.legval(xi, d2pn)
        dx = f / df
        xi -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    nodes = np.concatenate(([-1.0], xi, [1.0]))
    w = 2.0 / (n * (n - 1) * npleg.legval(nodes, pn) ** 2)
    return nodes, w


@functools.lru_cache(maxsize=None)
def gauss_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = npleg.leggauss(n)
    return x, w


@functools.lru_cache(maxsize=None)
def chebyshev_gauss_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev-Gauss nodes (ascending) and weights for the weighted inner product."""
    k = np.arange(n)
    x = -np.cos((2 * k + 1) * np.pi / (2 * n))
    w = np.full(n, np.pi / n)
    return x, w


# ---------------------------------------------------------------------------
# basis evaluation and basis-to-monomial transforms
# ---------------------------------------------------------------------------


def basis_vander(kind: str, x: np.ndarray, deg: int) -> np.ndarray:
    """Vandermonde matrix V[i, l] = B_l(x_i) for Legendre or Chebyshev."""
    if kind == "legendre":
        return npleg.legvander(x, deg)
    if kind == "chebyshev":
        return npcheb.chebvander(x, deg)
    raise ContractViolation(f"unknown basis {kind!r}")


def basis_vander_deriv(kind: str, x: np.ndarray, deg: int) -> np.ndarray:
    """Matrix of basis derivatives D[i, l] = B_l'(x_i)."""
    out = np.zeros((len(x), deg + 1))
    for l in range(deg + 1):
        e = np.zeros(l + 1)
        e[l] = 1.0
        if kind == "legendre":
            out[:, l] = npleg.legval(x, npleg.legder(e)) if l > 0 else 0.0
        elif kind == "chebyshev":
            out[:, l] = npcheb.chebval(x, npcheb.chebder(e)) if l > 0 else 0.0
        else:
            raise ContractViolation(f"unknown basis {kind!r}")
    return out


@functools.lru_cache(maxsize=None)
def basis_to_monomial_matrix(kind: str, deg: int) -> np.ndarray:
    """Triangular transform M with monomial coefficients of B_l in column l.

    Built from the three-term recurrences, which keeps the transform exact in
    the integer-representable range (degrees up to ~20).
    """
    m = np.zeros((deg + 1, deg + 1))
    m[0, 0] = 1.0
    if deg >= 1:
        m[1, 1] = 1.0
    for l in range(1, deg):
        shifted = np.roll(m[:, l], 1)
        shifted[0] = 0.0
        if kind == "legendre":
            m[:, l + 1] = ((2 * l + 1) * shifted - l * m[:, l - 1]) / (l + 1)
        elif kind == "chebyshev":
            m[:, l + 1] = 2 * shifted - m[:, l - 1]
        else:
            raise ContractViolation(f"unknown basis {kind!r}")
    return m


# ---------------------------------------------------------------------------
# tensor polynomials
# ---------------------------------------------------------------------------


def _as_tuple(v, ndim):
    if np.isscalar(v):
        return (float(v),) * ndim
    t = tuple(float(x) for x in v)
    if len(t) != ndim:
        raise ContractViolation(f"expected {ndim} entries, got {len(t)}")
    return t


@dataclass
class TensorPoly:
    """Centered, scaled tensor-product polynomial in 1 or 2 variables."""

    center: tuple
    scale: tuple
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        ndim = self.coeffs.ndim
        self.center = _as_tuple(self.center, ndim)
        self.scale = _as_tuple(self.scale, ndim)
        if any(s <= 0 for s in self.scale):
            raise ContractViolation("scale must be positive on every axis")

    @property
    def ndim(self) -> int:
        return self.coeffs.ndim

    @property
    def degrees(self) -> tuple:
        return tuple(n - 1 for n in self.coeffs.shape)

    def __call__(self, *coords):
        """Evaluate at points given as one array per axis (broadcastable)."""
        if len(coords) != self.ndim:
            raise ContractViolation("one coordinate array per axis required")
        zs = [
            (np.asarray(x, dtype=float) - c) / s
            for x, c, s in zip(coords, self.center, self.scale)
        ]
        if self.ndim == 1:
            return np.polynomial.polynomial.polyval(zs[0], self.coeffs)
        vals = np.polynomial.polynomial.polyval2d(zs[0], zs[1], self.coeffs)
        return vals

    def derivative(self, axis: int = 0) -> "TensorPoly":
        """d/dx along ``axis``; scaled rule d_k = (k+1) c_{k+1} / scale."""
        c = np.moveaxis(self.coeffs, axis, 0)
        n = c.shape[0]
        if n == 1:
            d = np.zeros_like(c)
        else:
            k = np.arange(1, n).reshape((-1,) + (1,) * (c.ndim - 1))
            d = c[1:] * k / self.scale[axis]
            d = np.concatenate([d, np.zeros_like(c[:1])], axis=0)
        return TensorPoly(self.center, self.scale, np.moveaxis(d, 0, axis))

    def multiply_truncate(self, other: "TensorPoly", target_degrees) -> "TensorPoly":
        """Exact product, coefficients kept up to ``target_degrees`` per axis."""
        if self.center != other.center or self.scale != other.scale:
            raise ContractViolation("operands must share center and scale")
        target = _degree_tuple(target_degrees, self.ndim)
        if self.ndim == 1:
            full = np.convolve(self.coeffs, other.coeffs)
        else:
            na, nb = self.coeffs.shape, other.coeffs.shape
            full = np.zeros((na[0] + nb[0] - 1, na[1] + nb[1] - 1))
            for i in range(na[0]):
                for j in range(na[1]):
                    if self.coeffs[i, j] != 0.0:
                        full[i : i + nb[0], j : j + nb[1]] += self.coeffs[i, j] * other.coeffs
        sl = tuple(slice(0, d + 1) for d in target)
        out = np.zeros(tuple(d + 1 for d in target))
        src = tuple(slice(0, min(full.shape[k], target[k] + 1)) for k in range(self.ndim))
        out[src] = full[src]
        return TensorPoly(self.center, self.scale, out[sl])

    def recentered(self, new_center=None, new_scale=None) -> "TensorPoly":
        """Same polynomial expressed about a new center and scale (Taylor shift)."""
        new_center = self.center if new_center is None else _as_tuple(new_center, self.ndim)
        new_scale = self.scale if new_scale is None else _as_tuple(new_scale, self.ndim)
        c = self.coeffs
        for ax in range(self.ndim):
            shift = (new_center[ax] - self.center[ax]) / self.scale[ax]
            ratio = new_scale[ax] / self.scale[ax]
            t = _shift_scale_matrix(c.shape[ax], shift, ratio)
            c = np.moveaxis(np.tensordot(t, np.moveaxis(c, ax, 0), axes=(1, 0)), 0, ax)
        return TensorPoly(new_center, new_scale, c)

    def truncated(self, per_axis_degree) -> "TensorPoly":
        """Drop monomial coefficients above ``per_axis_degree``; keep others unchanged."""
        target = _degree_tuple(per_axis_degree, self.ndim)
        for ax, d in enumerate(target):
            if d > self.degrees[ax]:
                raise ContractViolation("truncation degree exceeds polynomial degree")
        sl = tuple(slice(0, d + 1) for d in target)
        return TensorPoly(self.center, self.scale, self.coeffs[sl].copy())

    def truncated_total(self, total_degree: int) -> "TensorPoly":
        """Variant keeping only coefficients with total power <= total_degree."""
        d = min(total_degree, max(self.degrees))
        sl = tuple(slice(0, min(n, d + 1)) for n in self.coeffs.shape)
        c = self.coeffs[sl].copy()
        if self.ndim == 2:
            k = np.arange(c.shape[0])[:, None] + np.arange(c.shape[1])[None, :]
            c[k > total_degree] = 0.0
        return TensorPoly(self.center, self.scale, c)


def _degree_tuple(deg, ndim):
    if np.isscalar(deg):
        return (int(deg),) * ndim
    return tuple(int(d) for d in deg)


@functools.lru_cache(maxsize=None)
def _shift_scale_matrix(n: int, shift: float, ratio: float) -> np.ndarray:
    """Matrix mapping coefficients in z to coefficients in z' where z = shift + ratio z'."""
    t = np.zeros((n, n))
    # column j: expansion of (shift + ratio z')**j
    t[0, 0] = 1.0
    for j in range(1, n):
        t[: j + 1, j] = np.convolve(t[:j, j - 1], [shift, ratio])[: j + 1]
    return t


def reference_l2_norm2(p: TensorPoly, half_width: float = 1.0) -> float:
    """Squared L2 norm of ``p`` over the box |x - center| <= half_width * scale."""
    nq = max(p.coeffs.shape) + 1
    x, w = gauss_nodes(nq)
    if p.ndim == 1:
        pts = p.center[0] + half_width * p.scale[0] * x
        vals = p(pts)
        return float(np.sum(w * vals**2) * half_width * p.scale[0])
    gx = p.center[0] + half_width * p.scale[0] * x
    gy = p.center[1] + half_width * p.scale[1] * x
    vals = p(gx[:, None], gy[None, :])
    ww = w[:, None] * w[None, :]
    return float(np.sum(ww * vals**2) * half_width**2 * p.scale[0] * p.scale[1])


# ---------------------------------------------------------------------------
# two-point Hermite interpolation (confluent Newton tables)
# ---------------------------------------------------------------------------


def _newton_confluent(z0, data0, z1, data1) -> np.ndarray:
    """Monomial coefficients of the two-point Hermite interpolant.

    ``data0[l]`` is the l-th derivative at ``z0`` (same for ``data1``); the
    table is the generalized divided-difference construction for repeated
    nodes, expanded to monomial form by synthetic multiplication.
    """
    k0, k1 = len(data0), len(data1)
    pts = np.array([z0] * k0 + [z1] * k1)
    n = k0 + k1
    # divided-difference table; diag[j] holds f[pts_i..pts_{i+j}]
    table = np.zeros((n, n))
    vals = np.array([data0[0]] * k0 + [data1[0]] * k1, dtype=float)
    table[:, 0] = vals
    for j in range(1, n):
        for i in range(n - j):
            if pts[i] == pts[i + j]:
                d = data0 if i < k0 else data1
                table[i, j] = d[j] / math.factorial(j)
            else:
                table[i, j] = (table[i + 1, j - 1] - table[i, j - 1]) / (pts[i + j] - pts[i])
    # Newton form -> monomial by Horner expansion
    coeffs = np.zeros(n)
    coeffs[0] = table[0, n - 1]
    for k in range(n - 2, -1, -1):
        shifted = np.zeros(n)
        shifted[1:] = coeffs[:-1]
        coeffs = shifted - pts[k] * coeffs
        coeffs[0] += table[0, k]
    return coeffs


@functools.lru_cache(maxsize=None)
def hermite_matrices(n_dofs: int) -> tuple[np.ndarray, np.ndarray]:
    """Interpolation matrices for scaled DOFs on a unit-spaced staggered pair.

    Maps the scaled Taylor DOFs (h^l/l! times the l-th derivative) held at the
    endpoints z = -1/2 and z = +1/2 to the 2*n_dofs coefficients of the cell
    interpolant centered at z = 0 with the same scale.  Grid-size independent.
    """
    n = 2 * n_dofs
    bl = np.zeros((n, n_dofs))
    br = np.zeros((n, n_dofs))
    for l in range(n_dofs):
        data = np.zeros(n_dofs)
        data[l] = math.factorial(l)  # scaled dof u_l contributes l! to d^l/dz^l
        bl[:, l] = _newton_confluent(-0.5, data, 0.5, np.zeros(n_dofs))
        br[:, l] = _newton_confluent(-0.5, np.zeros(n_dofs), 0.5, data)
    return bl, br


def hermite_interpolate(left_dofs, right_dofs, x_left: float, x_right: float) -> TensorPoly:
    """Two-point Hermite interpolant from raw derivative values at the endpoints.

    ``left_dofs[l]`` is the l-th derivative of the target at ``x_left`` (same
    for the right endpoint); both ends must supply the same number of
    derivatives.  Returns a polynomial of degree ``2*len(left_dofs) - 1``
    centered at the midpoint with scale ``x_right - x_left``.
    """
    left_dofs = np.asarray(left_dofs, dtype=float)
    right_dofs = np.asarray(right_dofs, dtype=float)
    if left_dofs.shape != right_dofs.shape or left_dofs.ndim != 1:
        raise ContractViolation("endpoint DOF counts must match")
    if x_right == x_left:
        raise ContractViolation("nodes must be distinct")
    h = x_right - x_left
    k = np.arange(len(left_dofs))
    scaled_l = left_dofs * h**k / np.array([math.factorial(i) for i in k])
    scaled_r = right_dofs * h**k / np.array([math.factorial(i) for i in k])
    bl, br = hermite_matrices(len(left_dofs))
    coeffs = bl @ scaled_l + br @ scaled_r
    return TensorPoly((0.5 * (x_left + x_right),), (h,), coeffs)


def hermite_interpolate_2d(corner_dofs, x_cell, y_cell) -> TensorPoly:
    """Tensor-product Hermite interpolant from four corner DOF blocks.

    ``corner_dofs[(i, j)]`` for i, j in {0, 1} holds the scaled DOF block of
    the corner at (x_cell[i], y_cell[j]); blocks are (n, n) arrays scaled by
    the cell widths.  Applied dimension by dimension.
    """
    hx = x_cell[1] - x_cell[0]
    hy = y_cell[1] - y_cell[0]
    n = corner_dofs[(0, 0)].shape[0]
    bl, br = hermite_matrices(n)
    top = {}
    for j in (0, 1):
        top[j] = bl @ corner_dofs[(0, j)] + br @ corner_dofs[(1, j)]
    coeffs = top[0] @ bl.T + top[1] @ br.T
    return TensorPoly(
        (0.5 * (x_cell[0] + x_cell[1]), 0.5 * (y_cell[0] + y_cell[1])), (hx, hy), coeffs
    )


# ---------------------------------------------------------------------------
# orthogonal expansions and projections
# ---------------------------------------------------------------------------


@dataclass
class OrthogonalExpansion:
    """Legendre or Chebyshev tensor expansion on the reference box [-1, 1]^d."""

    basis: str
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.basis not in ("legendre", "chebyshev"):
            raise ContractViolation(f"unknown basis {self.basis!r}")

    @property
    def ndim(self) -> int:
        return self.coeffs.ndim

    @property
    def degrees(self) -> tuple:
        return tuple(n - 1 for n in self.coeffs.shape)

    def __call__(self, *coords):
        """Evaluate at reference coordinates, one array per axis."""
        val = npleg.legval if self.basis == "legendre" else npcheb.chebval
        if self.ndim == 1:
            return val(np.asarray(coords[0], dtype=float), self.coeffs)
        fn = npleg.legval2d if self.basis == "legendre" else npcheb.chebval2d
        return fn(np.asarray(coords[0], dtype=float), np.asarray(coords[1], dtype=float), self.coeffs)

    def truncated(self, per_axis_degree) -> "OrthogonalExpansion":
        """Drop modes above ``per_axis_degree``; an orthogonal projection, so the
        reference-domain L2 norm never increases."""
        target = _degree_tuple(per_axis_degree, self.ndim)
        sl = tuple(slice(0, d + 1) for d in target)
        return OrthogonalExpansion(self.basis, self.coeffs[sl].copy())

    def to_tensor_poly(self, center, scale) -> TensorPoly:
        """Monomial form on the physical box where the reference coordinate is
        (x - center) / scale."""
        ndim = self.ndim
        c = self.coeffs
        for ax in range(ndim):
            m = basis_to_monomial_matrix(self.basis, c.shape[ax] - 1)
            c = np.moveaxis(np.tensordot(m, np.moveaxis(c, ax, 0), axes=(1, 0)), 0, ax)
        return TensorPoly(_as_tuple(center, ndim), _as_tuple(scale, ndim), c)


def convert_basis(coeffs, from_kind: str, to_kind: str) -> np.ndarray:
    """Re-express tensor coefficients in another orthogonal basis (exact
    triangular transforms through the monomial form)."""
    if from_kind == to_kind:
        return np.asarray(coeffs, dtype=float).copy()
    c = np.asarray(coeffs, dtype=float)
    for ax in range(c.ndim):
        deg = c.shape[ax] - 1
        t = np.linalg.solve(
            basis_to_monomial_matrix(to_kind, deg),
            basis_to_monomial_matrix(from_kind, deg),
        )
        c = np.moveaxis(np.tensordot(t, np.moveaxis(c, ax, 0), axes=(1, 0)), 0, ax)
    return c


def _discrete_projection(values, kind, degrees):
    values = np.asarray(values, dtype=float)
    ndim = values.ndim
    if degrees is None:
        degrees = tuple(n - 1 for n in values.shape)
    degrees = _degree_tuple(degrees, ndim)
    for ax in range(ndim):
        n = values.shape[ax]
        if n < degrees[ax] + 1:
            raise ContractViolation(
                f"axis {ax}: {n} nodes cannot determine degree {degrees[ax]}"
            )
        if kind == "legendre":
            x, w = gll_nodes(n)
        else:
            x, w = chebyshev_gauss_nodes(n)
        v = basis_vander(kind, x, degrees[ax])
        # discrete norms from the same rule keep the Gram diagonal and make the
        # projection exact on polynomials the rule can represent
        norms = (v * v * w[:, None]).sum(axis=0)
        proj = (v * w[:, None]).T / norms[:, None]
        values = np.moveaxis(
            np.tensordot(proj, np.moveaxis(values, ax, 0), axes=(1, 0)), 0, ax
        )
    return OrthogonalExpansion(kind, values)


def legendre_project(values, degrees=None) -> OrthogonalExpansion:
    """L2 projection from samples at tensor GLL nodes onto Legendre modes.

    The node count per axis is taken from the shape of ``values``; it must be
    at least ``degrees + 1``.  Exact when the samples come from a polynomial
    of degree at most ``degrees``.
    """
    return _discrete_projection(values, "legendre", degrees)


def chebyshev_project(values, degrees=None) -> OrthogonalExpansion:
    """Weighted-L2 projection from samples at tensor Chebyshev-Gauss nodes."""
    return _discrete_projection(values, "chebyshev", degrees)


# ---------------------------------------------------------------------------
# space-time polynomials
# ---------------------------------------------------------------------------


@dataclass
class SpaceTimePoly:
    """Space-time Taylor polynomial: coeffs[s, ...] are spatial slices per time power.

    The time variable is scaled by ``dt``: the value at (x, t) is
    ``sum_s slice_s(x) * ((t - t_center)/dt)**s``.
    """

    center: tuple
    scale: tuple
    t_center: float
    dt: float
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        ndim = self.coeffs.ndim - 1
        self.center = _as_tuple(self.center, ndim)
        self.scale = _as_tuple(self.scale, ndim)

    @property
    def space_ndim(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def time_degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def time_slice(self, s: int) -> TensorPoly:
        return TensorPoly(self.center, self.scale, self.coeffs[s].copy())

    def spatial_values(self, *coords) -> np.ndarray:
        """Evaluate every time slice at the given spatial points.

        Returns an array of shape (time_degree + 1,) + points_shape.
        """
        return np.stack([self.time_slice(s)(*coords) for s in range(self.coeffs.shape[0])])

    def __call__(self, *coords_t):
        *coords, t = coords_t
        a = self.spatial_values(*coords)
        tau = (np.asarray(t, dtype=float) - self.t_center) / self.dt
        out = np.zeros_like(a[0])
        for s in range(a.shape[0] - 1, -1, -1):
            out = out * tau + a[s]
        return out

    def time_derivative_at(self, coords, t, order: int):
        """Value of the ``order``-th time derivative at spatial points and time t."""
        a = self.spatial_values(*coords)
        tau = (float(t) - self.t_center) / self.dt
        s_max = a.shape[0] - 1
        out = np.zeros_like(a[0])
        for s in range(s_max, order - 1, -1):
            fac = math.factorial(s) / math.factorial(s - order)
            out = out * tau + a[s] * fac
        return out / self.dt**order
