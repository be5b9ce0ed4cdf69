"""Tests for the tensor polynomial toolbox.

Derived expectations are computed by independent oracles inside the tests:
dense confluent Vandermonde solves, full convolutions, finite differences,
pointwise evaluation, and quadrature.
"""

import math

import numpy as np
import pytest

from hdgwave.poly import (
    ContractViolation,
    OrthogonalExpansion,
    TensorPoly,
    basis_to_monomial_matrix,
    chebyshev_gauss_nodes,
    chebyshev_project,
    gll_nodes,
    hermite_interpolate,
    hermite_interpolate_2d,
    hermite_matrices,
    legendre_project,
    reference_l2_norm2,
)

rng = np.random.default_rng(20240817)


# ---------------------------------------------------------------------------
# quadrature nodes
# ---------------------------------------------------------------------------


def test_gll_nodes_integrate_polynomials_exactly():
    for n in range(2, 12):
        x, w = gll_nodes(n)
        assert x[0] == -1.0 and x[-1] == 1.0
        # exact for degree 2n - 3
        for deg in range(0, 2 * n - 2):
            exact = 2.0 / (deg + 1) if deg % 2 == 0 else 0.0
            assert abs(np.sum(w * x**deg) - exact) < 1e-13


def test_gll_nodes_match_loworder_closed_forms():
    x3, w3 = gll_nodes(3)
    assert np.allclose(x3, [-1, 0, 1])
    assert np.allclose(w3, [1 / 3, 4 / 3, 1 / 3])
    x4, _ = gll_nodes(4)
    assert np.allclose(np.abs(x4[1]), np.sqrt(1 / 5), atol=1e-14)


def test_chebyshev_gauss_nodes_orthogonality():
    n = 8
    x, w = chebyshev_gauss_nodes(n)
    v = np.cos(np.outer(np.arccos(x), np.arange(n)))
    gram = (v * w[:, None]).T @ v
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) < 1e-13


# ---------------------------------------------------------------------------
# hermite interpolation
# ---------------------------------------------------------------------------


def test_hermite_interpolate_constant():
    m = 1
    dofs = np.zeros(m + 2)
    dofs[0] = 1.0
    p = hermite_interpolate(dofs, dofs, 0.0, 1.0)
    assert np.allclose(p.coeffs, [1, 0, 0, 0, 0, 0])


def test_hermite_interpolate_linear():
    # data sampled from f(x) = x on [0, 1], m = 1
    left = np.array([0.0, 1.0, 0.0])
    right = np.array([1.0, 1.0, 0.0])
    p = hermite_interpolate(left, right, 0.0, 1.0)
    assert np.allclose(p.coeffs, [0.5, 1.0, 0, 0, 0, 0], atol=1e-14)
    assert p.center == (0.5,) and p.scale == (1.0,)


def test_hermite_interpolate_matches_dense_vandermonde_solve():
    # m = 1 endpoint data from f(x) = x^5 on [0, 1]; oracle solves the 6x6
    # confluent Vandermonde system directly
    f = [lambda x: x**5, lambda x: 5 * x**4, lambda x: 20 * x**3]
    left = np.array([g(0.0) for g in f])
    right = np.array([g(1.0) for g in f])
    p = hermite_interpolate(left, right, 0.0, 1.0)

    # oracle: monomial coefficients a_j of p(z) = sum a_j z^j, z = x - 1/2,
    # from derivative-matching rows at z = -1/2 and +1/2
    n = 6
    rows, rhs = [], []
    for z, data in ((-0.5, left), (0.5, right)):
        for l, val in enumerate(data):
            row = np.zeros(n)
            for j in range(l, n):
                row[j] = math.factorial(j) / math.factorial(j - l) * z ** (j - l)
            rows.append(row)
            rhs.append(val)
    oracle = np.linalg.solve(np.array(rows), np.array(rhs))
    assert np.max(np.abs(p.coeffs - oracle)) < 1e-12


def test_hermite_interpolate_reproduces_high_degree():
    # reproduction of any polynomial of degree <= 2m + 3, unit-scaled data
    for m in (1, 2, 3):
        deg = 2 * m + 3
        coeffs = rng.uniform(-1, 1, deg + 1)
        mono = np.polynomial.polynomial.Polynomial(coeffs)
        derivs = [mono.deriv(k) if k else mono for k in range(m + 2)]
        left = np.array([d(-0.5) for d in derivs])
        right = np.array([d(0.5) for d in derivs])
        p = hermite_interpolate(left, right, -0.5, 0.5)
        assert np.max(np.abs(p.coeffs - coeffs)) < 1e-12


def test_hermite_interpolate_rejects_mismatched_dofs():
    with pytest.raises(ContractViolation):
        hermite_interpolate([1.0, 0.0], [1.0], 0.0, 1.0)


def test_hermite_matrices_match_derivative_conditions():
    for n in (2, 3, 4, 5):
        bl, br = hermite_matrices(n)
        z = np.array([-0.5, 0.5])
        for l in range(n):
            dofs = np.zeros(n)
            dofs[l] = 1.0
            coeffs = bl @ dofs
            poly = np.polynomial.polynomial.Polynomial(coeffs)
            for k in range(n):
                want_left = math.factorial(l) if k == l else 0.0
                assert abs(poly.deriv(k)(z[0]) - want_left) < 1e-11 * max(
                    1, math.factorial(l)
                )
                assert abs(poly.deriv(k)(z[1])) < 1e-11 * max(1, math.factorial(l))


def test_hermite_interpolate_2d_reproduces_tensor_polynomial():
    m = 1
    n = m + 2
    c = rng.uniform(-1, 1, (2 * n, 2 * n))
    hx, hy = 0.2, 0.25
    x_cell = (0.3, 0.3 + hx)
    y_cell = (-0.1, -0.1 + hy)
    exact = TensorPoly(
        (0.5 * sum(x_cell), 0.5 * sum(y_cell)), (hx, hy), c
    )
    corners = {}
    for i in (0, 1):
        for j in (0, 1):
            # scaled DOF block at the corner from recentering the exact polynomial
            q = exact.recentered((x_cell[i], y_cell[j]), (hx, hy))
            corners[(i, j)] = q.coeffs[:n, :n]
    p = hermite_interpolate_2d(corners, x_cell, y_cell)
    assert np.max(np.abs(p.coeffs - c)) < 1e-11


# ---------------------------------------------------------------------------
# differentiation / multiplication / recentering / truncation
# ---------------------------------------------------------------------------


def test_derivative_of_constant_is_zero():
    p = TensorPoly((0.0,), (1.0,), [3.0])
    assert np.allclose(p.derivative(0).coeffs, [0.0])


def test_derivative_chain_rule_on_scaling():
    h = 0.3
    p = TensorPoly((0.0,), (h,), [0.0, 1.0])
    d = p.derivative(0)
    assert np.allclose(d.coeffs, [1.0 / h, 0.0])


def test_second_derivative_matches_finite_differences():
    p = TensorPoly((0.7,), (0.5,), [0.0, 0.0, 1.0])  # ((x - .7)/.5)^2
    d2 = p.derivative(0).derivative(0)
    eps = 1e-4
    for x in np.linspace(-1.0, 2.0, 5):
        fd = (p(x + eps) - 2 * p(x) + p(x - eps)) / eps**2
        assert abs(d2(x) - fd) < 1e-6
    assert abs(d2(0.123) - 2.0 / 0.25) < 1e-12


def test_multiply_by_one_is_identity():
    a = TensorPoly((0.0,), (1.0,), rng.uniform(-1, 1, 5))
    one = TensorPoly((0.0,), (1.0,), [1.0])
    prod = a.multiply_truncate(one, 4)
    assert np.allclose(prod.coeffs, a.coeffs)


def test_multiply_truncate_hand_expansion():
    a = TensorPoly((0.0,), (1.0,), [1.0, 1.0])
    prod = a.multiply_truncate(a, 1)
    assert np.allclose(prod.coeffs, [1.0, 2.0])


def test_multiply_truncate_matches_full_convolution():
    ca = rng.uniform(-1, 1, 5)
    cb = rng.uniform(-1, 1, 5)
    a = TensorPoly((0.2,), (0.7,), ca)
    b = TensorPoly((0.2,), (0.7,), cb)
    prod = a.multiply_truncate(b, 4)
    oracle = np.convolve(ca, cb)[:5]
    assert np.max(np.abs(prod.coeffs - oracle)) < 1e-13


def test_multiply_truncate_requires_matching_frame():
    a = TensorPoly((0.0,), (1.0,), [1.0, 1.0])
    b = TensorPoly((1.0,), (1.0,), [1.0, 1.0])
    with pytest.raises(ContractViolation):
        a.multiply_truncate(b, 1)


def test_multiply_truncate_2d_matches_convolution():
    ca = rng.uniform(-1, 1, (3, 3))
    cb = rng.uniform(-1, 1, (3, 3))
    a = TensorPoly((0.0, 0.0), (1.0, 1.0), ca)
    b = TensorPoly((0.0, 0.0), (1.0, 1.0), cb)
    prod = a.multiply_truncate(b, 2)
    full = np.zeros((5, 5))
    for i in range(3):
        for j in range(3):
            full[i : i + 3, j : j + 3] += ca[i, j] * cb
    assert np.max(np.abs(prod.coeffs - full[:3, :3])) < 1e-13


def test_recenter_identity():
    p = TensorPoly((0.4,), (2.0,), rng.uniform(-1, 1, 6))
    q = p.recentered((0.4,), (2.0,))
    assert np.allclose(q.coeffs, p.coeffs)


def test_recenter_binomial_shift():
    p = TensorPoly((0.0,), (1.0,), [0.0, 0.0, 1.0])  # x^2
    q = p.recentered((1.0,), (1.0,))
    assert np.allclose(q.coeffs, [1.0, 2.0, 1.0])


def test_recenter_pointwise_and_roundtrip():
    c = rng.uniform(-1, 1, 8)
    p = TensorPoly((0.3,), (0.5,), c)
    q = p.recentered((-0.2,), (1.3,))
    xs = np.linspace(-1, 1, 10)
    rel = np.max(np.abs(q(xs) - p(xs))) / max(1.0, np.max(np.abs(p(xs))))
    assert rel < 1e-12
    back = q.recentered((0.3,), (0.5,))
    assert np.max(np.abs(back.coeffs - c)) < 1e-12


def test_truncate_to_own_degree_is_identity():
    p = TensorPoly((0.0,), (1.0,), [1.0, 1.0, 1.0, 1.0])
    assert np.allclose(p.truncated(3).coeffs, p.coeffs)


def test_truncate_drops_high_powers():
    p = TensorPoly((0.0,), (1.0,), [1.0, 1.0, 1.0, 1.0])
    assert np.allclose(p.truncated(1).coeffs, [1.0, 1.0])


def test_modal_truncation_never_increases_l2_norm():
    # orthogonal-expansion truncation is a projection; checked by quadrature
    for _ in range(100):
        n = 10
        x, _ = gll_nodes(n)
        vals = np.polynomial.polynomial.polyval(x, rng.uniform(-1, 1, n))
        e = legendre_project(vals, n - 1)
        t = e.truncated(2)
        p_full = e.to_tensor_poly(0.0, 1.0)
        p_trunc = t.to_tensor_poly(0.0, 1.0)
        assert reference_l2_norm2(p_trunc) <= reference_l2_norm2(p_full) * (1 + 1e-12)


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------


def test_legendre_project_orthogonality():
    n = 8
    x, _ = gll_nodes(n)
    vals = np.polynomial.legendre.legval(x, [0, 0, 1.0])
    e = legendre_project(vals, 5)
    want = np.zeros(6)
    want[2] = 1.0
    assert np.max(np.abs(e.coeffs - want)) < 1e-13


def test_legendre_project_constant():
    vals = np.ones(6)
    e = legendre_project(vals, 5)
    want = np.zeros(6)
    want[0] = 1.0
    assert np.max(np.abs(e.coeffs - want)) < 1e-13


def test_legendre_project_2d_monomial_matches_conversion_oracle():
    # samples of r^5 s^3 on a 10x10 GLL grid (m = 3 transfer configuration);
    # oracle converts monomial to Legendre coefficients exactly
    n = 10
    x, _ = gll_nodes(n)
    vals = (x**5)[:, None] * (x**3)[None, :]
    e = legendre_project(vals, (9, 9))
    minv = np.linalg.inv(basis_to_monomial_matrix("legendre", 9))
    mono_x = np.zeros(10)
    mono_x[5] = 1.0
    mono_y = np.zeros(10)
    mono_y[3] = 1.0
    oracle = np.outer(minv @ mono_x, minv @ mono_y)
    assert np.max(np.abs(e.coeffs - oracle)) < 1e-12


def test_legendre_project_requires_enough_nodes():
    with pytest.raises(ContractViolation):
        legendre_project(np.ones(4), 5)


def test_chebyshev_project_orthogonality():
    n = 6
    x, _ = chebyshev_gauss_nodes(n)
    vals = np.polynomial.chebyshev.chebval(x, [0, 0, 0, 1.0])
    e = chebyshev_project(vals, 5)
    want = np.zeros(6)
    want[3] = 1.0
    assert np.max(np.abs(e.coeffs - want)) < 1e-13


def test_chebyshev_project_constant():
    e = chebyshev_project(np.ones(5), 4)
    want = np.zeros(5)
    want[0] = 1.0
    assert np.max(np.abs(e.coeffs - want)) < 1e-13


def test_chebyshev_project_roundtrip_degree5():
    coeffs = rng.uniform(-1, 1, 6)
    n = 6
    x, _ = chebyshev_gauss_nodes(n)
    vals = np.polynomial.polynomial.polyval(x, coeffs)
    e = chebyshev_project(vals, 5)
    xs = np.linspace(-1, 1, 17)
    err = np.max(np.abs(e(xs) - np.polynomial.polynomial.polyval(xs, coeffs)))
    assert err < 1e-12


def test_projection_idempotent():
    n = 9
    x, _ = gll_nodes(n)
    vals = np.sin(3 * x)
    e = legendre_project(vals, 8)
    again = legendre_project(e(x), 8)
    assert np.max(np.abs(again.coeffs - e.coeffs)) < 1e-12
    xc, _ = chebyshev_gauss_nodes(n)
    ec = chebyshev_project(np.sin(3 * xc), 8)
    again_c = chebyshev_project(ec(xc), 8)
    assert np.max(np.abs(again_c.coeffs - ec.coeffs)) < 1e-12


# ---------------------------------------------------------------------------
# basis change to monomial form
# ---------------------------------------------------------------------------


def test_expansion_to_monomial_constant():
    e = OrthogonalExpansion("legendre", [1.0])
    p = e.to_tensor_poly(0.0, 1.0)
    assert np.allclose(p.coeffs, [1.0])


def test_expansion_to_monomial_linear_scaling():
    # P_1 on a cell of width h centered at c: reference r = (x - c)/(h/2)
    h, c = 0.4, 1.7
    e = OrthogonalExpansion("legendre", [0.0, 1.0])
    p = e.to_tensor_poly(c, h / 2.0)
    xs = c + h / 2 * np.linspace(-1, 1, 5)
    r = (xs - c) / (h / 2)
    assert np.max(np.abs(p(xs) - r)) < 1e-13
    q = p.recentered(c, h)  # same polynomial with unit-cell scaling
    assert abs(q.coeffs[1] - 2.0) < 1e-13


def test_chebyshev_t2_to_monomial():
    e = OrthogonalExpansion("chebyshev", [0.0, 0.0, 1.0])
    p = e.to_tensor_poly(0.0, 1.0)
    assert np.allclose(p.coeffs, [-1.0, 0.0, 2.0])
