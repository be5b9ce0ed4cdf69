"""Degree-truncation energy experiment.

A degree 2m+3 polynomial on [-1/2, 1/2] built from random two-point Hermite
endpoint data is truncated to degree m+1 two ways: dropping monomial powers
(what an interpolation-based transfer does) and dropping Legendre modes (an
orthogonal projection).  The projection ratio of squared L2 norms never
exceeds one; the interpolation ratio can exceed it by orders of magnitude,
growing with m.
"""

from __future__ import annotations

import numpy as np

from hdgwave.poly import OrthogonalExpansion, basis_to_monomial_matrix, gauss_nodes, hermite_matrices


def _norm2_matrix(n_coeffs):
    """Gram matrix of monomials z^k on [-1/2, 1/2]."""
    g = np.zeros((n_coeffs, n_coeffs))
    for a in range(n_coeffs):
        for b in range(n_coeffs):
            p = a + b
            g[a, b] = 0.0 if p % 2 else 0.5**p / (p + 1)
    return g


def truncation_ratio_experiment(m, trials, seed=0):
    """Max ratios ||truncated p||^2 / ||p||^2 over random endpoint data.

    Returns (interp_max, projection_max).  Endpoint DOFs are drawn uniform on
    [-1, 1]; the full polynomial is the two-point Hermite interpolant of that
    data (degree 2m+3 on a unit cell).
    """
    if trials < 1:
        raise ValueError("at least one trial required")
    rng = np.random.default_rng(seed)
    n_dofs = m + 2
    bl, br = hermite_matrices(n_dofs)
    n = 2 * n_dofs
    gram = _norm2_matrix(n)
    keep = m + 2  # monomial coefficients kept: powers 0..m+1
    # Legendre modes on [-1/2, 1/2]: P_l(2z); mode coefficients from monomials
    mono_to_leg = np.linalg.inv(basis_to_monomial_matrix("legendre", n - 1))
    scale = 2.0 ** np.arange(n)  # z^k = (r/2)^k in reference r = 2z
    leg_norms = 1.0 / (2 * np.arange(n) + 1)  # int over z of P_l(2z)^2

    interp_max = 0.0
    proj_max = 0.0
    data = rng.uniform(-1, 1, size=(trials, n))
    coeffs_all = data[:, :n_dofs] @ bl.T + data[:, n_dofs:] @ br.T
    for coeffs in coeffs_all:
        full2 = coeffs @ gram @ coeffs
        if full2 == 0.0:
            continue
        trunc = coeffs[:keep]
        trunc2 = trunc @ gram[:keep, :keep] @ trunc
        interp_max = max(interp_max, trunc2 / full2)
        modes = mono_to_leg @ (coeffs / scale)
        mode2 = leg_norms * modes**2
        proj_max = max(proj_max, np.sum(mode2[:keep]) / np.sum(mode2))
    return interp_max, proj_max
