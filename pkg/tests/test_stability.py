"""Amplification-matrix diagnostics."""

import numpy as np
import pytest

from hdgwave.analysis.stability import (
    build_amplification_matrix,
    power_iteration,
    spectral_radius,
)
from hdgwave.overset.coupled1d import OversetConfig1D


def test_identity_stub_gives_identity_matrix():
    amp = build_amplification_matrix(step_fn=lambda w: w, dimension=17)
    assert np.allclose(amp.matrix, np.eye(17))
    rho, lam = spectral_radius(amp)
    assert abs(rho - 1.0) < 1e-14


def test_spectral_radius_diagonal():
    rho, lam = spectral_radius(np.diag([0.5, 0.25]))
    assert rho == 0.5


def test_spectral_radius_matches_power_iteration():
    rng = np.random.default_rng(3)
    mat = rng.normal(size=(50, 50)) / np.sqrt(50)
    rho, _ = spectral_radius(mat)
    est = power_iteration(mat, iterations=500)
    assert abs(rho - est) < 1e-6 * max(1.0, rho)


def test_projection_transfer_stable_small_config():
    cfg = OversetConfig1D(m=1, cfl=0.5, n_a=10, n_b=5, transfer="projection")
    amp = build_amplification_matrix(cfg)
    rho, _ = spectral_radius(amp)
    assert rho <= 1 + 1e-10
    assert amp.meta["n_dg"] > 0


def test_interpolation_transfer_unstable_small_config():
    cfg = OversetConfig1D(m=1, cfl=0.5, n_a=10, n_b=5, transfer="interpolation")
    amp = build_amplification_matrix(cfg)
    rho, _ = spectral_radius(amp)
    assert rho > 1 + 1e-8


def test_amplification_matrix_reproducible():
    cfg = OversetConfig1D(m=1, cfl=0.5, n_a=8, n_b=5)
    a = build_amplification_matrix(cfg).matrix
    b = build_amplification_matrix(cfg).matrix
    assert np.array_equal(a, b)
