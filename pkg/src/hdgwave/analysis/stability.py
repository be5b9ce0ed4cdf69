"""Numerical stability diagnostics for the coupled 1D scheme.

One coupled step is a linear map of all DOFs; applying it to every unit
vector assembles the amplification matrix column by column.  A spectral
radius at or below one (up to round-off) indicates a power-bounded step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hdgwave.overset.coupled1d import OversetConfig1D, OversetSystem1D


@dataclass
class AmplificationMatrix:
    matrix: np.ndarray
    meta: dict

    @property
    def dimension(self):
        return self.matrix.shape[0]


def build_amplification_matrix(config: OversetConfig1D = None, step_fn=None,
                               dimension=None) -> AmplificationMatrix:
    """Columns are coupled-step images of unit vectors.

    ``step_fn`` may replace the coupled step (maps packed vector to packed
    vector, with ``dimension`` DOFs) for harness checks; the default builds
    the overset system from ``config`` and uses its advance.
    """
    meta = {}
    if step_fn is None:
        system = OversetSystem1D(config)

        def step_fn(w):
            state = system.unpack(w)
            return system.pack(system.advance(state))

        dimension = system.n_dofs
        meta = {
            "n_a": config.n_a,
            "n_b": config.n_b,
            "m": config.m,
            "cfl": config.cfl,
            "hb_over_ha": config.hb_over_ha,
            "transfer": config.transfer,
            "n_dg": system.n_dg,
        }
    if dimension is None:
        raise ValueError("dimension required with a custom step_fn")
    h = np.empty((dimension, dimension))
    e = np.zeros(dimension)
    for k in range(dimension):
        e[:] = 0.0
        e[k] = 1.0
        h[:, k] = step_fn(e)
    return AmplificationMatrix(h, meta)


def spectral_radius(amp: AmplificationMatrix | np.ndarray):
    """(rho, eigenvalues) from a dense nonsymmetric eigensolve."""
    mat = amp.matrix if isinstance(amp, AmplificationMatrix) else np.asarray(amp)
    lam = np.linalg.eigvals(mat)
    return float(np.max(np.abs(lam))), lam


def power_iteration(mat, iterations=500, seed=7):
    """Independent spectral-radius estimate by power iteration."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=mat.shape[0]) + 1j * rng.normal(size=mat.shape[0])
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iterations):
        y = mat @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x = y / norm
        lam = norm
    return float(lam)
