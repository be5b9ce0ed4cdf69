"""Closed-form solutions used by the convergence studies."""

from __future__ import annotations

import numpy as np

from hdgwave.analysis.bessel import bessel_j, bessel_zero


class StandingWave1D:
    """u = sin(k x) cos(k t) on the unit interval (zero initial velocity)."""

    def __init__(self, k=15 * np.pi / 2):
        self.k = float(k)

    def g0(self, x, order=0):
        return self.k**order * np.sin(self.k * x + order * np.pi / 2)

    def g1(self, x, order=0):
        return 0.0 * np.asarray(x)

    def u(self, x, t):
        return np.sin(self.k * np.asarray(x)) * np.cos(self.k * t)

    def v(self, x, t):
        return -self.k * np.sin(self.k * np.asarray(x)) * np.sin(self.k * t)


class DiskMode:
    """Unit-disk eigenmode J_mu(kappa r) cos(mu theta) cos(kappa t).

    ``kappa`` is the nu-th zero of J_mu, so the mode vanishes on the unit
    circle (homogeneous Dirichlet boundary).
    """

    def __init__(self, mu=7, nu=7):
        self.mu = int(mu)
        self.nu = int(nu)
        self.kappa = bessel_zero(self.mu, self.nu)

    def u0(self, x, y):
        r = np.hypot(x, y)
        th = np.arctan2(y, x)
        return bessel_j(self.mu, self.kappa * r) * np.cos(self.mu * th)

    def v0(self, x, y):
        return 0.0 * np.asarray(x)

    def u(self, x, y, t):
        return self.u0(x, y) * np.cos(self.kappa * t)

    @property
    def period(self):
        return 2 * np.pi / self.kappa
