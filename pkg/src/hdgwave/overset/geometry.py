"""Body shapes and grid generation for the overset configurations.

Bodies are closed star-shaped curves given by a positive radius function of
the polar angle about their center; rings grown from them blend radially to
an outer circle (see dg.mesh).  The smooth pentagon of the scattering
experiment is the five-lobed cosine perturbation of a circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hdgwave.dg.mesh import MeshError, QuadMesh, annulus_mesh, body_fitted_mesh


@dataclass
class CircleBody:
    center: tuple
    r: float

    def radius(self, theta):
        return self.r + 0.0 * np.asarray(theta)

    def point(self, s):
        return (self.center[0] + self.r * math.cos(s), self.center[1] + self.r * math.sin(s))


@dataclass
class StarBody:
    """Closed curve r(theta) about a center; must stay positive."""

    center: tuple
    radius_fn: object

    def radius(self, theta):
        return self.radius_fn(np.asarray(theta))

    def point(self, s):
        r = float(self.radius_fn(np.asarray(s)))
        return (self.center[0] + r * math.cos(s), self.center[1] + r * math.sin(s))


def pentagon_body(center=(0.0, 0.0)) -> StarBody:
    """Five-lobed smooth pentagon: r(s) = (1 + cos(10 s)/10) / 10."""
    return StarBody(center, lambda th: 0.1 * (1.0 + 0.1 * np.cos(10.0 * th)))


def generate_annulus_grid(center, r_inner, r_outer, n_rad, n_theta=None,
                          target_size=None, inner_role="internal",
                          outer_role="physical") -> QuadMesh:
    """Structured ring mesh between two circles (periodic in angle)."""
    return annulus_mesh(center, r_inner, r_outer, n_rad, n_theta=n_theta,
                        target_size=target_size, inner_role=inner_role,
                        outer_role=outer_role)


def generate_body_fitted_grid(body, n_rad, r_outer, n_theta=None,
                              target_size=None) -> QuadMesh:
    """Ring between a body curve (physical) and an outer circle (overset)."""
    if isinstance(body, CircleBody):
        return annulus_mesh(body.center, body.r, r_outer, n_rad, n_theta=n_theta,
                            target_size=target_size, inner_role="physical",
                            outer_role="internal")
    return body_fitted_mesh(body, n_rad, r_outer, n_theta=n_theta,
                            target_size=target_size)
