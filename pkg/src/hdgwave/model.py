"""Wave model data: speed field, forcing, boundary traces.

Boundary data and forcing enter the solvers through their time derivatives
(compatibility closures and Taylor stepping both differentiate the data), so
traces are callables ``g(t, order)`` returning the ``order``-th derivative.
The classes below provide exact derivatives for the traces used by the
experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hdgwave.poly import TensorPoly


# ---------------------------------------------------------------------------
# time traces
# ---------------------------------------------------------------------------


class ZeroTrace:
    """g(t) = 0 with all derivatives zero."""

    def __call__(self, t, order=0):
        return np.zeros_like(np.asarray(t, dtype=float))


class SineTrace:
    """g(t) = amplitude * sin(omega t + phase)."""

    def __init__(self, omega, amplitude=1.0, phase=0.0):
        self.omega = float(omega)
        self.amplitude = float(amplitude)
        self.phase = float(phase)

    def __call__(self, t, order=0):
        t = np.asarray(t, dtype=float)
        return (
            self.amplitude
            * self.omega**order
            * np.sin(self.omega * t + self.phase + order * np.pi / 2)
        )


class RickerishTrace:
    """g(t) = (t - t0) * exp(-b (t - t0)^2), the pulse used by the multi-body demo.

    Derivatives follow from d^k/ds^k e^{-b s^2} = (-sqrt(b))^k H_k(sqrt(b) s) e^{-b s^2}
    with H_k the physicists' Hermite polynomials.
    """

    def __init__(self, b, t0=0.0):
        self.b = float(b)
        self.t0 = float(t0)

    def _gauss_deriv(self, s, k):
        rb = math.sqrt(self.b)
        h = np.polynomial.hermite.hermval(rb * s, [0.0] * k + [1.0])
        return (-rb) ** k * h * np.exp(-self.b * s**2)

    def __call__(self, t, order=0):
        s = np.asarray(t, dtype=float) - self.t0
        # product rule on s * exp(-b s^2)
        out = s * self._gauss_deriv(s, order)
        if order >= 1:
            out = out + order * self._gauss_deriv(s, order - 1)
        return out


class PolynomialTrace:
    """g(t) = sum coeffs[k] t^k with exact derivatives."""

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=float)

    def __call__(self, t, order=0):
        from numpy.polynomial import polynomial as npp

        c = npp.polyder(self.coeffs, order) if order else self.coeffs
        if len(c) == 0:
            c = np.zeros(1)
        return npp.polyval(np.asarray(t, dtype=float), c)


class CallableTrace:
    """Wrap a plain callable; derivatives must be supplied or default to zero order only."""

    def __init__(self, fn, derivative_fn=None):
        self.fn = fn
        self.derivative_fn = derivative_fn

    def __call__(self, t, order=0):
        if order == 0:
            return self.fn(t)
        if self.derivative_fn is None:
            raise ValueError("trace derivatives required but not supplied")
        return self.derivative_fn(t, order)


# ---------------------------------------------------------------------------
# model and boundary conditions
# ---------------------------------------------------------------------------


@dataclass
class WaveModel:
    """Speed and forcing data for u_t = v, v_t = div(c^2 grad u) + f.

    ``speed_squared`` is either a positive constant or a callable c2(x[, y])
    evaluated pointwise; variable speed switches the solvers to the
    polynomial product path.  ``forcing`` is None or a callable f(x[, y], t).
    ``forcing_poly`` may supply exact per-cell space-time coefficients for
    polynomial forcing (used by the manufactured-solution tests).
    """

    speed_squared: object = 1.0
    forcing: object = None
    forcing_poly: object = None

    @property
    def constant_speed(self) -> bool:
        return np.isscalar(self.speed_squared)

    @property
    def c2(self) -> float:
        if not self.constant_speed:
            raise ValueError("speed is not constant")
        c2 = float(self.speed_squared)
        if c2 <= 0:
            raise ValueError("speed squared must be positive")
        return c2

    @property
    def c(self) -> float:
        return math.sqrt(self.c2)

    def c2_at(self, *coords):
        if self.constant_speed:
            return np.full(np.broadcast(*coords).shape if coords else (), self.c2)
        return np.asarray(self.speed_squared(*coords), dtype=float)


@dataclass
class BoundaryCondition:
    """Dirichlet (on u) or Neumann (on the outward normal derivative) data.

    ``data`` is a trace callable g(t, order); None means homogeneous.
    """

    kind: str
    data: object = None
    side: str = ""

    def __post_init__(self):
        if self.kind not in ("dirichlet", "neumann"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.data is None:
            self.data = ZeroTrace()

    @property
    def homogeneous(self) -> bool:
        return isinstance(self.data, ZeroTrace)


def project_speed_field(model: WaveModel, center, scale, degree: int) -> TensorPoly:
    """Per-cell polynomial approximation of c^2 for the variable-speed path."""
    from hdgwave.poly import gll_nodes, legendre_project

    n = degree + 1
    x, _ = gll_nodes(max(n, 2))
    if np.isscalar(center):
        center, scale = (center,), (scale,)
    if len(center) == 1:
        pts = center[0] + scale[0] * x / 2.0
        vals = model.c2_at(pts)
        exp = legendre_project(vals, degree)
        return exp.to_tensor_poly(center, (scale[0] / 2.0,)).recentered(center, scale)
    gx = center[0] + scale[0] * x / 2.0
    gy = center[1] + scale[1] * x / 2.0
    vals = model.c2_at(gx[:, None], gy[None, :])
    exp = legendre_project(vals, degree)
    half = (scale[0] / 2.0, scale[1] / 2.0)
    return exp.to_tensor_poly(center, half).recentered(center, scale)
