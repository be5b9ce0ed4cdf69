"""Bessel functions of the first kind and their zeros.

Small arguments use the ascending series; larger ones use backward (Miller)
recurrence with the even-order normalization sum, which keeps full double
precision through order ten and arguments beyond sixty.  Zeros are bracketed
by a scan and polished by Newton iteration.
"""

from __future__ import annotations

import math

import numpy as np

_SERIES_CUTOFF = 9.0


def _bessel_j_series(mu, x):
    """Ascending series, reliable for |x| below the cutoff."""
    half = 0.5 * x
    term = half**mu / math.factorial(mu)
    total = term
    for k in range(1, 60):
        term *= -(half * half) / (k * (mu + k))
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-300):
            break
    return total


def _bessel_j_miller(mu, x):
    """Backward recurrence normalized by J_0 + 2 sum J_{2k} = 1."""
    m_start = 2 * ((int(x) + max(mu, 10) + 28) // 2 + 10)
    jp, j = 0.0, 1e-300
    total = 0.0
    out = 0.0
    for n in range(m_start, 0, -1):
        jm = (2.0 * n / x) * j - jp
        jp, j = j, jm
        if n - 1 == mu:
            out = j
        if (n - 1) % 2 == 0 and n - 1 > 0:
            total += 2.0 * j
        if abs(j) > 1e250:  # rescale to avoid overflow
            jp *= 1e-250
            j *= 1e-250
            total *= 1e-250
            out *= 1e-250
    total += j
    return out / total


def _bessel_j_series_vec(mu, x):
    """Vectorized ascending series for arrays below the cutoff."""
    half = 0.5 * x
    term = half**mu / math.factorial(mu)
    total = term.copy()
    h2 = half * half
    for k in range(1, 60):
        term = term * (-h2) / (k * (mu + k))
        total += term
        if np.all(np.abs(term) < 1e-18 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _bessel_j_miller_vec(mu, x):
    """Vectorized backward recurrence (shared start order for the batch)."""
    xmax = float(np.max(x))
    m_start = 2 * ((int(xmax) + max(mu, 10) + 28) // 2 + 10)
    jp = np.zeros_like(x)
    j = np.full_like(x, 1e-300)
    total = np.zeros_like(x)
    out = np.zeros_like(x)
    for n in range(m_start, 0, -1):
        jm = (2.0 * n / x) * j - jp
        jp, j = j, jm
        if n - 1 == mu:
            out = j.copy()
        if (n - 1) % 2 == 0 and n - 1 > 0:
            total += 2.0 * j
        big = np.abs(j) > 1e250
        if np.any(big):
            jp[big] *= 1e-250
            j[big] *= 1e-250
            total[big] *= 1e-250
            out[big] *= 1e-250
    total += j
    return out / total


def bessel_j(mu: int, x):
    """J_mu(x) for integer order mu >= 0; accurate to ~1e-13 for mu <= 10, x <= 60."""
    if mu < 0 or mu != int(mu):
        raise ValueError("order must be a nonnegative integer")
    mu = int(mu)
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    shape = xs.shape
    xs = np.atleast_1d(xs).ravel()
    if np.any(xs < 0):
        raise ValueError("argument must be nonnegative")
    out = np.zeros_like(xs)
    zero = xs == 0.0
    out[zero] = 1.0 if mu == 0 else 0.0
    small = (~zero) & (xs < _SERIES_CUTOFF)
    if np.any(small):
        out[small] = _bessel_j_series_vec(mu, xs[small])
    big = xs >= _SERIES_CUTOFF
    if np.any(big):
        out[big] = _bessel_j_miller_vec(mu, xs[big])
    if scalar:
        return float(out[0])
    return out.reshape(shape)


def bessel_j_derivative(mu: int, x):
    """J_mu'(x) from the neighbor identity."""
    if mu == 0:
        return -bessel_j(1, x)
    return 0.5 * (bessel_j(mu - 1, x) - bessel_j(mu + 1, x))


def bessel_zero(mu: int, nu: int, tol=1e-13):
    """The nu-th positive zero of J_mu (nu = 1 is the first)."""
    if nu < 1:
        raise ValueError("zero index starts at 1")
    x = max(mu, 1e-3)
    step = 0.5
    zeros_found = 0
    f_prev = bessel_j(mu, x)
    bracket = None
    while zeros_found < nu:
        x_next = x + step
        f_next = bessel_j(mu, x_next)
        if f_prev * f_next < 0 or f_prev == 0.0:
            zeros_found += 1
            bracket = (x, x_next)
        x, f_prev = x_next, f_next
        if x > 400:
            raise RuntimeError(f"zero search for J_{mu} did not converge")
    lo, hi = bracket
    flo = bessel_j(mu, lo)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        fm = bessel_j(mu, mid)
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
    z = 0.5 * (lo + hi)
    for _ in range(50):
        f = bessel_j(mu, z)
        df = bessel_j_derivative(mu, z)
        dz = f / df
        z -= dz
        if abs(dz) < tol * max(1.0, abs(z)):
            break
    else:
        raise RuntimeError("Newton refinement of the Bessel zero did not converge")
    return float(z)
