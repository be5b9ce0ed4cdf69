"""Convergence studies and long-time error tracking for the coupled solvers.

Errors are measured on oversampled grids (at least ten points per cell and
per element in each direction); rates come from a least-squares fit of the
log error against the log spacing.
"""

from __future__ import annotations

import math

import numpy as np


def fit_rate(hs, errors):
    """Least-squares slope of log(error) against log(h)."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        return float("nan")
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


def convergence_study(run_fn, spacings, oversample=10):
    """Error table and fitted rate.

    ``run_fn(h, oversample)`` integrates one refinement and returns its max
    error; at least three refinements are required.
    """
    spacings = list(spacings)
    if len(spacings) < 3:
        raise ValueError("a convergence study needs at least three refinements")
    errors = [run_fn(h, oversample) for h in spacings]
    rate = fit_rate(spacings, errors)
    return {"h": spacings, "error": errors, "rate": rate}


def adjusted_step_count(dt_nominal, T):
    """Steps landing exactly on T with dt at most the nominal step."""
    return max(1, math.ceil(T / dt_nominal - 1e-12))


def linear_fit_through_origin(ts, errs):
    """Slope and R^2 of the model err = alpha t."""
    ts = np.asarray(ts, dtype=float)
    errs = np.asarray(errs, dtype=float)
    denom = float(np.sum(ts * ts))
    alpha = float(np.sum(ts * errs)) / denom if denom > 0 else 0.0
    resid = errs - alpha * ts
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((errs - errs.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return alpha, r2


def long_time_error_track(system, state, exact_u, T, sample_every=1):
    """Evolve to T recording (t, max error); returns samples and the linear fit.

    ``system`` provides advance(state) and max_error(state, exact_u);
    ``sample_every`` counts steps between samples.
    """
    steps = adjusted_step_count(system.dt_a, T)
    ts, errs = [], []
    for n in range(steps):
        state = system.advance(state)
        if (n + 1) % sample_every == 0 or n == steps - 1:
            ts.append(state.t)
            errs.append(system.max_error(state, exact_u))
    alpha, r2 = linear_fit_through_origin(ts, errs)
    return {"t": np.array(ts), "error": np.array(errs), "alpha": alpha, "r2": r2,
            "state": state}
