"""Coupled 1D overset system tests."""

import math

import numpy as np
import pytest

from hdgwave.model import BoundaryCondition, PolynomialTrace
from hdgwave.overset.coupled1d import CoupledState1D, OversetConfig1D, OversetSystem1D
from hdgwave.overset.transfers import compute_schedule
from hdgwave.poly import ContractViolation

K = 15 * np.pi / 2


def standing_g0(x, order=0):
    return K**order * np.sin(K * x + order * np.pi / 2)


def zero_fn(x, order=0):
    return 0.0 * x


# ---------------------------------------------------------------------------
# schedule
# ---------------------------------------------------------------------------


def test_schedule_paper_values():
    # direct evaluations of the substep-count formula
    _, _, n_dg = compute_schedule(0.75, 6, 1.0, 0.9)
    assert n_dg == 34
    _, _, n_dg = compute_schedule(0.5, 4, 1.0, 1.0)
    assert n_dg == 14


def test_schedule_bound_holds_for_any_speed():
    for c in (0.3, 1.0, 7.5):
        dt_a, dt_b, n_dg = compute_schedule(0.6, 6, 0.05, 0.045, c=c)
        assert dt_b * 6 * c / 0.045 <= 0.15 * (1 + 1e-9)
        assert n_dg % 2 == 0
        assert abs(dt_a - n_dg * dt_b) < 1e-15


def test_schedule_rejects_high_cfl():
    with pytest.raises(ContractViolation):
        compute_schedule(0.9, 4, 0.1, 0.09)


def test_schedule_times_exact():
    cfg = OversetConfig1D(m=1, n_a=16)
    sysx = OversetSystem1D(cfg)
    taus = [nu / sysx.n_dg for nu in range(sysx.n_dg + 1)]
    assert taus[0] == 0.0 and taus[-1] == 1.0


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------


def test_overlap_ratio_fixed_under_refinement():
    ratios = []
    for n_a in (10, 20, 40):
        sysx = OversetSystem1D(OversetConfig1D(m=1, n_a=n_a, n_b=5))
        ratios.append((sysx.x_a_end - sysx.x_b0) / sysx.h_a)
    assert np.allclose(ratios, ratios[0])
    assert abs(ratios[0] - 4.5) < 1e-12


def test_insufficient_coverage_refused():
    with pytest.raises(ContractViolation):
        OversetSystem1D(OversetConfig1D(m=1, n_a=10, n_b=5, hb_over_ha=0.15))


# ---------------------------------------------------------------------------
# consistency and zero preservation
# ---------------------------------------------------------------------------


def test_zero_state_stays_zero():
    sysx = OversetSystem1D(OversetConfig1D(m=1, n_a=12))
    st = sysx.initialize(zero_fn, zero_fn)
    st = sysx.advance(st)
    assert np.max(np.abs(st.hermite.u)) == 0.0
    assert np.max(np.abs(st.dg_u)) == 0.0


@pytest.mark.parametrize("transfer", ["projection", "interpolation"])
def test_polynomial_consistency_across_grids(transfer):
    # u = x^2 + t^2 is degree m+1 in space; a coupled step keeps both grids
    # exact to round-off
    cfg = OversetConfig1D(
        m=1, cfl=0.5, n_a=12, n_b=5, transfer=transfer,
        bc_left=BoundaryCondition("neumann"),
        bc_right=BoundaryCondition("dirichlet", PolynomialTrace([1.0, 0.0, 1.0])),
    )
    sysx = OversetSystem1D(cfg)

    def g0(x, order=0):
        return [x**2, 2 * x + 0 * x, 2 + 0 * x][order] if order <= 2 else 0 * x

    st = sysx.initialize(g0, zero_fn)
    for _ in range(3):
        st = sysx.advance(st)
    assert sysx.max_error(st, lambda x, t: x**2 + t**2) < 1e-12


def test_transfer_node_counts_per_step():
    sysx = OversetSystem1D(OversetConfig1D(m=2, n_a=16))
    assert sysx.dg_node_x.shape == (1, 2 * 2 + 2)
    assert sysx.n_dg == compute_schedule(0.5, 6, sysx.h_a, sysx.h_b)[2]


# ---------------------------------------------------------------------------
# standing wave accuracy and energy
# ---------------------------------------------------------------------------


def run_standing_wave(m, n_a, T=2.0, cfl=0.5, transfer="projection"):
    cfg = OversetConfig1D(m=m, cfl=cfl, n_a=n_a, n_b=5, transfer=transfer)
    probe = OversetSystem1D(cfg)
    steps = math.ceil(T / probe.dt_a)
    cfl_adj = (T / steps) / (probe.h_a / cfg.c)
    sysx = OversetSystem1D(OversetConfig1D(m=m, cfl=cfl_adj, n_a=n_a, n_b=5, transfer=transfer))
    st = sysx.initialize(standing_g0, zero_fn)
    for _ in range(steps):
        st = sysx.advance(st)
    return sysx, st


def test_standing_wave_coupled_convergence_m1():
    errs = []
    for n_a in (40, 60, 80):
        sysx, st = run_standing_wave(1, n_a, T=1.0)
        errs.append(sysx.max_error(st, lambda x, t: np.sin(K * x) * np.cos(K * t)))
    rate = -np.polyfit(np.log([40, 60, 80]), np.log(errs), 1)[0]
    assert abs(rate - 3) < 0.4


def test_error_smooth_across_overlap():
    # interface error comparable to interior error (no O(1) jump)
    sysx, st = run_standing_wave(2, 40, T=1.0)
    xs_all = np.linspace(0, 1, 401)
    ua, _ = sysx.hermite.evaluate(st.hermite, np.clip(xs_all, 0, sysx.x_a_end))
    err_interior = np.max(np.abs(ua - np.sin(K * np.clip(xs_all, 0, sysx.x_a_end)) * np.cos(K * st.t)))
    xs_ov = np.linspace(sysx.x_b0, sysx.x_a_end, 40)
    ub, _ = sysx.dg.evaluate(st.dg_u, st.dg_v, xs_ov)
    err_overlap = np.max(np.abs(ub - np.sin(K * xs_ov) * np.cos(K * st.t)))
    assert err_overlap < 10 * err_interior + 1e-12


def test_coupled_energy_bounded():
    # total discrete energy stays within a tight band over 100 steps
    cfg = OversetConfig1D(m=2, cfl=0.5, n_a=40, n_b=5)
    sysx = OversetSystem1D(cfg)
    st = sysx.initialize(standing_g0, zero_fn)
    e0 = sysx.total_energy(st)
    max_rise = 0.0
    prev = e0
    for _ in range(100):
        st = sysx.advance(st)
        e = sysx.total_energy(st)
        max_rise = max(max_rise, e - prev)
        prev = e
    assert max_rise <= 1e-8 * e0


def test_timings_and_dofs_recorded():
    sysx = OversetSystem1D(OversetConfig1D(m=1, n_a=12))
    st = sysx.initialize(standing_g0, zero_fn)
    sysx.advance(st)
    assert sysx.timings["dg"] > 0.0
    counts = sysx.dof_counts()
    assert counts["hermite"] == 13 * 5
    assert counts["dg"] == 5 * (5 + 4)  # q_u = 4: five u and four v coefficients
