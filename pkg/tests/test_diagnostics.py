import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from micropolar_rb.diagnostics import (
    CHECKS,
    BlowupMonitor,
    DiagnosticsRecorder,
    EnergyLedger,
    bkm_ratio,
    blowup_monitor,
    energy_balance,
    energy_terms,
    gn_ratio,
    heat_maximal_regularity_check,
    heat_operator,
    hs_series,
    identity_suite,
    norm_columns,
    norm_record,
    twin_run_stability,
    z_budget,
)
from micropolar_rb.dynamics import Params, State, compute_Z
from micropolar_rb.initial import make_ic
from micropolar_rb.spectral import Grid, PhysicalField, SpectralField, l2_norm, random_field, to_spectral
from micropolar_rb.timestepper import IntegratorConfig, Stepper, run

from conftest import random_state, rng_for

seeds = st.integers(0, 2**32 - 1)
P = Params(0.3, 0.1, 0.1)


def phys(grid, values):
    return to_spectral(PhysicalField(grid, values))


def temperature_state(grid, values):
    z = SpectralField.zeros(grid)
    return State(z, z, phys(grid, values))


def trajectory(s0, p, cfg, cadence=1):
    out = []
    run(s0, p, cfg, hooks=[lambda i, st_: out.append(st_)], cadence=cadence)
    return out


# ---------------------------------------------------------------- energy


def test_energy_step_heat_case(grid32):
    x1, _ = grid32.x
    s = temperature_state(grid32, np.cos(x1))
    prev = None
    for dt in (0.02, 0.01, 0.005):
        after = Stepper(grid32, P, dt, "IFRK2")(s)
        row = energy_balance(s, after, dt, P)
        heat = -P.mu * energy_terms(s).grad_theta_sq * dt
        d_theta = 0.5 * (l2_norm(after.theta) ** 2 - l2_norm(s.theta) ** 2)
        # buoyancy feeds theta at O(dt^2) through the u2 it generates
        assert abs(d_theta - heat) < 10 * dt * abs(heat)
        if prev is not None:
            assert prev / abs(row.defect) > 6  # O(dt^3) or better
        prev = abs(row.defect)


@pytest.mark.parametrize("scheme,order", [("IFRK2", 2), ("IFRK4", 4)])
def test_energy_defect_converges_at_order_plus_one(scheme, order):
    g = Grid(32)
    s = make_ic("random-band", {"j1": 2}, 3, g)
    d = [abs(energy_balance(s, Stepper(g, P, dt, scheme)(s), dt, P).defect) for dt in (0.01, 0.005)]
    assert d[0] / d[1] == pytest.approx(2 ** (order + 1), rel=0.15)


def test_coupling_column_vanishes_without_kappa(grid32):
    p = Params(0.0, 0.1, 0.1)
    rec = DiagnosticsRecorder(p, checks=("energy",))
    run(random_state(grid32, 1), p, IntegratorConfig(t_end=0.2, dt=0.01), hooks=[rec], step_hooks=[rec.step_hook], cadence=5)
    assert all(r["coupling"] == 0 for r in rec.rows)


def test_energy_ledger_closure(grid32):
    rec = EnergyLedger(P)
    s = make_ic("random-band", {"j1": 2}, 5, grid32)
    run(s, P, IntegratorConfig(t_end=0.5, dt=0.005), step_hooks=[rec])
    assert len(rec.rows) == 100
    assert abs(rec.closure()) < 1e-7
    assert rec.e_initial == pytest.approx(energy_terms(s).e_half)


# ---------------------------------------------------------------- pointwise monitors


def test_blowup_monitor_examples():
    g = Grid(16)
    x1, x2 = g.x
    assert blowup_monitor(temperature_state(g, np.cos(x1))) == pytest.approx(1.0)
    assert blowup_monitor(State.zeros(g)) == 0
    two = blowup_monitor(temperature_state(g, np.cos(x1) + np.cos(x2)))
    fine = Grid(64)
    y1, y2 = fine.x
    assert two == pytest.approx(np.max(np.sqrt(np.sin(y1) ** 2 + np.sin(y2) ** 2)), rel=1e-12)
    assert two == pytest.approx(math.sqrt(2), rel=1e-12)


def test_blowup_monitor_flags_and_argmax(grid32):
    mon = BlowupMonitor(ceiling=0.5)
    x1, _ = grid32.x
    mon(0, temperature_state(grid32, 0.1 * np.cos(x1)))
    mon(1, temperature_state(grid32, np.cos(x1)).replace(time=1.0))
    assert mon.flagged and mon.flag_time == 1.0 and mon.argmax_time() == 1.0


def test_argmax_time_robust_to_cadence():
    g = Grid(32)
    s = make_ic("random-band", {"j1": 2}, 9, g)
    cfg = IntegratorConfig(t_end=1.0, dt=0.01)
    monitors = {c: BlowupMonitor() for c in (5, 10)}
    for c, m in monitors.items():
        run(s, P, cfg, hooks=[m], cadence=c)
    assert abs(monitors[5].argmax_time() - monitors[10].argmax_time()) <= 10 * 0.01 + 1e-12


def test_bkm_zero_and_taylor_green():
    g = Grid(32)
    assert bkm_ratio(State.zeros(g)) == 0
    s = make_ic("taylor-green", {"amplitude": 1.0}, None, g)
    x1, x2 = g.x
    om = 2 * np.sin(x1) * np.sin(x2)
    om_p = (np.mean(np.abs(om) ** 4) * g.area) ** 0.25
    u_hs = math.sqrt(3**2.5 / 2)
    expected = math.sqrt(2) / (1 + om_p + 2 * math.log1p(u_hs))
    assert bkm_ratio(s, 2.5, 4.0) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        bkm_ratio(s, 2.0, 4.0)


def test_bkm_bounded_over_random_states():
    g = Grid(32)
    vals = [bkm_ratio(make_ic("random-band", {}, seed, g)) for seed in range(50)]
    print(f"bkm ratio over 50 states in [{min(vals):.4f}, {max(vals):.4f}]")
    assert np.all(np.isfinite(vals)) and max(vals) < 10 * min(vals)


def test_gn_cos_closed_form():
    g = Grid(16)
    x1, _ = g.x
    f = phys(g, np.cos(x1))
    A = g.area
    f2, f4, g4 = math.sqrt(A / 2), (3 * A / 8) ** 0.25, (3 * A / 8) ** 0.25
    r1, r2 = gn_ratio(f, 4.0)
    assert r1 == pytest.approx(1 / (f2 ** (1 / 3) * g4 ** (2 / 3)), rel=1e-12)
    assert r2 == pytest.approx(1 / (f4**0.5 * g4**0.5), rel=1e-12)


@given(seeds, st.floats(1e-3, 1e3), st.sampled_from([3.0, 4.0, 8.0]))
def test_gn_scale_invariant(seed, lam, p):
    g = Grid(16)
    f = random_field(g, rng_for(seed))
    a, b = gn_ratio(f, p), gn_ratio(f * lam, p)
    assert b[0] == pytest.approx(a[0], rel=1e-10)
    assert b[1] == pytest.approx(a[1], rel=1e-10)


def test_gn_bounded_and_errors():
    g = Grid(32)
    rng = rng_for(17)
    vals = np.array([gn_ratio(random_field(g, rng), 4.0) for _ in range(100)])
    print(f"gn ratios: r1 <= {vals[:, 0].max():.4f}, r2 <= {vals[:, 1].max():.4f}")
    assert np.all(np.isfinite(vals)) and vals.max() < 5
    const = SpectralField.zeros(g)
    const.coeffs[0, 0] = 1.0
    with pytest.raises(ValueError):
        gn_ratio(const, 4.0)
    shifted = random_field(g, rng)
    shifted.coeffs[0, 0] = 0.5
    with pytest.raises(ValueError, match="zero mean"):
        gn_ratio(shifted, 4.0)
    with pytest.raises(ValueError):
        gn_ratio(random_field(g, rng), 2.0)


# ---------------------------------------------------------------- Z budget


def test_z_budget_static_zero_state(grid32):
    traj = [State.zeros(grid32).replace(time=t) for t in (0.0, 0.5, 1.0)]
    b = z_budget(traj, P, 4.0)
    assert np.all(b.lhs == 0) and np.all(b.rhs == 0) and b.holds()


def test_z_budget_reduces_to_vorticity_without_kappa(grid32):
    p = Params(0.0, 0.1, 0.1)
    s = random_state(grid32, 3)
    assert np.array_equal(compute_Z(s, p).coeffs, s.omega_big.coeffs)
    traj = trajectory(s, p, IntegratorConfig(t_end=0.3, dt=0.01), cadence=5)
    assert z_budget(traj, p, 2.0).holds()


@pytest.mark.parametrize("p_norm", [2.0, 4.0, math.inf])
def test_z_budget_generic_run(p_norm):
    g = Grid(64)
    s = make_ic("random-band", {"j1": 2}, 21, g)
    traj = trajectory(s, P, IntegratorConfig(t_end=0.5), cadence=2)
    b = z_budget(traj, P, p_norm)
    assert b.holds(rtol=1e-9), b.ratio.max()


# ---------------------------------------------------------------- twin runs


def test_twin_identical_states():
    g = Grid(32)
    s = random_state(g, 4)
    tr = twin_run_stability(s, s, P, IntegratorConfig(t_end=0.2, dt=0.01))
    assert np.all(tr.D == 0) and tr.within_bound()


def _perturbed(s, eps):
    th = s.theta.coeffs.copy()
    th[1, 0] += 0.5 * eps
    th[-1, 0] += 0.5 * eps
    return s.replace(theta=SpectralField(s.grid, th))


def test_twin_growth_below_gronwall_line():
    g = Grid(32)
    s = make_ic("random-band", {"j1": 2}, 6, g)
    tr = twin_run_stability(s, _perturbed(s, 1e-8), P, IntegratorConfig(t_end=0.5, dt=0.01))
    assert tr.D[0] == pytest.approx(g.area * 2 * 0.25e-16, rel=1e-6)
    assert tr.within_bound()
    assert tr.gronwall_rate >= 2 + 8 * P.kappa**2 / P.gamma


def test_twin_linear_regime_scaling():
    g = Grid(32)
    s = make_ic("random-band", {"j1": 2}, 6, g)
    cfg = IntegratorConfig(t_end=0.1, dt=0.01)
    a = twin_run_stability(s, _perturbed(s, 1e-6), P, cfg)
    b = twin_run_stability(s, _perturbed(s, 5e-7), P, cfg)
    np.testing.assert_allclose(a.D / b.D, 4.0, rtol=1e-3)


# ---------------------------------------------------------------- heat operator


def test_heat_operator_constant_mode():
    g = Grid(16)
    f = phys(g, np.cos(2 * g.x[0]))
    dt, coeff, nt = 0.05, 0.3, 41
    out = heat_operator([f] * nt, dt, coeff)
    k2 = 4.0
    for i in range(nt):
        expected = -(1 - math.exp(-i * dt * coeff * k2)) * 0.5
        assert out[i][2, 0] == pytest.approx(expected, abs=1e-14)
    assert heat_maximal_regularity_check([f] * nt, dt, coeff, 2.0, 2.0) <= 1.0


def test_heat_operator_causality():
    g = Grid(16)
    f = phys(g, np.cos(g.x[1]))
    z = SpectralField.zeros(g)
    samples = [z] * 11 + [f] * 10
    out = heat_operator(samples, 0.1, 1.0)
    assert np.all(out[:11] == 0)
    assert np.max(np.abs(out[12])) > 0


@pytest.mark.parametrize("p,q", [(2.0, 2.0), (2.0, 4.0), (4.0, 2.0)])
def test_heat_ratio_bounded_over_random_series(p, q):
    g = Grid(16)
    rng = rng_for(int(10 * p + q))
    vals = []
    for _ in range(50):
        samples = [random_field(g, rng) for _ in range(21)]
        vals.append(heat_maximal_regularity_check(samples, 0.05, 0.5, p, q))
    print(f"(p, q) = ({p}, {q}): max ratio {max(vals):.4f}")
    assert np.all(np.isfinite(vals)) and max(vals) < 2 * min(vals) + 1


def test_heat_check_validation():
    g = Grid(16)
    with pytest.raises(ValueError):
        heat_maximal_regularity_check([SpectralField.zeros(g)] * 3, 0.1, 1.0, 2.0, 2.0)
    with pytest.raises(ValueError):
        heat_maximal_regularity_check([SpectralField.zeros(g)] * 3, 0.1, 1.0, 1.0, 2.0)


# ---------------------------------------------------------------- H^s series


def test_hs_series_static_and_heat_only():
    g = Grid(32)
    zero = [State.zeros(g).replace(time=t) for t in (0.0, 1.0)]
    hz = hs_series(zero, 2.5)
    assert np.all(hz.total_sq == 0)

    def heat_only(grid, p, w, m):
        return np.zeros_like(w), np.zeros(2)

    s = random_state(g, 8).replace(omega_big=SpectralField.zeros(g))
    traj = []
    run(s, P, IntegratorConfig(t_end=0.5, dt=0.01), hooks=[lambda i, st_: traj.append(st_)], cadence=5, explicit=heat_only)
    h = hs_series(traj, 2.5)
    assert np.all(np.diff(h.theta) <= 0) and np.all(np.diff(h.omega) <= 0)


def test_hs_series_generic_finite():
    g = Grid(32)
    traj = trajectory(make_ic("random-band", {}, 2, g), P, IntegratorConfig(t_end=0.5), cadence=5)
    h = hs_series(traj, 2.5)
    assert h.finite() and np.all(np.diff(h.times) > 0) and math.isfinite(h.growth_constant())


# ---------------------------------------------------------------- norm records


def test_holder_ladder_along_run():
    g = Grid(32)
    A = g.area
    traj = trajectory(make_ic("random-band", {}, 12, g), P, IntegratorConfig(t_end=0.3), cadence=3)
    ps = (2.0, 4.0, 8.0, math.inf)
    for s in traj:
        rec = norm_record(s, P, ps, (2.5,))
        for name in ("Omega", "omega", "Z", "gradtheta", "D2theta"):
            assert rec[f"{name}_Lp2"] <= A**0.25 * rec[f"{name}_Lp4"] * (1 + 1e-12)
            for p in (2, 4, 8):
                assert rec[f"{name}_Lp{p}"] <= A ** (1 / p) * rec[f"{name}_Linf"] * (1 + 1e-12)


def test_norm_columns_names():
    cols = norm_columns((2.0, 4.0, math.inf), (2.5,))
    for c in ("Omega_Lp4", "gradtheta_Linf", "Z_Lp2", "u_Hs2.5", "D2theta_Lp4", "gradu_Linf"):
        assert c in cols


def test_recorder_missing_checks_leave_empty_cells(grid32):
    rec = DiagnosticsRecorder(P, checks=("norms",))
    run(random_state(grid32, 1), P, IntegratorConfig(t_end=0.1, dt=0.01), hooks=[rec], step_hooks=[rec.step_hook], cadence=5)
    assert rec.columns[:7] == ["time", "step", "E_half", "diss_omega", "diss_theta", "coupling", "residual"]
    assert rec.columns[-2:] == ["bkm", "gn_p4"]
    for row in rec.rows:
        assert list(row) == rec.columns
        assert row["E_half"] is None and row["bkm"] is None and row["Omega_Lp2"] is not None
    assert set(CHECKS) == {"energy", "norms", "bkm", "gn", "blowup"}


# ---------------------------------------------------------------- identity suite


def test_identity_suite_passes():
    checks = identity_suite(Grid(64), P, seed=0)
    assert len(checks) == 10
    failed = [(c.name, c.value, c.tol) for c in checks if not c.passed]
    assert not failed


def test_l2_helper_consistency(grid32):
    s = random_state(grid32, 2)
    t = energy_terms(s)
    u = s.velocity()
    expected = 0.5 * (l2_norm(u[0]) ** 2 + l2_norm(u[1]) ** 2 + l2_norm(s.omega_small) ** 2 + l2_norm(s.theta) ** 2)
    assert t.e_half == pytest.approx(expected, rel=1e-13)
