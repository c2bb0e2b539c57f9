"""Flow integration: closed-form trajectories, substep control, backward
potential sweep, failure modes."""

import numpy as np
import pytest

from rhflow import calculus as ca
from rhflow import flows as fl
from rhflow.chart import (FlowState, MapField, MetricField, constant_field,
                          constant_map, constant_metric, make_chart)
from rhflow.errors import (CFLViolation, HypothesisViolation, InvalidParam,
                           MetricDegenerate, TauUnderflow)


def cylinder_state(alpha=1.0, nx=32, ny=16, a=1.0):
    ch = make_chart("cylinder", nx, ny, Ly=1.0)
    X, _ = ch.coords()
    g0 = constant_metric(ch, a, 0.0, 1.0)
    phi = MapField(ch, X[..., None], ("circle",))
    return FlowState(0.0, 1.0, g0, phi, constant_field(ch, 0.0), alpha)


def test_product_cylinder_closed_form():
    # d_t g = -2(Ric - alpha dphi x dphi) with phi = x: g_xx(t) = 1 + 2at
    st = cylinder_state(alpha=1.0)
    traj = fl.run_flow(st, 0.25, 1e-3, system="ps", phi_mode="hold")
    assert len(traj.snapshots) == 251
    gT = traj.snapshots[-1].g
    assert np.abs(gT.g11 / 1.5 - 1).max() < 1e-10
    assert np.abs(gT.g12).max() == 0.0
    assert np.abs(gT.g22 - 1.0).max() == 0.0
    assert traj.diagnostics["tension_sup"].max() < 1e-12
    assert traj.diagnostics["substeps"][1] >= 1
    assert np.isfinite(traj.diagnostics["cfl"][1:]).all()


def test_snapshot_interval_independence():
    # the closed-form solution is linear in t, so RK4 integrates it exactly
    # for any substep split; two reported intervals must agree to roundoff
    st = cylinder_state(alpha=1.3)
    a = fl.run_flow(st, 0.1, 1e-2, system="ps").snapshots[-1].g
    b = fl.run_flow(st, 0.1, 2.5e-3, system="ps").snapshots[-1].g
    assert np.abs(a.g11 - b.g11).max() < 1e-11


def test_substep_cap_violation():
    st = cylinder_state(nx=64, ny=32)
    with pytest.raises(CFLViolation):
        fl.advance(st, 1e-3, "ps", max_substeps=1)


def test_q3_backward_potential_closed_form():
    st = cylinder_state(alpha=1.0)
    errs = []
    for dt in (4e-3, 2e-3):
        traj = fl.run_flow(st, 0.2, dt, system="q3")
        fT = 0.4
        withf, slopes = fl.solve_f_backward(traj, np.full(st.chart.shape, fT))
        a_T = 1 + 2 * 0.2
        worst = 0.0
        for k, s in enumerate(withf.snapshots):
            a_t = 1 + 2 * withf.times[k]
            want = fT - 0.5 * np.log(a_T / a_t)
            worst = max(worst, np.abs(s.f.values - want).max())
        errs.append(worst)
        # slope at final time: f' = -lap f - S = alpha/a(T)
        assert np.abs(slopes[-1] - 1.0 / a_T).max() < 1e-9
    assert errs[0] < 5e-6
    assert errs[0] / errs[1] > 3.0


def test_p2_tau_and_potential_closed_form():
    ch = make_chart("rectangle", 16, 16)
    st = FlowState(0.0, 1.0, constant_metric(ch, 1.0, 0.0, 1.0),
                   constant_map(ch, [0.1]), constant_field(ch, 0.0), 1.0)
    traj = fl.run_flow(st, 0.8, 2e-3, system="p2")
    assert traj.snapshots[-1].tau == pytest.approx(0.2, abs=1e-12)
    withf, _ = fl.solve_f_backward(traj, np.full(ch.shape, 0.3))
    worst = 0.0
    for k, s in enumerate(withf.snapshots):
        tau_t = 1.0 - withf.times[k]
        want = 0.3 - np.log(tau_t / 0.2)
        worst = max(worst, np.abs(s.f.values - want).max())
    assert worst < 5e-6


def test_p2_tau_underflow_guard():
    ch = make_chart("rectangle", 16, 16)
    st = FlowState(0.0, 0.5, constant_metric(ch, 1.0, 0.0, 1.0),
                   constant_map(ch, [0.1]), constant_field(ch, 0.0), 1.0)
    with pytest.raises(TauUnderflow):
        fl.run_flow(st, 0.5, 1e-2, system="p2")
    # explicit floor overrides the 10*dt default
    traj = fl.run_flow(st, 0.45, 1e-2, system="p2", tau_floor=0.05)
    assert traj.snapshots[-1].tau == pytest.approx(0.05)


def test_hold_vs_reharmonize_agree_on_harmonic_map():
    st = cylinder_state(alpha=1.1)
    a = fl.run_flow(st, 0.05, 5e-3, system="ps", phi_mode="hold")
    b = fl.run_flow(st, 0.05, 5e-3, system="ps", phi_mode="reharmonize")
    pa = a.snapshots[-1].phi.component(0)
    pb = b.snapshots[-1].phi.component(0)
    d = pa - pb
    d -= d.mean()
    assert np.abs(d).max() < 1e-10
    assert np.abs(a.snapshots[-1].g.g11 - b.snapshots[-1].g.g11).max() < 1e-10


def test_strict_mode_flags_nonharmonic_held_map():
    ch = make_chart("cylinder", 32, 16, Ly=1.0)
    X, _ = ch.coords()
    phi = MapField(ch, (X + 0.3 * np.sin(X))[..., None], ("circle",))
    st = FlowState(0.0, None, constant_metric(ch, 1.0, 0.0, 1.0), phi,
                   constant_field(ch, 0.0), 1.0)
    with pytest.raises(HypothesisViolation):
        fl.run_flow(st, 0.02, 1e-2, system="ps", strict=True,
                    tension_tol=1e-8)


def test_collapse_raises_metric_degenerate():
    # shrinking cap metric integrated past its extinction time in one
    # reported step: the stage metrics lose positivity
    ch = make_chart("polar_annulus", 17, 8, r_min=0.05)
    r, _ = ch.coords()
    c = 4.0 / (1.0 + r ** 2) ** 2
    g = MetricField(ch, c, np.zeros_like(c), c * r ** 2)
    st = FlowState(0.0, None, g, constant_map(ch, [0.0]),
                   constant_field(ch, 0.0), 1.0)
    with pytest.raises(MetricDegenerate):
        fl.advance(st, 0.7, "ps", max_substeps=2048)


def test_run_flow_argument_validation():
    st = cylinder_state()
    with pytest.raises(InvalidParam):
        fl.run_flow(st, 0.1, 1e-3, system="ricci")
    with pytest.raises(InvalidParam):
        fl.run_flow(st, 0.1, 1e-3, phi_mode="freeze")
    with pytest.raises(InvalidParam):
        fl.run_flow(st, 0.1005, 1e-2)
    with pytest.raises(InvalidParam):
        fl.run_flow(FlowState(0.0, None, st.g, st.phi, st.f, st.alpha),
                    0.1, 1e-2, system="p2")


def test_trajectory_diagnostics_shape():
    st = cylinder_state()
    traj = fl.run_flow(st, 0.05, 1e-2, system="ps")
    n = len(traj.times)
    assert n == 6
    for key in ("tension_sup", "cfl", "substeps", "stiffness",
                "kg_min", "kg_max"):
        assert traj.diagnostics[key].shape == (n,)
    assert traj.diagnostics["substeps"][0] == 0
    assert np.isnan(traj.diagnostics["cfl"][0])
    # flat cylinder boundary circles are geodesics
    assert np.abs(traj.diagnostics["kg_min"][1:]).max() < 1e-12
