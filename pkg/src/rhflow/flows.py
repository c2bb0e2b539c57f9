"""Time integration of the coupled metric/map flow systems.

Three systems share one right-hand side builder:

  ps   d_t g = -2(Ric - alpha dphi x dphi), map held harmonic (statically or
       re-projected each snapshot), f not evolved
  q3   ps metric law + d_t phi = tension(phi); f satisfies the backward
       equation d_t f = -lap f - S, solved after the forward sweep
  p2   q3 + d_t tau = -1 and the +1/tau calibration term in the f equation

The reported dt is a snapshot interval, not the integrator step: each report
step runs m uniform classical RK4 substeps with m chosen so the substep CFL
number stays below SAFETY * RK4_EDGE (the measured linear stability edge of
the fastest metric mode, rate 4 max g^xx / hx^2 + 4 max g^yy / hy^2).  The
backward f sweep uses Heun steps with the analogous RK2 edge and linear
interpolation of coefficients between stored snapshots.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from . import calculus as ca
from .chart import FlowState, MetricField, ScalarField
from .elliptic import solve_harmonic_map
from .errors import (CFLViolation, HypothesisViolation, InvalidParam,
                     MetricDegenerate, NotSPD, TauUnderflow)

RK4_EDGE = 2.785        # real-axis stability bound of classical RK4
RK2_EDGE = 2.0          # real-axis stability bound of Heun's method
SAFETY = 0.85

SYSTEMS = ("ps", "q3", "p2")


def _metric(chart, comps, t):
    try:
        return MetricField(chart, *comps)
    except NotSPD as exc:
        raise MetricDegenerate("metric degenerated at t=%.6g: %s"
                               % (t, exc)) from exc


def stiffness_estimate(g):
    """Decay rate of the fastest resolvable diffusive mode."""
    chart = g.chart
    return float(4.0 * g.inv11.max() / chart.hx ** 2
                 + 4.0 * g.inv22.max() / chart.hy ** 2)


def _rhs(chart, comps, phi_values, phi, alpha, evolve_phi, t):
    """(dg11, dg12, dg22, dphi or None) for the shared metric law."""
    g = _metric(chart, comps, t)
    bundle = ca.curvature(g)
    pm = phi.with_values(phi_values)
    _, pull, tension = ca.map_pullback(g, pm, alpha)
    dg11 = -2.0 * (bundle.ric.t11 - pull.t11)
    dg12 = -2.0 * (bundle.ric.t12 - pull.t12)
    dg22 = -2.0 * (bundle.ric.t22 - pull.t22)
    dphi = tension if evolve_phi else None
    return dg11, dg12, dg22, dphi


@dataclass(frozen=True)
class StepReport:
    substeps: int
    cfl: float                  # substep CFL number against the RK4 edge
    stiffness: float


def advance(state, dt, system="ps", max_substeps=1024):
    """One reported step of the forward system; returns (state, StepReport).

    tau decreases at unit rate for p2 and is carried unchanged otherwise.
    f is carried unchanged (its equation runs backward; see
    solve_f_backward).
    """
    if system not in SYSTEMS:
        raise InvalidParam("unknown system %r" % (system,))
    chart = state.chart
    evolve_phi = system in ("q3", "p2")
    lam = stiffness_estimate(state.g)
    m = max(1, math.ceil(dt * lam / (SAFETY * RK4_EDGE)))
    if m > max_substeps:
        raise CFLViolation("dt=%g needs %d substeps (cap %d) at stiffness "
                           "%.3g" % (dt, m, max_substeps, lam))
    h = dt / m
    comps = [np.array(state.g.g11), np.array(state.g.g12),
             np.array(state.g.g22)]
    pv = np.array(state.phi.values)
    t = state.t
    for _ in range(m):
        k1 = _rhs(chart, comps, pv, state.phi, state.alpha, evolve_phi, t)
        y2 = [comps[i] + 0.5 * h * k1[i] for i in range(3)]
        p2v = pv + 0.5 * h * k1[3] if evolve_phi else pv
        k2 = _rhs(chart, y2, p2v, state.phi, state.alpha, evolve_phi,
                  t + 0.5 * h)
        y3 = [comps[i] + 0.5 * h * k2[i] for i in range(3)]
        p3v = pv + 0.5 * h * k2[3] if evolve_phi else pv
        k3 = _rhs(chart, y3, p3v, state.phi, state.alpha, evolve_phi,
                  t + 0.5 * h)
        y4 = [comps[i] + h * k3[i] for i in range(3)]
        p4v = pv + h * k3[3] if evolve_phi else pv
        k4 = _rhs(chart, y4, p4v, state.phi, state.alpha, evolve_phi, t + h)
        for i in range(3):
            comps[i] += (h / 6.0) * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i])
        if evolve_phi:
            pv = pv + (h / 6.0) * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        t += h
    g_new = _metric(chart, comps, t)
    tau = state.tau
    if tau is not None and system == "p2":
        tau = tau - dt
    new = FlowState(state.t + dt, tau, g_new, state.phi.with_values(pv),
                    state.f, state.alpha)
    return new, StepReport(m, dt / m * lam / RK4_EDGE, lam)


def step_pseudo(state, dt, max_substeps=1024):
    """Metric-only pseudo-flow step (map frozen)."""
    return advance(state, dt, "ps", max_substeps)


def step_f_flow(state, dt, max_substeps=1024):
    """Coupled metric + tension-flow step of the F-system."""
    return advance(state, dt, "q3", max_substeps)


def step_w_flow(state, dt, max_substeps=1024):
    """Coupled step of the tau-calibrated W-system (tau drops by dt)."""
    return advance(state, dt, "p2", max_substeps)


@dataclass(frozen=True)
class Trajectory:
    system: str
    dt: float
    times: np.ndarray
    snapshots: List[FlowState]
    diagnostics: Dict[str, np.ndarray]
    phi_mode: str

    @property
    def chart(self):
        return self.snapshots[0].chart

    @property
    def alpha(self):
        return self.snapshots[0].alpha

    def with_f(self, f_fields):
        snaps = [FlowState(s.t, s.tau, s.g, s.phi, f, s.alpha)
                 for s, f in zip(self.snapshots, f_fields)]
        return Trajectory(self.system, self.dt, self.times, snaps,
                          self.diagnostics, self.phi_mode)


def run_flow(state, T, dt, system="ps", phi_mode="hold", max_substeps=1024,
             tau_floor=None, strict=False, tension_tol=1e-8,
             harmonic_tol=1e-11):
    """Integrate to time T, storing a snapshot every dt.

    phi_mode applies to the ps system only: "hold" keeps the initial map,
    "reharmonize" re-projects it onto the discrete-harmonic map after every
    reported step.  strict=True raises HypothesisViolation when the held
    map's tension drifts past tension_tol.
    """
    if system not in SYSTEMS:
        raise InvalidParam("unknown system %r" % (system,))
    if phi_mode not in ("hold", "reharmonize"):
        raise InvalidParam("phi_mode must be hold|reharmonize")
    if dt <= 0 or T <= 0:
        raise InvalidParam("T and dt must be positive")
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * max(1.0, T):
        raise InvalidParam("T must be an integer number of dt intervals")
    if system == "p2":
        if state.tau is None or state.tau <= 0:
            raise InvalidParam("p2 needs a positive initial tau")
        floor = 10.0 * dt if tau_floor is None else tau_floor
        if state.tau - T < floor - 1e-12 * max(1.0, floor):
            raise TauUnderflow("tau(T) = %g would fall below floor %g"
                               % (state.tau - T, floor))

    snaps = [state]
    tension = [ca.tension_sup_norm(state.g, state.phi)]
    cfl = [np.nan]
    substeps = [0]
    stiff = [stiffness_estimate(state.g)]
    kg_min = []
    kg_max = []

    def record_kg(s):
        if s.chart.has_boundary:
            bg = ca.boundary_geometry(s.g)
            kg_min.append(min(float(e.kg.min()) for e in bg.edges))
            kg_max.append(max(float(e.kg.max()) for e in bg.edges))
        else:
            kg_min.append(np.nan)
            kg_max.append(np.nan)

    record_kg(state)
    cur = state
    for k in range(n):
        cur, rep = advance(cur, dt, system, max_substeps)
        if system == "ps" and phi_mode == "reharmonize":
            phi_h, _ = solve_harmonic_map(cur.g, cur.phi, tol=harmonic_tol)
            cur = FlowState(cur.t, cur.tau, cur.g, phi_h, cur.f, cur.alpha)
        ten = ca.tension_sup_norm(cur.g, cur.phi)
        if strict and system == "ps" and ten > tension_tol:
            raise HypothesisViolation("held map tension %.3e exceeds %.1e "
                                      "at t=%.6g" % (ten, tension_tol, cur.t))
        snaps.append(cur)
        tension.append(ten)
        cfl.append(rep.cfl)
        substeps.append(rep.substeps)
        stiff.append(rep.stiffness)
        record_kg(cur)

    times = np.array([s.t for s in snaps])
    diags = {"tension_sup": np.array(tension), "cfl": np.array(cfl),
             "substeps": np.array(substeps, dtype=int),
             "stiffness": np.array(stiff), "kg_min": np.array(kg_min),
             "kg_max": np.array(kg_max)}
    return Trajectory(system, dt, times, snaps, diags, phi_mode)


# ---------------------------------------------------------------------------
# backward potential sweep


def _f_slope(traj, s_arrays, w, f, tau_at, t):
    """df/dt = -lap f - S (+ 1/tau for p2), with g and S linearly
    interpolated between the snapshots bracketing weight w in [0, 1]."""
    k = w[0]
    lam = w[1]
    g0, g1 = traj.snapshots[k].g, traj.snapshots[k + 1].g
    comps = [(1 - lam) * a + lam * b
             for a, b in zip(g0.components(), g1.components())]
    g = MetricField(traj.chart, *comps)
    S = (1 - lam) * s_arrays[k] + lam * s_arrays[k + 1]
    lap = ca.laplace_beltrami(g, f, bc="neumann").values
    out = -lap - S
    if traj.system == "p2":
        out = out + 1.0 / tau_at(t)
    return out, g


def solve_f_backward(traj, f_T, substep_safety=0.5):
    """Integrate the backward potential equation from the final snapshot.

    f_T: ScalarField (or array) at traj.times[-1].  Marches t downward with
    Heun steps, splitting each snapshot interval into enough substeps to keep
    the diffusive CFL number below substep_safety * RK2_EDGE.  Returns
    (trajectory with f attached, list of df/dt arrays at snapshot times).
    """
    snaps = traj.snapshots
    n = len(snaps) - 1
    s_arrays = []
    for s in snaps:
        e, _, _ = ca.map_pullback(s.g, s.phi, s.alpha)
        R = ca.scalar_curvature(s.g).values
        s_arrays.append(R - s.alpha * e.values)

    tau0 = snaps[0].tau

    def tau_at(t):
        if tau0 is None:
            return None
        return tau0 - (t - snaps[0].t) if traj.system == "p2" else tau0

    f = np.array(ca._values(f_T))
    fields = [None] * (n + 1)
    fields[n] = ScalarField(traj.chart, f.copy())
    dtv = traj.dt
    for k in range(n - 1, -1, -1):
        lam = stiffness_estimate(snaps[k].g)
        m = max(1, math.ceil(dtv * lam / (substep_safety * RK2_EDGE)))
        h = dtv / m
        t = traj.times[k + 1]
        for j in range(m):
            w_hi = 1.0 - j * h / dtv
            w_lo = 1.0 - (j + 1) * h / dtv
            k1, _ = _f_slope(traj, s_arrays, (k, w_hi), f, tau_at, t)
            f_pred = f - h * k1                       # t decreases by h
            k2, _ = _f_slope(traj, s_arrays, (k, max(w_lo, 0.0)), f_pred,
                             tau_at, t - h)
            f = f - 0.5 * h * (k1 + k2)
            t -= h
        fields[k] = ScalarField(traj.chart, f.copy())

    slopes = []
    for k in range(n + 1):
        g = snaps[k].g
        lap = ca.laplace_beltrami(g, fields[k].values, bc="neumann").values
        out = -lap - s_arrays[k]
        if traj.system == "p2":
            out = out + 1.0 / tau_at(traj.times[k])
        slopes.append(out)
    return traj.with_f(fields), slopes
