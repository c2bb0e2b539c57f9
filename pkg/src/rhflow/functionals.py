"""Entropy functionals, their analytic dissipation rates, and the conjugate
heat residual.

All rates return a breakdown of named addends whose exact sum is the total,
so monotonicity diagnostics can attribute sign to individual terms.  Where
two plausible readings of an addend exist, the primary is used in the total
and the alternative is recorded under report.duals.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from . import calculus as ca
from .chart import ScalarField
from .elliptic import SolveReport, solve_potential_f
from .errors import NonPositiveS, NonPositiveTau

FOUR_PI = 4.0 * np.pi
_FLOOR = 1e-300


@dataclass(frozen=True)
class RateReport:
    total: float
    parts: Dict[str, float]
    duals: Dict[str, float] = field(default_factory=dict)
    f: Optional[ScalarField] = None
    solve: Optional[SolveReport] = None


# ---------------------------------------------------------------------------
# scalar quantity S and the entropy E


def s_field(state):
    """S = R - alpha |grad phi|^2, the scalar driving every functional."""
    R = ca.scalar_curvature(state.g).values
    e, _, _ = ca.map_pullback(state.g, state.phi, state.alpha)
    return ScalarField(state.chart, R - state.alpha * e.values)


def s_mean(g, S):
    mass = ca.volume_element(g)
    return float(np.sum(mass * ca._values(S)) / np.sum(mass))


def _require_positive(S):
    sv = ca._values(S)
    if sv.min() <= 0.0:
        i, j = np.unravel_index(np.argmin(sv), sv.shape)
        raise NonPositiveS("S = %g <= 0 at node (%d, %d)"
                           % (sv[i, j], i, j), node=(int(i), int(j)),
                           value=float(sv[i, j]))
    return sv


def entropy_E(state, S=None):
    """E = int S log S dv - log(Sbar) int S dv, nonnegative by Jensen when
    S > 0 (enforced; NonPositiveS carries the offending node)."""
    S = S if S is not None else s_field(state)
    sv = _require_positive(S)
    g = state.g
    sbar = s_mean(g, sv)
    total_S = ca.integrate(g, sv)
    ent = ca.integrate(g, sv * np.log(np.maximum(sv, _FLOOR)))
    return ent - np.log(max(sbar, _FLOOR)) * total_S


def entropy_E_rate(state, f=None, tol=1e-11):
    """Analytic dE/dt under the pseudo-flow, with f the zero-mean potential
    of laplace f = Sbar - S (solved here unless supplied).

    parts: grad_defect   -int S ||grad f - grad log S||^2 dv
           hessian_defect -2 int ||hess f - (lap f/2) g||^2 dv
           map_defect    -alpha int |dphi(grad f)|^2 dv
           boundary      -2 bdry Pi(grad_T f, grad_T f) dA
    duals: boundary with coefficient 1, the S-gradient display form of the
    first addend, and the |grad phi|^2 |grad f|^2 product form of the third.
    """
    g = state.g
    chart = state.chart
    S = s_field(state)
    sv = _require_positive(S)
    srep = None
    if f is None:
        f, srep = solve_potential_f(g, sv, tol=tol)
    fv = ca._values(f)

    fx, fy = ca.grad_lower(chart, fv, bc="neumann")
    logS = np.log(sv)
    # hypothesis d_n S = 0: same reflection closure as f
    lx, ly = ca.grad_lower(chart, logS, bc="neumann")
    wx, wy = fx - lx, fy - ly
    w2 = (g.inv11 * wx * wx + 2 * g.inv12 * wx * wy + g.inv22 * wy * wy)
    grad_defect = -ca.integrate(g, sv * w2)

    H = ca.hessian(g, fv, bc="neumann")
    lap = ca.trace(g, H)
    T11 = H.t11 - 0.5 * lap * g.g11
    T12 = H.t12 - 0.5 * lap * g.g12
    T22 = H.t22 - 0.5 * lap * g.g22
    hessian_defect = -2.0 * ca.integrate(
        g, ca.tensor_norm_sq(g, (T11, T12, T22)))

    gfx = g.inv11 * fx + g.inv12 * fy
    gfy = g.inv12 * fx + g.inv22 * fy
    push = np.zeros(chart.shape)
    for ux, uy in ca.map_gradients(state.phi):
        push += (ux * gfx + uy * gfy) ** 2
    map_defect = -state.alpha * ca.integrate(g, push)

    bg = ca.boundary_geometry(g)
    bdry = 0.0
    for e in bg.edges:
        t_ax = 1 - e.axis
        dt = e.tangent[:, t_ax] * e.restrict(fx if t_ax == 0 else fy)
        bdry += float(np.sum(e.kg * dt * dt * e.dA))
    boundary = -2.0 * bdry

    parts = {"grad_defect": grad_defect, "hessian_defect": hessian_defect,
             "map_defect": map_defect, "boundary": boundary}
    total = sum(parts.values())

    sx, sy = ca.grad_lower(chart, sv, bc="neumann")
    dxs, dys = sx - lx, sy - ly
    disp2 = (g.inv11 * dxs * dxs + 2 * g.inv12 * dxs * dys
             + g.inv22 * dys * dys)
    e_den, _, _ = ca.map_pullback(g, state.phi, state.alpha)
    gf2 = g.inv11 * fx * fx + 2 * g.inv12 * fx * fy + g.inv22 * fy * fy
    duals = {
        "boundary_coefficient_1": total + bdry,
        "grad_defect_S_form": -ca.integrate(g, sv * disp2),
        "map_defect_product_form":
            -state.alpha * ca.integrate(g, e_den.values * gf2),
    }
    return RateReport(total, parts, duals, f, srep)


# ---------------------------------------------------------------------------
# F functional


def _weight(state):
    return np.exp(-ca._values(state.f))


def f_functional(state):
    """F = int (S + |grad f|^2) e^{-f} dv."""
    g = state.g
    sv = s_field(state).values
    gf2 = ca.grad_norm_sq(g, state.f.values, bc="neumann")
    return ca.integrate(g, (sv + gf2) * _weight(state))


def _dissipation_tensors(state):
    """Shared integrands: Ric + hess f - alpha P and the map defect."""
    g = state.g
    bundle = ca.curvature(g)
    H = ca.hessian(g, state.f.values, bc="neumann", gamma=bundle.gamma)
    _, pull, tension = ca.map_pullback(g, state.phi, state.alpha)
    M11 = bundle.ric.t11 + H.t11 - pull.t11
    M12 = bundle.ric.t12 + H.t12 - pull.t12
    M22 = bundle.ric.t22 + H.t22 - pull.t22
    fx, fy = ca.grad_lower(state.chart, state.f.values, bc="neumann")
    gfx = g.inv11 * fx + g.inv12 * fy
    gfy = g.inv12 * fx + g.inv22 * fy
    map_def = np.zeros(state.chart.shape)
    for k, (ux, uy) in enumerate(ca.map_gradients(state.phi)):
        map_def += (tension[:, :, k] - (ux * gfx + uy * gfy)) ** 2
    return bundle, (M11, M12, M22), map_def, (fx, fy)


def _boundary_rate(state, bundle, grads, kg_prime, weight_edge):
    """bdry (k_g R - 2 k_g') w dA + 2 bdry k_g |grad_T f|^2 w dA, split."""
    g = state.g
    fx, fy = grads
    bg = ca.boundary_geometry(g, gamma=bundle.gamma)
    static = 0.0
    tangential = 0.0
    for idx, e in enumerate(bg.edges):
        w = weight_edge(e)
        kgp = np.zeros_like(e.kg) if kg_prime is None else kg_prime[idx]
        Re = e.restrict(bundle.R.values)
        static += float(np.sum((e.kg * Re - 2.0 * kgp) * w * e.dA))
        t_ax = 1 - e.axis
        dt = e.tangent[:, t_ax] * e.restrict(fx if t_ax == 0 else fy)
        tangential += 2.0 * float(np.sum(e.kg * dt * dt * w * e.dA))
    return static, tangential


def f_rate(state, kg_prime=None):
    """Analytic dF/dt along the coupled backward-potential flow.

    parts: metric_defect  2 int ||Ric + hess f - alpha P||^2 e^{-f} dv
           map_defect     2 alpha int |tension - dphi(grad f)|^2 e^{-f} dv
           boundary_static    bdry (k_g R - 2 k_g') e^{-f} dA
           boundary_tangent   2 bdry k_g |grad_T f|^2 e^{-f} dA
    kg_prime: per-edge arrays of d(k_g)/dt, zeros when omitted.
    """
    g = state.g
    bundle, M, map_def, grads = _dissipation_tensors(state)
    w = _weight(state)
    metric_defect = 2.0 * ca.integrate(g, ca.tensor_norm_sq(g, M) * w)
    map_defect = 2.0 * state.alpha * ca.integrate(g, map_def * w)
    wf = ca._values(state.f)
    static, tangential = _boundary_rate(
        state, bundle, grads, kg_prime,
        lambda e: np.exp(-e.restrict(wf)))
    parts = {"metric_defect": metric_defect, "map_defect": map_defect,
             "boundary_static": static, "boundary_tangent": tangential}
    return RateReport(sum(parts.values()), parts)


# ---------------------------------------------------------------------------
# W functionals


def _check_tau(state):
    if state.tau is None or not state.tau > 0.0:
        raise NonPositiveTau("W-functional needs tau > 0, got %r"
                             % (state.tau,))
    return state.tau


def heat_kernel_weight(state):
    """u = (4 pi tau)^{-1} e^{-f}, the conjugate-heat density."""
    tau = _check_tau(state)
    return _weight(state) / (FOUR_PI * tau)


def w_functional(state, variant="rh"):
    """W = int [tau (|grad f|^2 + R_like) + f - 2] u dv with
    u = (4 pi tau)^{-1} e^{-f}; variant "rh" uses R_like = S = R - alpha
    |grad phi|^2, variant "perelman" uses R_like = R (no map coupling)."""
    tau = _check_tau(state)
    g = state.g
    R = ca.scalar_curvature(g).values
    if variant == "rh":
        e, _, _ = ca.map_pullback(g, state.phi, state.alpha)
        Rlike = R - state.alpha * e.values
    elif variant == "perelman":
        Rlike = R
    else:
        raise ValueError("variant must be 'rh' or 'perelman'")
    fv = ca._values(state.f)
    gf2 = ca.grad_norm_sq(g, fv, bc="neumann")
    u = heat_kernel_weight(state)
    return ca.integrate(g, (tau * (gf2 + Rlike) + fv - 2.0) * u)


def w_rate(state, kg_prime=None):
    """Analytic dW/dt along the tau-calibrated coupled flow.

    parts: metric_defect  2 tau int ||Ric + hess f - alpha P - g/(2 tau)||^2 u dv
           map_defect     2 alpha tau int |tension - dphi(grad f)|^2 u dv
           boundary_static    tau bdry (k_g R - 2 k_g') u dA
           boundary_tangent   2 tau bdry k_g |grad_T f|^2 u dA
    """
    tau = _check_tau(state)
    g = state.g
    bundle, (M11, M12, M22), map_def, grads = _dissipation_tensors(state)
    c = 0.5 / tau
    N = (M11 - c * g.g11, M12 - c * g.g12, M22 - c * g.g22)
    u = heat_kernel_weight(state)
    metric_defect = 2.0 * tau * ca.integrate(g, ca.tensor_norm_sq(g, N) * u)
    map_defect = 2.0 * state.alpha * tau * ca.integrate(g, map_def * u)
    wf = ca._values(state.f)
    static, tangential = _boundary_rate(
        state, bundle, grads, kg_prime,
        lambda e: tau * np.exp(-e.restrict(wf)) / (FOUR_PI * tau))
    parts = {"metric_defect": metric_defect, "map_defect": map_defect,
             "boundary_static": static, "boundary_tangent": tangential}
    return RateReport(sum(parts.values()), parts)


# ---------------------------------------------------------------------------
# conjugate heat residual


def conjugate_heat_residual(state, df_dt, dtau_dt, dg_dt):
    """Residual of the conjugate heat equation for u = (4 pi tau)^{-1} e^{-f}:

        u (df/dt + (dtau/dt)/tau) - lap u - (1/2) tr_g(dg/dt) u

    (the first group is -du/dt expanded through f and tau).  Zero along exact
    solutions of the tau-calibrated coupled flow.
    """
    tau = _check_tau(state)
    g = state.g
    u = heat_kernel_weight(state)
    lap_u = ca.laplace_beltrami(g, u, bc="neumann").values
    trv = ca.trace(g, dg_dt)
    res = (u * (ca._values(df_dt) + float(dtau_dt) / tau)
           - lap_u - 0.5 * trv * u)
    return ScalarField(state.chart, res)
