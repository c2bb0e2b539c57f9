"""First-variation machinery and structural identity residuals.

The verifier's core: analytic first variations of the F and W functionals
against centered finite differences with Richardson extrapolation, plus the
integration-by-parts, Reilly, and scalar-evolution residuals used as
machine-checkable consistency certificates.

Perturbation directions are (v, h, theta, sigma) for (metric, potential,
map, scale).  Admissibility flags declare that a direction has vanishing
normal derivative; the boundary integrals then use the reflection closure,
which makes such derivatives exactly zero, instead of one-sided stencils.
Base states are assumed Neumann-admissible (the hypothesis under which every
identity here is stated); pass state_admissible=False to evaluate boundary
data of a generic state by one-sided extrapolation instead.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from . import calculus as ca
from . import stencils as st
from .chart import FlowState, MetricField, ScalarField
from .errors import (InvalidParam, MetricDegenerate, NonPositiveS,
                     NonPositiveTau, NotSPD)
from .functionals import (FOUR_PI, entropy_E, f_functional, s_field,
                          w_functional)

# ---------------------------------------------------------------------------
# perturbations


@dataclass(frozen=True)
class Perturbation:
    """Variation direction.  Any of v*, h, theta may be None (zero).

    *_admissible means the fields have exactly vanishing normal derivative
    at every boundary edge (e.g. built from cos(k pi s) profiles across
    bounded axes), so the reflection closure evaluates their boundary
    derivatives exactly.
    """
    v11: Optional[np.ndarray] = None
    v12: Optional[np.ndarray] = None
    v22: Optional[np.ndarray] = None
    h: Optional[np.ndarray] = None
    theta: Optional[np.ndarray] = None     # (nx, ny, N)
    sigma: float = 0.0
    v_admissible: bool = False
    h_admissible: bool = False
    theta_admissible: bool = False


def _zeros_like(chart, arr):
    if arr is None:
        return np.zeros(chart.shape)
    return np.asarray(ca._values(arr), float)


def _v_comps(pert, chart):
    return (_zeros_like(chart, pert.v11), _zeros_like(chart, pert.v12),
            _zeros_like(chart, pert.v22))


def _theta_values(pert, chart, n_components):
    if pert.theta is None:
        return np.zeros(chart.shape + (n_components,))
    th = pert.theta
    th = th.values if hasattr(th, "values") else np.asarray(th, float)
    if th.shape != chart.shape + (n_components,):
        raise InvalidParam("theta shape %s does not match the map (%d "
                           "components)" % (th.shape, n_components))
    return th


def perturb(state, pert, eps):
    """State moved by eps along the perturbation direction."""
    chart = state.chart
    v11, v12, v22 = _v_comps(pert, chart)
    try:
        g = MetricField(chart, state.g.g11 + eps * v11,
                        state.g.g12 + eps * v12,
                        state.g.g22 + eps * v22)
    except NotSPD as exc:
        raise MetricDegenerate("perturbation of size %g degenerates the "
                               "metric: %s" % (eps, exc)) from exc
    phi = state.phi
    if pert.theta is not None:
        th = _theta_values(pert, chart, phi.n_components)
        phi = phi.with_values(phi.values + eps * th)
    f = state.f
    if pert.h is not None:
        f = ScalarField(chart, ca._values(f)
                        + eps * _zeros_like(chart, pert.h))
    tau = state.tau
    if pert.sigma != 0.0:
        if tau is None:
            raise InvalidParam("sigma-perturbation needs a state with tau")
        tau = tau + eps * pert.sigma
    return FlowState(state.t, tau, g, phi, f, state.alpha)


@dataclass(frozen=True)
class FDReport:
    eps: float
    d_eps: float            # centered difference at eps
    d_half: float           # centered difference at eps/2
    richardson: float       # (4 d_half - d_eps)/3, error O(eps^4)


FUNCTIONALS = {
    "E": entropy_E,
    "F": f_functional,
    "W_RH": lambda s: w_functional(s, "rh"),
    "W_Perelman": lambda s: w_functional(s, "perelman"),
}


def fd_delta(func, state, pert, eps=1e-3):
    """Centered finite-difference directional derivative at the state.

    func is a callable FlowState -> float or one of the names in
    FUNCTIONALS ("E", "F", "W_RH", "W_Perelman")."""
    if isinstance(func, str):
        try:
            func = FUNCTIONALS[func]
        except KeyError:
            raise InvalidParam("unknown functional id %r (have %s)"
                               % (func, sorted(FUNCTIONALS)))

    def centered(e):
        return (func(perturb(state, pert, e))
                - func(perturb(state, pert, -e))) / (2.0 * e)

    d1 = centered(eps)
    d2 = centered(0.5 * eps)
    return FDReport(eps, d1, d2, (4.0 * d2 - d1) / 3.0)


# ---------------------------------------------------------------------------
# shared ingredients


def _contract_up(g, v, A):
    """v^{ij} A_ij = tr(g^-1 v g^-1 A) for symmetric v, A (component form)."""
    v11, v12, v22 = v
    a11, a12, a22 = A
    B11 = g.inv11 * v11 + g.inv12 * v12
    B12 = g.inv11 * v12 + g.inv12 * v22
    B21 = g.inv12 * v11 + g.inv22 * v12
    B22 = g.inv12 * v12 + g.inv22 * v22
    C11 = B11 * g.inv11 + B12 * g.inv12
    C12 = B11 * g.inv12 + B12 * g.inv22
    C21 = B21 * g.inv11 + B22 * g.inv12
    C22 = B21 * g.inv12 + B22 * g.inv22
    return C11 * a11 + (C12 + C21) * a12 + C22 * a22


def _v_mode(chart, pert, axis):
    if chart.periodic[axis]:
        return "extrapolate"
    return "reflect" if pert.v_admissible else "extrapolate"


@dataclass(frozen=True)
class VariationReport:
    total: float
    parts: Dict[str, float]
    duals: Dict[str, float] = field(default_factory=dict)

    @property
    def boundary_total(self):
        return sum(val for key, val in self.parts.items()
                   if key.startswith("bdry_"))

    @property
    def volume_total(self):
        return self.total - self.boundary_total


class _Ingredients:
    """Everything both delta-formulas need, computed once."""

    def __init__(self, state, pert, state_admissible):
        g = state.g
        chart = state.chart
        self.g = g
        self.chart = chart
        self.alpha = state.alpha
        self.w = np.exp(-ca._values(state.f))
        self.bundle = ca.curvature(g)
        self.H = ca.hessian(g, state.f.values, bc="neumann",
                            gamma=self.bundle.gamma)
        self.lap_f = ca.trace(g, self.H)
        self.fx, self.fy = ca.grad_lower(chart, state.f.values, bc="neumann")
        self.gf2 = (g.inv11 * self.fx ** 2 + 2 * g.inv12 * self.fx * self.fy
                    + g.inv22 * self.fy ** 2)
        e, pull, _ = ca.map_pullback(g, state.phi, state.alpha)
        self.e_den = e.values
        # pointwise (trace-hessian) tension: the flux-form operator embeds
        # the zero-flux closure and would silently absorb B1 at the walls
        tension = np.zeros(chart.shape + (state.phi.n_components,))
        for k in range(state.phi.n_components):
            period = (state.phi.period
                      if state.phi.kinds[k] == "circle" else None)
            Hk = ca.hessian(g, state.phi.component(k), bc="neumann",
                            period=period, gamma=self.bundle.gamma)
            tension[:, :, k] = ca.trace(g, Hk)
        self.tension = tension
        self.A = (self.bundle.ric.t11 + self.H.t11 - pull.t11,
                  self.bundle.ric.t12 + self.H.t12 - pull.t12,
                  self.bundle.ric.t22 + self.H.t22 - pull.t22)
        self.v = _v_comps(pert, chart)
        self.trv = ca.trace(g, self.v)
        hval = _zeros_like(chart, pert.h)
        self.h = hval
        self.meas = 0.5 * self.trv - hval       # variation of e^{-f} dv
        self.theta = _theta_values(pert, chart, state.phi.n_components)
        gfx = g.inv11 * self.fx + g.inv12 * self.fy
        gfy = g.inv12 * self.fx + g.inv22 * self.fy
        self.grad_f_up = (gfx, gfy)
        tdot = np.zeros(chart.shape)
        for k, (ux, uy) in enumerate(ca.map_gradients(state.phi)):
            tdot += self.theta[:, :, k] * (tension[:, :, k]
                                           - (ux * gfx + uy * gfy))
        self.theta_dot = tdot
        self.bg = ca.boundary_geometry(g, gamma=self.bundle.gamma)
        self.state = state
        self.pert = pert
        self.state_admissible = state_admissible


def _boundary_terms(ing):
    """The five boundary integrals of the F-variation, separately:

    map_flux:        -2 alpha  bdry <grad_n phi, theta> e^{-f} dA
    trace_flux:      -bdry d_n(tr_g v) e^{-f} dA   (trace-of-v reading)
    weight_flux:     -bdry (tr_g v - 2h) d_n f e^{-f} dA
    divergence:      +bdry (div v)_j n^j e^{-f} dA
    gradient_weight: +bdry v(grad f, n) e^{-f} dA
    """
    g = ing.g
    chart = ing.chart
    pert = ing.pert
    state = ing.state
    v11, v12, v22 = ing.v

    # derivative fields of v and of the inverse metric
    vmode = [_v_mode(chart, pert, 0), _v_mode(chart, pert, 1)]
    dv = [[st.d1(chart, comp, ax, vmode[ax]) for comp in (v11, v12, v22)]
          for ax in (0, 1)]
    dinv = [[st.d1(chart, comp, ax)
             for comp in (g.inv11, g.inv12, g.inv22)] for ax in (0, 1)]

    out = {"bdry_map_flux": 0.0, "bdry_trace_flux": 0.0,
           "bdry_weight_flux": 0.0, "bdry_divergence": 0.0,
           "bdry_gradient_weight": 0.0}
    gam = ing.bundle.gamma
    for e in ing.bg.edges:
        w = np.exp(-e.restrict(ca._values(state.f)))
        nvec = e.normal

        acc = np.zeros(e.dA.shape)
        for k in range(state.phi.n_components):
            period = (state.phi.period
                      if state.phi.kinds[k] == "circle" else None)
            dn = ca.normal_derivative(g, e, state.phi.component(k),
                                      admissible=ing.state_admissible,
                                      period=period)
            acc += dn * e.restrict(ing.theta[:, :, k])
        out["bdry_map_flux"] += -2.0 * ing.alpha * float(np.sum(acc * w
                                                                * e.dA))

        # product rule: d_n(g^{ab} v_ab) = n^i (d_i g^{ab}) v_ab
        #                                 + n^i g^{ab} (d_i v_ab)
        dtr = np.zeros(e.dA.shape)
        for ax in (0, 1):
            ncomp = nvec[:, ax]
            term = (e.restrict(dinv[ax][0]) * e.restrict(v11)
                    + 2 * e.restrict(dinv[ax][1]) * e.restrict(v12)
                    + e.restrict(dinv[ax][2]) * e.restrict(v22))
            term += (e.restrict(g.inv11) * e.restrict(dv[ax][0])
                     + 2 * e.restrict(g.inv12) * e.restrict(dv[ax][1])
                     + e.restrict(g.inv22) * e.restrict(dv[ax][2]))
            dtr += ncomp * term
        dnf = ca.normal_derivative(g, e, ing.state.f.values,
                                   admissible=ing.state_admissible)
        trv_e = e.restrict(ing.trv)
        h_e = e.restrict(ing.h)
        out["bdry_trace_flux"] += -float(np.sum(dtr * w * e.dA))
        out["bdry_weight_flux"] += -float(np.sum((trv_e - 2 * h_e) * dnf
                                                 * w * e.dA))

        # (div v)_j = g^{ik}(d_i v_kj - Gam^l_ik v_lj - Gam^l_ij v_kl)
        vmat = ((v11, v12), (v12, v22))
        dvmat = [((dv[ax][0], dv[ax][1]), (dv[ax][1], dv[ax][2]))
                 for ax in (0, 1)]
        ginv = ((g.inv11, g.inv12), (g.inv12, g.inv22))
        divv = []
        for j in (0, 1):
            acc_j = np.zeros(chart.shape)
            for i in (0, 1):
                for k in (0, 1):
                    term = dvmat[i][k][j].copy()
                    for l in (0, 1):
                        term = term - gam[l][i][k] * vmat[l][j] \
                                    - gam[l][i][j] * vmat[k][l]
                    acc_j += ginv[i][k] * term
            divv.append(acc_j)
        out["bdry_divergence"] += float(np.sum(
            (nvec[:, 0] * e.restrict(divv[0])
             + nvec[:, 1] * e.restrict(divv[1])) * w * e.dA))

        gfx, gfy = ing.grad_f_up
        vfn = ((e.restrict(v11) * e.restrict(gfx)
                + e.restrict(v12) * e.restrict(gfy)) * nvec[:, 0]
               + (e.restrict(v12) * e.restrict(gfx)
                  + e.restrict(v22) * e.restrict(gfy)) * nvec[:, 1])
        out["bdry_gradient_weight"] += float(np.sum(vfn * w * e.dA))
    return out


def analytic_delta_F(state, pert, state_admissible=True):
    """First variation of the F-functional in direction (v, h, theta).

    parts: map_term             2 alpha int theta.(tension - dphi(grad f))
                                e^{-f} dv
           tensor_term          -int v^{ij}(Ric + hess f - alpha P)_ij
                                e^{-f} dv
           energy_measure_term  -alpha int |grad phi|^2 (tr v/2 - h)
                                e^{-f} dv
           scalar_measure_term  +int (tr v/2 - h)(2 lap f - |grad f|^2 + R)
                                e^{-f} dv
           bdry_*               the five boundary integrals, separately
    duals: the total under the flipped sign of the energy-measure term, and
    under the +2<grad_n phi, theta> (alpha-free) display normalisation of
    the map flux.
    """
    ing = _Ingredients(state, pert, state_admissible)
    g = ing.g
    parts = {
        "map_term": 2.0 * ing.alpha * ca.integrate(g, ing.theta_dot * ing.w),
        "tensor_term": -ca.integrate(g, _contract_up(g, ing.v, ing.A)
                                     * ing.w),
        "energy_measure_term": -ing.alpha * ca.integrate(
            g, ing.e_den * ing.meas * ing.w),
        "scalar_measure_term": ca.integrate(
            g, ing.meas * (2 * ing.lap_f - ing.gf2
                           + ing.bundle.R.values) * ing.w),
    }
    parts.update(_boundary_terms(ing))
    total = sum(parts.values())
    em = parts["energy_measure_term"]
    mf = parts["bdry_map_flux"]
    duals = {
        "energy_measure_sign_flipped": total - 2.0 * em,
        "map_flux_display_form": total - mf - mf / ing.alpha,
    }
    return VariationReport(total, parts, duals)


def analytic_delta_W(state, pert, state_admissible=True, c_constant=3.0):
    """First variation of the tau-calibrated W-functional.

    parts: tensor_term          (4 pi tau)^{-1} int (-tau v^{ij}
                                + sigma g^{ij})(Ric + hess f - alpha P
                                - g/(2 tau))_ij e^{-f} dv
           scalar_measure_term  (4 pi tau)^{-1} int tau (tr v/2 - h
                                - sigma/tau)(2 lap f - |grad f|^2 + S
                                + (f - c)/tau) e^{-f} dv
           map_term             (4 pi)^{-1} 2 alpha int theta.(tension
                                - dphi(grad f)) e^{-f} dv
           bdry_*               the five F-variation boundary integrals
                                scaled by (4 pi)^{-1}
           bdry_scale           -sigma (4 pi tau)^{-1} bdry d_n e^{-f} dA
    duals: the total under the c = 2 reading of the scalar bracket and
    under the +1 coefficient of the scale boundary term.
    """
    if state.tau is None or state.tau <= 0:
        raise NonPositiveTau("delta W needs a state with positive tau, "
                             "got %r" % (state.tau,))
    tau = state.tau
    sigma = pert.sigma
    ing = _Ingredients(state, pert, state_admissible)
    g = ing.g
    fv = ca._values(state.f)

    ct = 0.5 / tau
    Atau = (ing.A[0] - ct * g.g11, ing.A[1] - ct * g.g12,
            ing.A[2] - ct * g.g22)
    tensor_term = (1.0 / (FOUR_PI * tau)) * ca.integrate(
        g, (-tau * _contract_up(g, ing.v, Atau)
            + sigma * ca.trace(g, Atau)) * ing.w)

    S = ing.bundle.R.values - ing.alpha * ing.e_den
    big = (2 * ing.lap_f - ing.gf2 + S + (fv - c_constant) / tau)
    big_c2 = big + 1.0 / tau           # same bracket with c = 2
    w_meas = ing.meas - sigma / tau
    scalar_term = (1.0 / (FOUR_PI * tau)) * ca.integrate(
        g, tau * w_meas * big * ing.w)
    map_term = (1.0 / FOUR_PI) * 2.0 * ing.alpha * ca.integrate(
        g, ing.theta_dot * ing.w)

    scale = 1.0 / FOUR_PI
    bterms = {key: scale * val for key, val in _boundary_terms(ing).items()}

    dn_w = 0.0
    for e in ing.bg.edges:
        dnf = ca.normal_derivative(g, e, fv,
                                   admissible=ing.state_admissible)
        we = np.exp(-e.restrict(fv))
        dn_w += float(np.sum(-we * dnf * e.dA))     # d_n e^{-f}
    bdry_scale = -sigma / (FOUR_PI * tau) * dn_w

    parts = {"tensor_term": tensor_term, "scalar_measure_term": scalar_term,
             "map_term": map_term, "bdry_scale": bdry_scale}
    parts.update(bterms)
    total = sum(parts.values())
    scalar_c2 = (1.0 / (FOUR_PI * tau)) * ca.integrate(
        g, tau * w_meas * big_c2 * ing.w)
    duals = {
        "c_constant_2": total - scalar_term + scalar_c2,
        "scale_boundary_sign_flipped": total - 2.0 * bdry_scale,
    }
    return VariationReport(total, parts, duals)


# ---------------------------------------------------------------------------
# structural residuals


def reilly_residual(g, f, state_admissible=True):
    """Residual of the Reilly-type identity for zero-flux f:

        int [2 (lap f)^2 - R |grad f|^2 - 2 ||hess f||^2] dv
        - 2 bdry Pi(grad_T f, grad_T f) dA

    Returns (residual, parts)."""
    fv = ca._values(f)
    bundle = ca.curvature(g)
    H = ca.hessian(g, fv, bc="neumann", gamma=bundle.gamma)
    lap = ca.trace(g, H)
    gf2 = ca.grad_norm_sq(g, fv, bc="neumann")
    lap_sq = 2.0 * ca.integrate(g, lap * lap)
    hess_sq = 2.0 * ca.integrate(g, ca.tensor_norm_sq(g, H.components()))
    curv = ca.integrate(g, bundle.R.values * gf2)
    fx, fy = ca.grad_lower(g.chart, fv, bc="neumann")
    bdry = 0.0
    for e in ca.boundary_geometry(g, gamma=bundle.gamma).edges:
        t_ax = 1 - e.axis
        dt = e.tangent[:, t_ax] * e.restrict(fx if t_ax == 0 else fy)
        bdry += 2.0 * float(np.sum(e.kg * dt * dt * e.dA))
    parts = {"laplacian_sq": lap_sq, "hessian_sq": hess_sq,
             "curvature": curv, "boundary": bdry}
    return lap_sq - curv - hess_sq - bdry, parts


def ibp_residual(g, f, S):
    """Integration-by-parts defect of the entropy-rate conversion:

        int [S |grad f|^2 - 2 (Sbar - S)^2 + S |grad log S|^2] dv
        - int S ||grad f - grad log S||^2 dv

    The -2(Sbar - S)^2 addend is the grad-f-dot-grad-S cross term after
    moving the derivative off S and substituting lap f = Sbar - S, so the
    residual is O(h^2) when f solves the zero-flux potential equation and
    O(1) when the data does not satisfy it."""
    sv = ca._values(S)
    if sv.min() <= 0:
        i, j = np.unravel_index(np.argmin(sv), sv.shape)
        raise NonPositiveS("S = %g <= 0 at node (%d, %d)"
                           % (sv[i, j], i, j), node=(int(i), int(j)),
                           value=float(sv[i, j]))
    fv = ca._values(f)
    chart = g.chart
    mass = ca.volume_element(g)
    sbar = float(np.sum(mass * sv) / np.sum(mass))
    gf2 = ca.grad_norm_sq(g, fv, bc="neumann")
    logS = np.log(sv)
    lx, ly = ca.grad_lower(chart, logS, bc="neumann")
    gl2 = g.inv11 * lx * lx + 2 * g.inv12 * lx * ly + g.inv22 * ly * ly
    fx, fy = ca.grad_lower(chart, fv, bc="neumann")
    wx, wy = fx - lx, fy - ly
    w2 = g.inv11 * wx * wx + 2 * g.inv12 * wx * wy + g.inv22 * wy * wy
    first = ca.integrate(g, sv * gf2 - 2.0 * (sbar - sv) ** 2 + sv * gl2)
    second = ca.integrate(g, sv * w2)
    return first - second


def s_evolution_residual(traj, indices=None, trim=0.0):
    """Residual of d_t S = lap S + 2 ||Sc||^2 + 2 alpha ||tension||^2 along
    a stored trajectory, with d_t S by centered differences in the snapshot
    times.  Sc is the curvature-minus-pullback tensor Ric - alpha P whose
    trace is S.  Returns (sup_residual, per-snapshot sup array).

    trim: fraction of nodes dropped from each non-periodic side of each axis
    before taking the sup (0 <= trim < 0.5); use for geometries whose walls
    carry an O(1) one-sided-stencil defect."""
    snaps = traj.snapshots
    n = len(snaps) - 1
    if n < 2:
        raise InvalidParam("need at least 3 snapshots")
    if not 0.0 <= trim < 0.5:
        raise InvalidParam("trim must lie in [0, 0.5)")
    if indices is None:
        indices = range(1, n)
    ch = traj.chart
    sl = [slice(None), slice(None)]
    for ax, nn in ((0, ch.nx), (1, ch.ny)):
        if trim > 0.0 and not ch.periodic[ax]:
            k = int(np.ceil(trim * nn))
            sl[ax] = slice(k, nn - k)
    sl = tuple(sl)
    svals = {}

    def S_of(k):
        if k not in svals:
            svals[k] = s_field(snaps[k]).values
        return svals[k]

    out = np.full(n + 1, np.nan)
    for k in indices:
        s = snaps[k]
        g = s.g
        dt = traj.times[k + 1] - traj.times[k - 1]
        dS = (S_of(k + 1) - S_of(k - 1)) / dt
        bundle = ca.curvature(g)
        _, pull, tension = ca.map_pullback(g, s.phi, s.alpha)
        Sc = (bundle.ric.t11 - pull.t11, bundle.ric.t12 - pull.t12,
              bundle.ric.t22 - pull.t22)
        lapS = ca.laplace_beltrami(g, S_of(k), bc="neumann").values
        ten2 = np.sum(tension ** 2, axis=-1)
        rhs = lapS + 2.0 * ca.tensor_norm_sq(g, Sc) + 2.0 * s.alpha * ten2
        out[k] = float(np.abs((dS - rhs)[sl]).max())
    return float(np.nanmax(out)), out
