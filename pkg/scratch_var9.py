import numpy as np
from rhflow import calculus as ca
from rhflow import functionals as fn
from rhflow.chart import (FlowState, ScalarField, constant_field,
                          constant_map, constant_metric, make_chart)
from rhflow.presets import perturbed_cap, round_cap, flat_square
from rhflow.variations import (Perturbation, analytic_delta_F,
                               analytic_delta_W, fd_delta, ibp_residual,
                               reilly_residual, s_evolution_residual)
from rhflow.elliptic import solve_potential_f
from rhflow.flows import run_flow

# --- ibp on perturbed cap: solved vs broken --------------------------------
for nr in (65, 129):
    stc, _ = perturbed_cap(nr=nr, ntheta=16, r_min=0.3, beta=0.02)
    S = fn.s_field(stc)
    fsol, _ = solve_potential_f(stc.g, S.values)
    r_ok = ibp_residual(stc.g, fsol, S.values)
    R, _ = stc.chart.coords()
    r_bad = ibp_residual(stc.g, R - 0.3, S.values)
    print("ibp pert-cap nr=%4d solved %.3e broken %.3e" % (nr, r_ok, r_bad))

# --- reilly on cap with O(1) admissible f ----------------------------------
for nr in (65, 129):
    stc, _ = round_cap(nr=nr, ntheta=16, r_min=0.3)
    R, _ = stc.chart.coords()
    s = (R - 0.3) / 0.7
    fv = np.cos(np.pi * s)
    res, parts = reilly_residual(stc.g, fv)
    print("reilly cap nr=%4d res %.3e  lap2 %.4f hess2 %.4f curv %.4f bdry %.4f"
          % (nr, res, parts["laplacian_sq"], parts["hessian_sq"],
             parts["curvature"], parts["boundary"]))

# --- s-evolution magnitudes -------------------------------------------------
from rhflow.presets import flat_cylinder_circle_map
st, _ = flat_cylinder_circle_map(nx=64, ny=33)
traj = run_flow(st, 0.02, 2e-3, system="ps")
sup, per = s_evolution_residual(traj)
print("\ns-evo cylinder 64x33 dt=2e-3: sup %.3e" % sup)

stq, _ = flat_square(n=33)
trajq = run_flow(stq, 0.02, 2e-3, system="ps")
supq, _ = s_evolution_residual(trajq)
print("s-evo flat square: sup %.3e" % supq)

stc, _ = round_cap(nr=65, ntheta=16, r_min=0.3)
trajc = run_flow(stc, 0.02, 2e-3, system="ps")
supc, _ = s_evolution_residual(trajc)
print("s-evo round cap (homothety): sup %.3e" % supc)

# --- sigma-only closed form -------------------------------------------------
st0, _ = flat_square(n=33, tau=2.0)
pert = Perturbation(sigma=1.0)
rep = analytic_delta_W(st0, pert)
tau = 2.0
closed = 1.0 * (3.0 - 1.0) / (4 * np.pi * tau ** 2)
print("\nsigma-only: analytic %.15e closed %.15e diff %.2e"
      % (rep.total, closed, abs(rep.total - closed)))
fd = fd_delta("W_Perelman", st0, pert)
print("fd (W_P) %.15e  diff %.2e" % (fd.richardson,
                                     abs(fd.richardson - rep.total)))
rep2 = analytic_delta_W(st0, pert, c_constant=2.0)
print("c=2 total %.15e  (gap to c=3: %.6e, expect sigma/(4 pi tau^2)=%.6e)"
      % (rep2.total, rep.total - rep2.total, 1.0 / (4 * np.pi * tau ** 2)))

# --- pure-h flat square: exact zero both sides ------------------------------
sth, _ = flat_square(n=33)
Y = sth.chart.coords()[1]
ph = Perturbation(h=0.2 * np.cos(np.pi * Y), h_admissible=True)
reph = analytic_delta_F(sth, ph)
fdh = fd_delta("F", sth, ph)
print("\npure-h flat square: analytic %.3e fd %.3e" % (reph.total,
                                                       fdh.richardson))

# --- fd linear probe ---------------------------------------------------------
def probe(state):
    return float(np.sum(ca._values(state.f)))
fdl = fd_delta(probe, sth, ph)
print("linear probe: d_eps %.15e d_half %.15e rich %.15e expect %.15e"
      % (fdl.d_eps, fdl.d_half, fdl.richardson,
         float(np.sum(0.2 * np.cos(np.pi * Y)))))
