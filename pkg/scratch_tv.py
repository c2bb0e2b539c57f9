import numpy as np
from rhflow import calculus as ca
from rhflow import functionals as fn
from rhflow.chart import (FlowState, MetricField, constant_field,
                          constant_map, identity_metric, make_chart)
from rhflow.elliptic import solve_potential_f
from rhflow.presets import flat_square, round_cap, perturbed_cap
from rhflow.flows import run_flow
from rhflow.variations import (Perturbation, analytic_delta_F,
                               analytic_delta_W, fd_delta, perturb,
                               reilly_residual, s_evolution_residual)

print("== (a) sigma-only flat square, tau=2 ==")
st, _ = flat_square(n=33)
st = FlowState(0.0, 2.0, st.g, st.phi, st.f, st.alpha)
rep = analytic_delta_W(st, Perturbation(sigma=1.0))
closed = 1.0 / (2.0 * np.pi * st.tau ** 2)
fd = fd_delta("W_RH", st, Perturbation(sigma=1.0), eps=1e-3)
print("total %.17g  closed %.17g  diff %.3e" % (rep.total, closed,
                                                abs(rep.total - closed)))
print("fd rich %.17g  diff %.3e" % (fd.richardson, abs(fd.richardson - closed)))
c2gap = abs(rep.duals["c_constant_2"] - rep.total)
print("c2 dual gap %.17g  expected sigma/(4 pi tau^2) %.17g"
      % (c2gap, 1.0 / (fn.FOUR_PI * st.tau ** 2)))

print("== (b) cylinder exact-zero boundary + energy-measure dual ==")
ch = make_chart("cylinder", 48, 33, Ly=1.0)
X, Y = ch.coords()
g = MetricField(ch, 1.0 + 0.3 * np.sin(X), np.zeros(ch.shape),
                1.0 + 0.2 * np.cos(X))
phi = constant_map(ch, [0.0], kinds=("circle",)).with_values(X[:, :, None])
f = ca.ScalarField(ch, 0.1 * np.cos(np.pi * Y))
stc = FlowState(0.0, 1.5, g, phi, f, 1.3)
p = np.cos(np.pi * Y)
pert = Perturbation(v11=0.04 * p * (1 + 0.5 * np.sin(X)), v22=0.03 * p,
                    h=0.05 * p * np.cos(X), v_admissible=True,
                    h_admissible=True)
repF = analytic_delta_F(stc, pert)
for k, v in repF.parts.items():
    if k.startswith("bdry_"):
        print("  %-22s %r  zero=%s" % (k, v, v == 0.0))
fdF = fd_delta("F", stc, pert, eps=1e-3)
gap = abs(fdF.richardson - repF.total)
dual = repF.duals["energy_measure_sign_flipped"]
print("fd %.10e total %.10e gap %.3e" % (fdF.richardson, repF.total, gap))
print("dual(em flipped) %.10e  |fd-dual| %.3e  em %.3e"
      % (dual, abs(fdF.richardson - dual), repF.parts["energy_measure_term"]))
order = np.log2(abs(fdF.d_eps - fdF.richardson)
                / abs(fdF.d_half - fdF.richardson))
print("eps-order %.2f" % order)

print("== (c) monotonicity cross-check ==")
ch3 = make_chart("cylinder", 48, 33, Ly=1.0)
X3, Y3 = ch3.coords()
g3 = MetricField(ch3, np.full(ch3.shape, 1.44), np.zeros(ch3.shape),
                 np.full(ch3.shape, 1.44))
phi3 = constant_map(ch3, [0.0], kinds=("circle",)).with_values(X3[:, :, None])
f3 = ca.ScalarField(ch3, 0.1 * np.cos(np.pi * Y3))
st3 = FlowState(0.0, None, g3, phi3, f3, 1.3)
bundle = ca.curvature(g3)
H = ca.hessian(g3, f3.values, bc="neumann", gamma=bundle.gamma)
_, pull, _ = ca.map_pullback(g3, phi3, st3.alpha)
A11 = bundle.ric.t11 + H.t11 - pull.t11
A12 = bundle.ric.t12 + H.t12 - pull.t12
A22 = bundle.ric.t22 + H.t22 - pull.t22
lapf = ca.trace(g3, H)
S3 = fn.s_field(st3).values
pert3 = Perturbation(v11=-2 * A11, v12=-2 * A12, v22=-2 * A22,
                     h=-lapf - S3, v_admissible=True, h_admissible=True)
dF = analytic_delta_F(st3, pert3)
fr = fn.f_rate(st3)
print("delta_F total %.17g  f_rate total %.17g  diff %.3e"
      % (dF.total, fr.total, abs(dF.total - fr.total)))

print("== (d) Reilly square + cap ==")
for n in (65, 129):
    sq, _ = flat_square(n=n)
    fsq = np.cos(np.pi * sq.chart.coords()[0]) * np.cos(np.pi * sq.chart.coords()[1])
    res, parts = reilly_residual(sq.g, fsq)
    print("  square n=%4d  lap_sq %.8f hess_sq %.8f resid %.4e (2pi^4=%.6f)"
          % (n, parts["laplacian_sq"], parts["hessian_sq"], res,
             2 * np.pi ** 4))
for nr in (65, 129):
    cp, _ = round_cap(nr=nr, ntheta=32, r_min=0.3, newton=False)
    scoord = (cp.chart.coords()[0] - 0.3) / 0.7
    fcap = np.cos(np.pi * scoord)
    res, parts = reilly_residual(cp.g, fcap)
    print("  cap nr=%4d  resid %.4e  parts scale %.1f"
          % (nr, res, max(abs(v) for v in parts.values())))

print("== (f) s-evolution ==")
from rhflow.presets import flat_cylinder_circle_map
cyl, _ = flat_cylinder_circle_map()
traj = run_flow(cyl, T=0.02, dt=2e-3, system="ps")
sup, _ = s_evolution_residual(traj)
print("  cylinder 64x32 sup %.4e" % sup)
sq, _ = flat_square(n=33)
trj2 = run_flow(sq, T=0.02, dt=2e-3, system="ps")
sup2, _ = s_evolution_residual(trj2)
print("  flat square sup %r" % sup2)

print("== (g) delta-W alpha-independence, phi const ==")
cp1, _ = round_cap(nr=65, ntheta=16, r_min=0.3, newton=False, alpha=1.0)
cp2 = FlowState(0.0, cp1.tau, cp1.g, cp1.phi, cp1.f, 2.5)
s65 = (cp1.chart.coords()[0] - 0.3) / 0.7
pg = Perturbation(v11=0.02 * np.sin(np.pi * np.clip((s65 - 0.45) / 0.55, 0, 1)) ** 4,
                  h=0.01 * np.cos(np.pi * s65), v_admissible=True,
                  h_admissible=True, sigma=0.5)
w1 = analytic_delta_W(cp1, pg)
w2 = analytic_delta_W(cp2, pg)
print("  totals %.17g vs %.17g equal=%s  map_term %r %r"
      % (w1.total, w2.total, w1.total == w2.total,
         w1.parts["map_term"], w2.parts["map_term"]))

print("== (i) map-flux dual adjudication (phi=y line map) ==")
chy = make_chart("cylinder", 48, 65, Ly=1.0)
Xy, Yy = chy.coords()
phiy = constant_map(chy, [0.0], kinds=("linear",)).with_values(Yy[:, :, None])
sty = FlowState(0.0, 1.0, identity_metric(chy), phiy,
                constant_field(chy, 0.0), 1.3)
perty = Perturbation(theta=(0.05 * (1.0 + np.cos(np.pi * Yy)))[:, :, None],
                     theta_admissible=True)
repy = analytic_delta_F(sty, perty, state_admissible=False)
fdy = fd_delta("F", sty, perty, eps=1e-3)
dualy = repy.duals["map_flux_display_form"]
print("  fd %.10e total %.10e gap %.3e" %
      (fdy.richardson, repy.total, abs(fdy.richardson - repy.total)))
print("  dual %.10e |fd-dual| %.3e  mf %.4e"
      % (dualy, abs(fdy.richardson - dualy), repy.parts["bdry_map_flux"]))

print("== (j) scale-boundary dual adjudication (f=0.2y) ==")
fj = ca.ScalarField(chy, 0.2 * Yy)
stj = FlowState(0.0, 1.0, identity_metric(chy), constant_map(chy, [0.0]),
                fj, 1.0)
pj = Perturbation(sigma=1.0)
repj = analytic_delta_W(stj, pj, state_admissible=False)
fdj = fd_delta("W_RH", stj, pj, eps=1e-3)
dualj = repj.duals["scale_boundary_sign_flipped"]
print("  fd %.10e total %.10e gap %.3e" %
      (fdj.richardson, repj.total, abs(fdj.richardson - repj.total)))
print("  dual %.10e |fd-dual| %.3e  bdry_scale %.4e"
      % (dualj, abs(fdj.richardson - dualj), repj.parts["bdry_scale"]))
