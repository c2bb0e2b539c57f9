import numpy as np
from rhflow import calculus as ca
from rhflow import functionals as fn
from rhflow.chart import ScalarField
from rhflow.flows import run_flow, solve_f_backward
from rhflow.presets import flat_cylinder_circle_map

# criterion 6: q3 on cylinder, alpha=1, T=0.5, dt=1e-3-ish rows
alpha = 1.0
st, _ = flat_cylinder_circle_map(nx=64, ny=32, alpha=alpha, tau=None)
traj = run_flow(st, 0.5, 0.01, system="q3")      # 50 rows for the probe
traj, slopes = solve_f_backward(traj, np.zeros(st.chart.shape))

F = np.array([fn.f_functional(s) for s in traj.snapshots])
dF_rhs = np.array([fn.f_rate(s).total for s in traj.snapshots])
t = traj.times
dF_fd = np.full_like(F, np.nan)
dF_fd[1:-1] = (F[2:] - F[:-2]) / (t[2:] - t[:-2])

# closed form: F(t) = -2 pi alpha e^{-f(t)} (1+2 alpha t)^{-1/2} with f(t)
# spatially constant: check F column against it using measured f
fbar = np.array([float(s.f.values.mean()) for s in traj.snapshots])
fspread = max(float(np.ptp(s.f.values)) for s in traj.snapshots)
closed = -2 * np.pi * alpha * np.exp(-fbar) / np.sqrt(1 + 2 * alpha * t)
relF = np.abs(F - closed) / np.abs(closed)
pair = np.abs(dF_fd[1:-1] - dF_rhs[1:-1]) / np.maximum(np.abs(dF_rhs[1:-1]),
                                                       1e-30)
dclosed = np.gradient(closed, t)
print("q3: f spread %.2e  F vs closed rel %.3e" % (fspread, relF.max()))
print("    dF pair rel max %.3e   dF_rhs min %.3e" % (pair.max(),
                                                      dF_rhs.min()))
print("    dF_rhs vs closed-form slope rel %.3e"
      % np.nanmax(np.abs(dF_rhs[1:-1] - dclosed[1:-1])
                  / np.abs(dclosed[1:-1])))

# criterion 7: p2 on cylinder, T=1, tau0 must keep tau-T above floor
st2, _ = flat_cylinder_circle_map(nx=64, ny=32, alpha=1.0, tau=1.25)
traj2 = run_flow(st2, 1.0, 0.02, system="p2")
traj2, slopes2 = solve_f_backward(traj2, np.zeros(st2.chart.shape))
W = np.array([fn.w_functional(s) for s in traj2.snapshots])
dW_rhs = np.array([fn.w_rate(s).total for s in traj2.snapshots])
t2 = traj2.times
dW_fd = np.full_like(W, np.nan)
dW_fd[1:-1] = (W[2:] - W[:-2]) / (t2[2:] - t2[:-2])
mask = (t2 >= 0) & (t2 <= 0.8)
inner = mask.copy(); inner[0] = inner[-1] = False
pair2 = np.abs(dW_fd[inner] - dW_rhs[inner]) / np.maximum(
    np.abs(dW_rhs[inner]), 1e-30)
print("\np2: dW pair rel max on [0,0.8] %.3e" % pair2.max())
print("    W_RH monotone: min diff %.3e" % np.diff(W).min())

# conjugate heat residual per snapshot
eps = []
for k, s in enumerate(traj2.snapshots):
    # dg/dt from the p2 rhs: -2 Ric + 2 alpha dphi x dphi - g/tau
    bundle = ca.curvature(s.g)
    e_den, pull, _ = ca.map_pullback(s.g, s.phi, s.alpha)
    dg11 = -2 * bundle.ric.t11 + 2 * s.alpha * pull.t11 - s.g.g11 / s.tau
    dg12 = -2 * bundle.ric.t12 + 2 * s.alpha * pull.t12 - s.g.g12 / s.tau
    dg22 = -2 * bundle.ric.t22 + 2 * s.alpha * pull.t22 - s.g.g22 / s.tau
    r = fn.conjugate_heat_residual(s, slopes2[k], -1.0, (dg11, dg12, dg22))
    eps.append(np.abs(ca._values(r)).max())
print("    conjheat sup: max %.3e  first %.3e last %.3e"
      % (max(eps), eps[0], eps[-1]))
EOF = None
