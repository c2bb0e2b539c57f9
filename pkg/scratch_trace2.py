import numpy as np
from rhflow import calculus as ca
from rhflow import functionals as fn
from rhflow.flows import run_flow, solve_f_backward
from rhflow.presets import flat_cylinder_circle_map, perturbed_cap, round_cap

# conjheat with the correct p2 slope dg/dt = -2 Ric + 2 alpha dphi dphi
st2, _ = flat_cylinder_circle_map(nx=64, ny=32, alpha=1.0, tau=1.25)
traj2 = run_flow(st2, 1.0, 0.02, system="p2")
traj2, slopes2 = solve_f_backward(traj2, np.zeros(st2.chart.shape))
eps = []
for k, s in enumerate(traj2.snapshots):
    bundle = ca.curvature(s.g)
    e_den, pull, _ = ca.map_pullback(s.g, s.phi, s.alpha)
    dg = (-2 * bundle.ric.t11 + 2 * s.alpha * pull.t11,
          -2 * bundle.ric.t12 + 2 * s.alpha * pull.t12,
          -2 * bundle.ric.t22 + 2 * s.alpha * pull.t22)
    r = fn.conjugate_heat_residual(s, slopes2[k], -1.0, dg)
    eps.append(np.abs(ca._values(r)).max())
print("p2 cylinder conjheat sup: %.3e" % max(eps))

# perturbed-cap dE pair under ps (criterion 8), seed base profile
for nr in (129, 257):
    st, _ = perturbed_cap(nr=nr, ntheta=32, r_min=0.3, beta=0.02,
                          newton=False)
    traj = run_flow(st, 0.01, 1e-3, system="ps")
    E = np.array([fn.entropy_E(s) for s in traj.snapshots])
    reps = [fn.entropy_E_rate(s) for s in traj.snapshots]
    dE_rhs = np.array([r.total for r in reps])
    t = traj.times
    dE_fd = np.full_like(E, np.nan)
    dE_fd[1:-1] = (E[2:] - E[:-2]) / (t[2:] - t[:-2])
    rel = np.abs(dE_fd[1:-1] - dE_rhs[1:-1]) / np.abs(dE_rhs[1:-1])
    vol_parts_max = max(max(r.parts["grad_defect"], r.parts["hessian_defect"],
                            r.parts["map_defect"]) for r in reps)
    print("pert-cap nr=%4d: E0 %.4e  dE pair rel %.3e  dE_rhs sign %s  "
          "max volume part %.2e"
          % (nr, E[0], np.nanmax(rel),
             "neg" if dE_rhs[1:-1].max() < 0 else "MIXED", vol_parts_max))

# cap s-evolution: interior trim, short run, seed profile
for nr in (65, 129, 257):
    st, _ = round_cap(nr=nr, ntheta=16, r_min=0.3, newton=False)
    traj = run_flow(st, 0.002, 2.5e-4, system="ps")
    S_list = [fn.s_field(s).values for s in traj.snapshots]
    sups, sups_trim = [], []
    frac = 0.2
    m = max(3, int(frac * nr))
    for k in range(1, len(S_list) - 1):
        s = traj.snapshots[k]
        dsdt = (S_list[k + 1] - S_list[k - 1]) / (traj.times[k + 1]
                                                  - traj.times[k - 1])
        lap = ca.laplace_beltrami(s.g, S_list[k], bc="neumann").values
        bundle = ca.curvature(s.g)
        sc2 = ca.tensor_norm_sq(s.g, (bundle.ric.t11, bundle.ric.t12,
                                      bundle.ric.t22))
        res = np.abs(dsdt - lap - 2 * sc2)
        sups.append(res.max())
        sups_trim.append(res[m:-m, :].max())
    print("cap s-evo nr=%4d: full %.3e  interior(trim %d) %.3e"
          % (nr, max(sups), m, max(sups_trim)))
