import numpy as np
from rhflow.presets import perturbed_cap
from rhflow import calculus as ca, flows
from rhflow.functionals import s_field
from rhflow.variations import s_evolution_residual


def res_field(traj, k):
    s = traj.snapshots[k]
    dt = traj.times[k + 1] - traj.times[k - 1]
    dS = (s_field(traj.snapshots[k + 1]).values
          - s_field(traj.snapshots[k - 1]).values) / dt
    bundle = ca.curvature(s.g)
    _, pull, tension = ca.map_pullback(s.g, s.phi, s.alpha)
    Sc = (bundle.ric.t11 - pull.t11, bundle.ric.t12 - pull.t12,
          bundle.ric.t22 - pull.t22)
    lapS = ca.laplace_beltrami(s.g, s_field(s).values, bc="neumann").values
    rhs = lapS + 2.0 * ca.tensor_norm_sq(s.g, Sc) \
        + 2.0 * s.alpha * np.sum(tension ** 2, axis=-1)
    return np.abs(dS - rhs).max(axis=1)


for nr in (257, 513):
    st, _ = perturbed_cap(nr=nr, ntheta=8)
    traj = flows.run_flow(st, 0.01, 2.5e-4, system="ps")
    print("nr=%d" % nr)
    for k in (1, 5, 10, 20, 38):
        prof = res_field(traj, k)
        idx = np.linspace(0, nr - 1, 15).astype(int)
        print("  k=%2d t=%.4f  wall0 %.1e wallN %.1e | %s"
              % (k, traj.times[k], prof[0], prof[-1],
                 " ".join("%.0e" % prof[j] for j in idx)))
    for trim in (0.2, 0.25, 0.3, 0.35):
        s_all, _ = s_evolution_residual(traj, trim=trim)
        n = len(traj.snapshots) - 1
        s_late, _ = s_evolution_residual(traj, indices=range(8, n), trim=trim)
        print("  trim %.2f  sup(all) %.3e  sup(k>=8) %.3e"
              % (trim, s_all, s_late))
