import numpy as np
from rhflow.presets import perturbed_cap
from rhflow import calculus as ca, flows
from rhflow.functionals import s_field
from rhflow.variations import s_evolution_residual

for nr in (257, 513):
    st, _ = perturbed_cap(nr=nr, ntheta=8)
    traj = flows.run_flow(st, 0.01, 2.5e-4, system="ps")
    sup, per = s_evolution_residual(traj, trim=0.2)
    print("nr=%d  trimmed sup %.4e  per-snapshot:" % (nr, sup))
    print("   ", " ".join("%.1e" % v for v in per[1:-1:5]))
    # radial structure at the worst snapshot
    k = int(np.nanargmax(per))
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
    res = np.abs(dS - rhs).max(axis=1)
    lo = int(np.ceil(0.2 * nr))
    prof = res[lo:nr - lo]
    jm = int(prof.argmax()) + lo
    print("    worst k=%d t=%.4f  interior argmax j=%d/%d (r-frac %.2f)"
          % (k, traj.times[k], jm, nr, jm / (nr - 1.0)))
    idx = np.linspace(lo, nr - lo - 1, 13).astype(int)
    print("    radial profile:", " ".join("%.1e" % res[j] for j in idx))
