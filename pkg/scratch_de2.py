import time
import numpy as np
from rhflow import functionals as fn
from rhflow.flows import run_flow
from rhflow.presets import perturbed_cap

for nr in (129, 257):
    st, _ = perturbed_cap(nr=nr, ntheta=32, r_min=0.3, beta=0.02, newton=False)
    t0 = time.time()
    dt = 1e-5
    traj = run_flow(st, T=16 * dt, dt=dt, system="ps")
    E = []
    rate = []
    for s in traj.snapshots:
        E.append(fn.entropy_E(s))
        rate.append(fn.entropy_E_rate(s).total)
    E = np.array(E)
    rate = np.array(rate)
    fd = (E[2:] - E[:-2]) / (2 * dt)
    rel = np.abs(fd - rate[1:-1]) / np.abs(rate[1:-1])
    print("nr=%4d  %.1fs  E0=%.4f  rate0=%.3f" % (nr, time.time() - t0, E[0], rate[0]))
    for k in (1, 4, 8, 12, 15):
        print("   row %2d t=%.1e  fd %.6e  rhs %.6e  rel %.3e"
              % (k, traj.times[k], fd[k - 1], rate[k], rel[k - 1]))
    print("   best interior rel: %.3e at row %d" % (rel[3:].min(), 4 + int(np.argmin(rel[3:]))))
