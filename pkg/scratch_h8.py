import numpy as np
from rhflow.presets import perturbed_cap
from rhflow import flows
from rhflow.variations import s_evolution_residual

st, _ = perturbed_cap(nr=257, ntheta=8)
for dt in (1e-3, 2.5e-4, 6.25e-5):
    traj = flows.run_flow(st, 0.01, dt, system="ps")
    n = len(traj.snapshots) - 1
    sup_all, per = s_evolution_residual(traj, trim=0.3)
    # residual near t ~ 2.5e-3 and ~ 7.5e-3 for dt comparison
    k1 = int(round(2.5e-3 / dt))
    k2 = int(round(7.5e-3 / dt))
    print("dt=%.2e  sup(trim .3) %.3e  res(t=2.5e-3) %.3e  res(t=7.5e-3) %.3e"
          % (dt, sup_all, per[k1], per[k2]))

stn, _ = perturbed_cap(nr=257, ntheta=8, newton=True)
traj = flows.run_flow(stn, 0.01, 2.5e-4, system="ps")
sup_all, per = s_evolution_residual(traj, trim=0.3)
sup_02, _ = s_evolution_residual(traj, trim=0.2)
print("newton base: sup(trim .3) %.3e  sup(trim .2) %.3e  res(t=2.5e-3) %.3e"
      % (sup_all, sup_02, per[10]))
