import numpy as np
from rhflow.presets import round_cap, perturbed_cap
from rhflow import calculus as ca, flows
from rhflow.functionals import s_field, s_mean
from rhflow import variations as va

st, rep = round_cap()
for line in rep.lines():
    print(line)
R = ca.scalar_curvature(st.g).values
print("R-2: max|.| %.3e  mean %.3e  std %.3e"
      % (np.abs(R - 2).max(), (R - 2).mean(), (R - 2).std()))

traj = flows.run_flow(st, 0.01, 2.5e-4, system="ps")
s0 = s_mean(st.g, s_field(st).values)
print("Sbar0 - 2 = %.3e" % (s0 - 2.0))
for k in (0, 10, 20, 40):
    s = traj.snapshots[k]
    sb = s_mean(s.g, s_field(s).values)
    t = traj.times[k]
    closed = s0 / (1.0 - s0 * t)
    # pointwise-homothety alternative: is g(t) parallel to g0?
    ratio = s.g.g11 / st.g.g11
    dev = float(ratio.max() - ratio.min())
    print("k=%2d t=%.4f  Sbar %.10f  closed %.10f  rel %.3e  conf-dev %.3e"
          % (k, t, sb, closed, abs(sb - closed) / closed, dev))

# where does Sbar error come from: R field spread at t=T
sT = traj.snapshots[-1]
RT = ca.scalar_curvature(sT.g).values
print("R(T): mean %.6f  spread %.3e" % (RT.mean(), RT.max() - RT.min()))
print("R0 spread %.3e" % (R.max() - R.min()))
