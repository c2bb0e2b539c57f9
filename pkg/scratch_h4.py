import numpy as np
from rhflow.presets import round_cap
from rhflow import calculus as ca, flows
from rhflow.functionals import s_field, s_mean

st, _ = round_cap()

for safety in (0.85, 0.6, 0.4, 0.2):
    flows.SAFETY = safety
    traj = flows.run_flow(st, 0.01, 2.5e-4, system="ps")
    sT = traj.snapshots[-1]
    RT = ca.scalar_curvature(sT.g).values
    s0 = s_mean(st.g, s_field(st).values)
    sb = s_mean(sT.g, s_field(sT).values)
    closed = s0 / (1.0 - s0 * 0.01)
    print("safety %.2f  substeps/step %d  R(T) spread %.3e  Sbar rel %.3e"
          % (safety, traj.diagnostics["substeps"].max(),
         RT.max() - RT.min(), abs(sb - closed) / closed))
