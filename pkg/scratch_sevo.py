import numpy as np
from rhflow import calculus as ca
from rhflow import functionals as fn
from rhflow.flows import run_flow
from rhflow.presets import round_cap
from rhflow.variations import s_evolution_residual

stc, _ = round_cap(nr=65, ntheta=16, r_min=0.3)
traj = run_flow(stc, 0.02, 2e-3, system="ps")
print("substeps:", traj.diagnostics["substeps"])
print("cfl:", np.round(traj.diagnostics["cfl"], 3))

sup, per = s_evolution_residual(traj)
print("per-snapshot sup:", ["%.2e" % v for v in per])

# dissect snapshot k=5
k = 5
s_m = fn.s_field(traj.snapshots[k - 1]).values
s_p = fn.s_field(traj.snapshots[k + 1]).values
s_0 = fn.s_field(traj.snapshots[k]).values
dt = traj.times[k + 1] - traj.times[k]
dsdt = (s_p - s_m) / (2 * dt)
st = traj.snapshots[k]
lap = ca.laplace_beltrami(st.g, s_0, bc="neumann").values
bundle = ca.curvature(st.g)
sc2 = ca.tensor_norm_sq(st.g, (bundle.ric.t11, bundle.ric.t12,
                               bundle.ric.t22))
rhs = lap + 2 * sc2
res = np.abs(dsdt - rhs)
i, j = np.unravel_index(res.argmax(), res.shape)
print("argmax at node (%d,%d) of %s  res=%.3e" % (i, j, res.shape, res[i, j]))
print("dsdt there %.4e  lap %.4e  sc2 %.4e" % (dsdt[i, j], lap[i, j],
                                               sc2[i, j]))
print("row profile res[:,%d][:8] =" % j, ["%.1e" % v for v in res[:8, j]])
print("row profile res[:,%d][-8:] =" % j, ["%.1e" % v for v in res[-8:, j]])
print("interior sup (2 rows trimmed):", np.abs(res[2:-2, :]).max())
print("S row near inner edge t=k:", ["%.6f" % v for v in s_0[:6, j]])
print("S row near inner edge t=k+1:", ["%.6f" % v for v in s_p[:6, j]])
