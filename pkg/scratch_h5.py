import numpy as np
from rhflow.presets import round_cap
from rhflow import calculus as ca, flows

for nr in (129, 257, 513):
    st, _ = round_cap(nr=nr, ntheta=8)
    traj = flows.run_flow(st, 0.005, 2.5e-4, system="ps")
    print("nr=%d  seed sup|R-2| %.3e" % (nr,
          np.abs(ca.scalar_curvature(st.g).values - 2).max()))
    for k in (2, 5, 10, 20):
        sn = traj.snapshots[k]
        R = ca.scalar_curvature(sn.g).values[:, 0]
        dev = R - R.mean()
        j = int(np.abs(dev).argmax())
        print("  t=%.4f  spread %.3e  argmax j=%d/%d  edge5 %.2e  "
              "mid %.2e" % (traj.times[k], dev.max() - dev.min(), j, nr,
                            np.abs(dev[:5]).max(), np.abs(dev[nr//2]).max()))
