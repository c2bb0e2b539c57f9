import time
import numpy as np
from rhflow.presets import round_cap
from rhflow.variations import (Perturbation, analytic_delta_F,
                               analytic_delta_W, fd_delta)

def order(rep):
    d1 = abs(rep.d_eps - rep.richardson)
    d2 = abs(rep.d_half - rep.richardson)
    return np.log2(d1 / d2) if d2 > 0 else np.inf

nr, amp, r_min = 2049, 0.02, 0.3
t0 = time.time()
st, rep = round_cap(nr=nr, ntheta=32, r_min=r_min, newton=True)
print("newton %.1fs  dev=%.2e" % (time.time() - t0,
      [c.value for c in rep.checks if c.name == "curvature-constant"][0]))

chart = st.chart
r = chart.axis_coords(0)
th = chart.axis_coords(1)
R, TH = np.meshgrid(r, th, indexing="ij")
s = (R - r_min) / (1.0 - r_min)
p = np.cos(np.pi * s)
q = np.cos(2.0 * np.pi * s)
u = np.clip((s - 0.45) / 0.55, 0.0, 1.0)
a = np.sin(np.pi * u) ** 4

perts = [
    ("A v away ", Perturbation(v11=amp * a, v22=0.7 * amp * a,
                               v_admissible=True)),
    ("B h+theta", Perturbation(h=amp * p * np.cos(2 * TH),
                               theta=amp * (p * np.sin(TH))[:, :, None],
                               h_admissible=True, theta_admissible=True)),
    ("C mixed  ", Perturbation(v11=0.5 * amp * a,
                               v12=0.3 * amp * a * np.sin(TH),
                               v22=0.5 * amp * a, h=0.5 * amp * p,
                               theta=0.3 * amp * (q * np.cos(TH))[:, :, None],
                               sigma=2.0 * amp, v_admissible=True,
                               h_admissible=True, theta_admissible=True)),
]
for nm, pert in perts:
    t0 = time.time()
    line = "%s" % nm
    for label, ana_fun, fid in (("F", analytic_delta_F, "F"),
                                ("W", analytic_delta_W, "W_RH")):
        rep_a = ana_fun(st, pert)
        fd = fd_delta(fid, st, pert)
        rel = abs(rep_a.total - fd.richardson) / (1 + abs(rep_a.total))
        line += "  d%s rel=%.3e ord=%.2f" % (label, rel, order(fd))
    print(line + "   (%.1fs)" % (time.time() - t0))
