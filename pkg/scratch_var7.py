import time
import numpy as np
from rhflow.presets import round_cap
from rhflow.variations import (Perturbation, analytic_delta_F,
                               analytic_delta_W, fd_delta)

def order(rep):
    d1 = abs(rep.d_eps - rep.richardson)
    d2 = abs(rep.d_half - rep.richardson)
    return np.log2(d1 / d2) if d2 > 0 else np.inf

def caps_perts(chart, r_min, amp):
    r = chart.axis_coords(0)
    th = chart.axis_coords(1)
    R, TH = np.meshgrid(r, th, indexing="ij")
    s = (R - r_min) / (1.0 - r_min)
    p = np.cos(np.pi * s)                    # p' = 0 at both walls
    q = np.cos(2.0 * np.pi * s)              # q' = 0 at both walls
    u = np.clip((s - 0.45) / 0.55, 0.0, 1.0)
    a = np.sin(np.pi * u) ** 4               # support away from inner wall
    pertA = Perturbation(v11=amp * p, v22=0.7 * amp * p, v_admissible=True)
    pertAs = Perturbation(v11=amp * a, v22=0.7 * amp * a, v_admissible=True)
    pertB = Perturbation(h=amp * p * np.cos(2 * TH),
                         theta=amp * (p * np.sin(TH))[:, :, None],
                         h_admissible=True, theta_admissible=True)
    pertC = Perturbation(v11=0.5 * amp * q, v12=0.3 * amp * q * np.sin(TH),
                         v22=0.5 * amp * q, h=0.5 * amp * p,
                         theta=0.3 * amp * (q * np.cos(TH))[:, :, None],
                         sigma=2.0 * amp, v_admissible=True,
                         h_admissible=True, theta_admissible=True)
    pertCs = Perturbation(v11=0.5 * amp * a, v12=0.3 * amp * a * np.sin(TH),
                          v22=0.5 * amp * a, h=0.5 * amp * p,
                          theta=0.3 * amp * (q * np.cos(TH))[:, :, None],
                          sigma=2.0 * amp, v_admissible=True,
                          h_admissible=True, theta_admissible=True)
    return [("A v cos", pertA), ("As v away", pertAs), ("B h+th", pertB),
            ("C mix cos", pertC), ("Cs mix away", pertCs)]

for nr in (257, 513, 1025):
    t0 = time.time()
    st, rep = round_cap(nr=nr, ntheta=32, r_min=0.3, newton=True)
    built = time.time() - t0
    dev = [c.value for c in rep.checks if c.name == "curvature-constant"][0]
    print("== nr=%d  (newton %.1fs, sup|R-2|=%.2e)" % (nr, built, dev))
    for amp in (0.06, 0.02):
        for nm, pert in caps_perts(st.chart, 0.3, amp):
            line = "   amp=%.2f %-11s" % (amp, nm)
            for label, ana_fun, fid in (("F", analytic_delta_F, "F"),
                                        ("W", analytic_delta_W, "W_RH")):
                rep_a = ana_fun(st, pert)
                fd = fd_delta(fid, st, pert)
                rel = abs(rep_a.total - fd.richardson) / (1 + abs(rep_a.total))
                line += "  d%s rel=%.2e ord=%.2f" % (label, rel, order(fd))
            print(line)
