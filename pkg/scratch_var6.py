import numpy as np
from rhflow.chart import (FlowState, MetricField, ScalarField, constant_map,
                          make_chart)
from rhflow import variations as va

def cap_state(nr, ntheta, r_min):
    ch = make_chart("polar_annulus", nr, ntheta, r_min=r_min)
    r, th = ch.coords()
    c = 4.0 / (1.0 + r**2)**2
    g = MetricField(ch, c, np.zeros(ch.shape), c * r**2)
    return ch, r, FlowState(0.0, 1.0, g, constant_map(ch, [0.1]),
                            ScalarField(ch, np.zeros(ch.shape)), 1.0)

def check(st, p):
    rep = va.analytic_delta_F(st, p)
    fd = va.fd_delta("F", st, p, 1e-3)
    return abs(rep.total - fd.richardson) / (1 + abs(rep.total))

print("=== admissible const-coeff vs r_min, nr ===")
for r_min in (0.05, 0.3, 0.5):
    row = []
    for nr in (129, 257, 513, 1025):
        ch, r, st = cap_state(nr, 32, r_min)
        s = (r - r_min) / (1.0 - r_min)
        p = va.Perturbation(v11=0.1*np.cos(np.pi*s),
                            v22=0.02*np.cos(2*np.pi*s), v_admissible=True)
        row.append(check(st, p))
    print("r_min=%.2f  " % r_min
          + "  ".join("%.3e" % e for e in row))

print("=== support away from inner edge, r_min=0.05 ===")
for nr in (129, 257, 513, 1025):
    ch, r, st = cap_state(nr, 32, 0.05)
    t = np.clip((r - 0.4) / 0.6, 0.0, 1.0)
    prof = np.sin(np.pi * t) ** 4       # C^3 at support edges, zero near hole
    p = va.Perturbation(v11=0.1*prof, v22=0.02*prof, v_admissible=True)
    print("nr=%4d  rel=%.3e" % (nr, check(st, p)))
