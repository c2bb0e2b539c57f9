import time
import numpy as np
from rhflow.chart import (FlowState, MetricField, ScalarField, constant_map,
                          make_chart)
from rhflow import variations as va

def cap_state(nr, ntheta, r_min=0.05):
    ch = make_chart("polar_annulus", nr, ntheta, r_min=r_min)
    r, th = ch.coords()
    c = 4.0 / (1.0 + r**2)**2
    g = MetricField(ch, c, np.zeros(ch.shape), c * r**2)
    return ch, r, FlowState(0.0, 1.0, g, constant_map(ch, [0.1]),
                            ScalarField(ch, np.zeros(ch.shape)), 1.0)

for nr in (65, 129, 257, 513):
    ch, r, st = cap_state(nr, 48)
    s = (r - r.min()) / (1.0 - r.min())
    prof = np.cos(np.pi * s)
    prof2 = np.cos(2 * np.pi * s)
    c = st.g.g11
    perts = [
        # conformal, honest one-sided stencils for v
        va.Perturbation(v11=0.1*prof*c, v22=0.1*prof*c*r**2,
                        v_admissible=False),
        # genuinely admissible constant-coefficient components
        va.Perturbation(v11=0.1*prof, v22=0.02*prof2, v_admissible=True),
        # mixed with sigma
        va.Perturbation(v11=0.05*prof2*c, v22=0.05*prof2*c*r**2,
                        h=0.1*prof, sigma=0.5,
                        v_admissible=False, h_admissible=True),
    ]
    t0 = time.time()
    for i, p in enumerate(perts):
        repF = va.analytic_delta_F(st, p)
        fdF = va.fd_delta("F", st, p, 1e-3)
        dF = abs(repF.total - fdF.richardson)
        repW = va.analytic_delta_W(st, p)
        fdW = va.fd_delta("W_RH", st, p, 1e-3)
        dW = abs(repW.total - fdW.richardson)
        print("cap nr=%3d p%d  dF rel=%.3e | dW rel=%.3e  (F=%+.3e W=%+.3e)"
              % (nr, i, dF/(1+abs(repF.total)), dW/(1+abs(repW.total)),
                 repF.total, repW.total))
    print("  (%.2f s)" % (time.time() - t0))
