import time
import numpy as np
from rhflow import calculus as ca
from rhflow import functionals as fn
from rhflow.chart import FlowState, MetricField
from rhflow.presets import perturbed_cap, round_cap, radial_bump
from rhflow.variations import Perturbation, fd_delta


def flow_dir(st):
    b = ca.curvature(st.g)
    e, pull, _ = ca.map_pullback(st.g, st.phi, st.alpha)
    return Perturbation(v11=-2 * b.ric.t11 + 2 * st.alpha * pull.t11,
                        v12=-2 * b.ric.t12 + 2 * st.alpha * pull.t12,
                        v22=-2 * b.ric.t22 + 2 * st.alpha * pull.t22)


def gap(st):
    fd = fd_delta(fn.entropy_E, st, flow_dir(st), eps=1e-4)
    rep = fn.entropy_E_rate(st)
    rel = abs(fd.richardson - rep.total) / abs(rep.total)
    return fd.richardson, rep.total, rel, rep


def broad_cap(nr, ntheta=32, r_min=0.3, beta=0.02):
    st, _ = round_cap(nr=nr, ntheta=ntheta, r_min=r_min, newton=False)
    ch = st.chart
    s = (ch.axis_coords(0) - r_min) / (1.0 - r_min)
    w = np.sin(np.pi * s) ** 4
    conf = np.exp(2.0 * beta * np.outer(w, np.ones(ntheta)))
    g = MetricField(ch, st.g.g11 * conf, st.g.g12 * conf, st.g.g22 * conf)
    return FlowState(0.0, st.tau, g, st.phi, st.f, st.alpha)


print("sharp bump 256[s(1-s)]^4:")
for nr in (129, 257, 513):
    st, _ = perturbed_cap(nr=nr, ntheta=32, r_min=0.3, beta=0.02, newton=False)
    t0 = time.time()
    fdv, rt, rel, rep = gap(st)
    print("  nr=%4d  fd %.6e  rhs %.6e  rel %.3e  (%.1fs)"
          % (nr, fdv, rt, rel, time.time() - t0))

print("broad bump sin^4(pi s):")
for nr in (129, 257, 513):
    st = broad_cap(nr)
    t0 = time.time()
    fdv, rt, rel, rep = gap(st)
    E0 = fn.entropy_E(st)
    parts = {k: float("%.3e" % v) for k, v in rep.parts.items()}
    print("  nr=%4d  E0 %.4e  fd %.6e  rhs %.6e  rel %.3e  (%.1fs)"
          % (nr, E0, fdv, rt, rel, time.time() - t0))
    if nr == 257:
        print("    parts:", parts)
