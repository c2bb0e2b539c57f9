import time
import numpy as np
from rhflow.chart import (Chart, FlowState, MetricField, ScalarField,
                          constant_map, identity_metric, make_chart)
from rhflow import variations as va
from rhflow.functionals import f_functional, w_functional

def cap_state(nr, ntheta, r_min=0.05):
    ch = make_chart("polar_annulus", nr, ntheta, r_min=r_min)
    r, th = ch.coords()
    c = 4.0 / (1.0 + r**2)**2
    g = MetricField(ch, c, np.zeros(ch.shape), c * r**2)
    return ch, r, FlowState(0.0, 1.0, g, constant_map(ch, [0.1]),
                            ScalarField(ch, np.zeros(ch.shape)), 1.0)

def square_state(n):
    ch = Chart("rectangle", n, n, (False, False), (0.0, 0.0), (1.0, 1.0))
    return ch, FlowState(0.0, 1.0, identity_metric(ch),
                         constant_map(ch, [0.0]),
                         ScalarField(ch, np.zeros(ch.shape)), 1.0)

def cyl_state(nx, ny):
    ch = Chart("cylinder", nx, ny, (True, False), (0.0, 0.0),
               (2*np.pi, 1.0))
    X, _ = ch.coords()
    phi = constant_map(ch, [0.0], kinds=("circle",)).with_values(X[:, :, None])
    return ch, X, FlowState(0.0, 1.0, identity_metric(ch), phi,
                            ScalarField(ch, np.zeros(ch.shape)), 1.0)

def run(tag, state, perts, func, delta):
    for i, p in enumerate(perts):
        t0 = time.time()
        rep = delta(state, p)
        fd = va.fd_delta(func, state, p, 1e-3)
        d = abs(rep.total - fd.richardson)
        scale = 1.0 + abs(rep.total)
        e1 = abs(fd.d_eps - fd.richardson)
        e2 = abs(fd.d_half - fd.richardson)
        order = np.log2(e1 / e2) if e2 > 0 else float("inf")
        print("%-18s p%d diff=%.3e rel=%.3e order=%.2f (%.2fs)" %
              (tag, i, d, d / scale, order, time.time() - t0))

# flat square presets
for n in (65, 129):
    ch, st = square_state(n)
    X, Y = ch.coords()
    perts = [
        va.Perturbation(v11=0.3*np.cos(np.pi*X)*np.cos(np.pi*Y),
                        v12=0.1*np.cos(np.pi*X)*np.cos(2*np.pi*Y),
                        v22=0.2*np.cos(np.pi*Y), v_admissible=True),
        va.Perturbation(h=0.3*np.cos(np.pi*X)*np.cos(np.pi*Y),
                        theta=(0.2*np.cos(np.pi*X))[:, :, None],
                        h_admissible=True, theta_admissible=True),
        va.Perturbation(v11=0.2*np.cos(np.pi*Y), v22=0.2*np.cos(np.pi*Y),
                        h=0.1*np.cos(np.pi*X), sigma=0.5,
                        v_admissible=True, h_admissible=True),
    ]
    run("square %d dF" % n, st, perts, "F", va.analytic_delta_F)
    run("square %d dW" % n, st, perts, "W_RH", va.analytic_delta_W)

# flat cylinder preset
for nx in (64, 128):
    ch, X, st = cyl_state(nx, nx//2 + 1)
    Y = ch.coords()[1]
    perts = [
        va.Perturbation(v11=0.3*np.cos(X)*np.cos(np.pi*Y),
                        v12=0.1*np.sin(X)*np.cos(2*np.pi*Y),
                        v22=0.2*np.cos(np.pi*Y), v_admissible=True),
        va.Perturbation(h=0.3*np.cos(X)*np.cos(np.pi*Y),
                        theta=(0.2*np.cos(np.pi*Y))[:, :, None],
                        h_admissible=True, theta_admissible=True),
        va.Perturbation(v11=0.2*np.cos(np.pi*Y), v22=0.2*np.cos(np.pi*Y),
                        h=0.1*np.sin(X), sigma=0.5,
                        v_admissible=True, h_admissible=True),
    ]
    run("cyl %d dF" % nx, st, perts, "F", va.analytic_delta_F)
    run("cyl %d dW" % nx, st, perts, "W_RH", va.analytic_delta_W)

# round cap: radial perturbations, bump profiles vanish to 4th order at walls
for nr in (65, 129):
    ch, r, st = cap_state(nr, 48)
    s = (r - r.min()) / (1.0 - r.min())
    bump = (s * (1.0 - s))**4 * 4**8   # normalized to max ~1
    perts = [
        va.Perturbation(v11=0.3*bump, v22=0.2*bump*r**2, v_admissible=True),
        va.Perturbation(h=0.3*bump, h_admissible=True),
        va.Perturbation(v11=0.2*bump, v22=0.2*bump*r**2, h=0.1*bump,
                        sigma=0.5, v_admissible=True, h_admissible=True),
    ]
    run("cap %d dF" % nr, st, perts, "F", va.analytic_delta_F)
    run("cap %d dW" % nr, st, perts, "W_RH", va.analytic_delta_W)
