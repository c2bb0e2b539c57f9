import numpy as np
from rhflow.chart import (Chart, FlowState, MetricField, ScalarField,
                          constant_map, constant_metric, identity_metric)
from rhflow import calculus as ca
from rhflow import variations as va
from rhflow.functionals import f_functional, w_functional, f_rate

def square(n):
    return Chart("rectangle", n, n, (False, False), (0.0, 0.0), (1.0, 1.0))

def cyl(nx, ny, Ly=1.0):
    return Chart("cylinder", nx, ny, (True, False), (0.0, 0.0),
                 (2*np.pi, Ly))

# ---- sigma-only closed form on flat square -------------------------------
for n in (33, 65):
    ch = square(n)
    st = FlowState(0.0, 1.7, identity_metric(ch), constant_map(ch, [0.3]),
                   ScalarField(ch, np.zeros(ch.shape)), 2.0)
    pert = va.Perturbation(sigma=0.9)
    rep = va.analytic_delta_W(st, pert)
    closed = 0.9 / (2*np.pi*1.7**2)
    fd = va.fd_delta(lambda s: w_functional(s, "rh"), st, pert, 1e-3)
    print("sigma-only n=%d analytic=%.12e closed=%.3e diff=%.3e "
          "fd_rich=%.3e dual_c2=%.3e" %
          (n, rep.total, closed, rep.total-closed,
           fd.richardson-rep.total, rep.duals["c_constant_2"]-closed))

# ---- delta F on flat square, admissible trig ------------------------------
print()
for n in (33, 65, 129):
    ch = square(n)
    X, Y = ch.coords()
    f0 = 0.3*np.cos(np.pi*X)*np.cos(2*np.pi*Y)
    phiv = 0.4*np.cos(2*np.pi*X)*np.cos(np.pi*Y)
    phi = constant_map(ch, [0.0]).with_values(phiv[:, :, None])
    g = MetricField(ch, 1.0+0.2*np.cos(np.pi*X)*np.cos(np.pi*Y),
                    0.05*np.cos(np.pi*X)*np.cos(np.pi*Y),
                    1.0+0.1*np.cos(2*np.pi*Y))
    st = FlowState(0.0, 1.0, g, phi, ScalarField(ch, f0), 1.5)
    pert = va.Perturbation(
        v11=0.3*np.cos(np.pi*X)*np.cos(np.pi*Y),
        v12=0.1*np.cos(2*np.pi*X)*np.cos(np.pi*Y),
        v22=0.2*np.cos(np.pi*Y),
        h=0.25*np.cos(np.pi*X), theta=0.3*np.cos(np.pi*Y)[:, :, None],
        v_admissible=True, h_admissible=True, theta_admissible=True)
    rep = va.analytic_delta_F(st, pert)
    fd = va.fd_delta(f_functional, st, pert, 1e-3)
    print("dF square n=%3d analytic=%.10e rich=%.10e diff=%.3e" %
          (n, rep.total, fd.richardson, abs(rep.total-fd.richardson)))

# ---- delta F on cylinder with circle map ----------------------------------
print()
for n in (32, 64, 128):
    ch = cyl(n, n//2+1)
    X, Y = ch.coords()
    f0 = 0.3*np.cos(X)*np.cos(np.pi*Y)
    phi = constant_map(ch, [0.0], kinds=("circle",)).with_values(
        (X + 0.2*np.sin(X)*np.cos(np.pi*Y))[:, :, None])
    g = MetricField(ch, 1.2+0.2*np.cos(X)*np.cos(np.pi*Y),
                    0.05*np.sin(X)*np.cos(np.pi*Y),
                    1.0+0.1*np.cos(np.pi*Y))
    st = FlowState(0.0, 1.0, g, phi, ScalarField(ch, f0), 0.8)
    pert = va.Perturbation(
        v11=0.3*np.cos(X)*np.cos(np.pi*Y),
        v12=0.1*np.sin(2*X)*np.cos(np.pi*Y),
        v22=0.2*np.cos(np.pi*Y)*np.cos(X),
        h=0.25*np.cos(np.pi*Y)*np.sin(X),
        theta=(0.3*np.cos(np.pi*Y)*np.cos(X))[:, :, None],
        v_admissible=True, h_admissible=True, theta_admissible=True)
    rep = va.analytic_delta_F(st, pert)
    fd = va.fd_delta(f_functional, st, pert, 1e-3)
    print("dF cyl    n=%3d analytic=%.10e rich=%.10e diff=%.3e" %
          (n, rep.total, fd.richardson, abs(rep.total-fd.richardson)))

# ---- delta W mixed with sigma on cylinder ---------------------------------
print()
for n in (32, 64, 128):
    ch = cyl(n, n//2+1)
    X, Y = ch.coords()
    f0 = 0.3*np.cos(X)*np.cos(np.pi*Y)
    phi = constant_map(ch, [0.0], kinds=("circle",)).with_values(
        (X + 0.2*np.sin(X)*np.cos(np.pi*Y))[:, :, None])
    g = MetricField(ch, 1.2+0.2*np.cos(X)*np.cos(np.pi*Y),
                    0.05*np.sin(X)*np.cos(np.pi*Y),
                    1.0+0.1*np.cos(np.pi*Y))
    st = FlowState(0.0, 0.9, g, phi, ScalarField(ch, f0), 0.8)
    pert = va.Perturbation(
        v11=0.3*np.cos(X)*np.cos(np.pi*Y),
        v12=0.1*np.sin(2*X)*np.cos(np.pi*Y),
        v22=0.2*np.cos(np.pi*Y)*np.cos(X),
        h=0.25*np.cos(np.pi*Y)*np.sin(X),
        theta=(0.3*np.cos(np.pi*Y)*np.cos(X))[:, :, None], sigma=0.7,
        v_admissible=True, h_admissible=True, theta_admissible=True)
    rep = va.analytic_delta_W(st, pert)
    fd = va.fd_delta(lambda s: w_functional(s, "rh"), st, pert, 1e-3)
    print("dW cyl    n=%3d analytic=%.10e rich=%.10e diff=%.3e" %
          (n, rep.total, fd.richardson, abs(rep.total-fd.richardson)))
