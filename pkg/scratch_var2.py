import numpy as np
from rhflow.chart import Chart, FlowState, MetricField, ScalarField, constant_map
from rhflow import variations as va
from rhflow.functionals import f_functional

def square(n):
    return Chart("rectangle", n, n, (False, False), (0.0, 0.0), (1.0, 1.0))

def state(n):
    ch = square(n)
    X, Y = ch.coords()
    f0 = 0.3*np.cos(np.pi*X)*np.cos(2*np.pi*Y)
    phiv = 0.4*np.cos(2*np.pi*X)*np.cos(np.pi*Y)
    phi = constant_map(ch, [0.0]).with_values(phiv[:, :, None])
    g = MetricField(ch, 1.0+0.2*np.cos(np.pi*X)*np.cos(np.pi*Y),
                    0.05*np.cos(np.pi*X)*np.cos(np.pi*Y),
                    1.0+0.1*np.cos(2*np.pi*Y))
    return ch, X, Y, FlowState(0.0, 1.0, g, phi, ScalarField(ch, f0), 1.5)

for n in (33, 65, 129):
    ch, X, Y, st = state(n)
    perts = {
        "theta": va.Perturbation(theta=0.3*np.cos(np.pi*Y)[:, :, None],
                                 theta_admissible=True),
        "h":     va.Perturbation(h=0.25*np.cos(np.pi*X), h_admissible=True),
        "v":     va.Perturbation(v11=0.3*np.cos(np.pi*X)*np.cos(np.pi*Y),
                                 v12=0.1*np.cos(2*np.pi*X)*np.cos(np.pi*Y),
                                 v22=0.2*np.cos(np.pi*Y), v_admissible=True),
        "v11":   va.Perturbation(v11=0.3*np.cos(np.pi*X)*np.cos(np.pi*Y),
                                 v_admissible=True),
        "v12":   va.Perturbation(v12=0.1*np.cos(2*np.pi*X)*np.cos(np.pi*Y),
                                 v_admissible=True),
        "v22":   va.Perturbation(v22=0.2*np.cos(np.pi*Y), v_admissible=True),
    }
    for name, p in perts.items():
        rep = va.analytic_delta_F(st, p)
        fd = va.fd_delta(f_functional, st, p, 1e-3)
        print("n=%3d %-5s analytic=%+.8e rich=%+.8e diff=%.3e" %
              (n, name, rep.total, fd.richardson, abs(rep.total-fd.richardson)))
    print()
