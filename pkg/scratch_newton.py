import time
import numpy as np
from rhflow.chart import make_chart, MetricField, FlowState, constant_map, constant_field
from rhflow import calculus as ca
from rhflow.presets import _cap_metric
from rhflow.functionals import entropy_E, entropy_E_rate, s_field

def newton(nr, r_min, iters=10):
    chart = make_chart("polar_annulus", nr, 8, r_min=r_min)
    r = chart.axis_coords(0)

    def residual(c):
        return ca.scalar_curvature(_cap_metric(chart, c)).values[:, 0] - 2.0

    def jac(c, res):
        delta = 1e-7
        J = np.zeros((nr, nr))
        for color in range(12):
            idx = np.arange(color, nr, 12)
            cp = c.copy(); cp[idx] += delta
            col = (residual(cp) - res) / delta
            for j in idx:
                lo, hi = max(0, j - 5), min(nr, j + 5 + 1)
                J[lo:hi, j] = col[lo:hi]
        return J

    c = 4.0 / (1.0 + r * r) ** 2
    res = residual(c)
    path = [np.abs(res).max()]
    for it in range(iters):
        J = jac(c, res)
        U, s, Vt = np.linalg.svd(J)
        k = len(s) - 2          # drop the two family directions
        step = -Vt[:k].T @ ((U[:, :k].T @ res) / s[:k])
        sup = np.abs(res).max()
        for h in range(20):
            trial = c + step
            if np.all(trial > 0):
                rt = residual(trial)
                if np.abs(rt).max() < sup:
                    c, res = trial, rt
                    break
            step = 0.5 * step
        else:
            break
        path.append(np.abs(res).max())
        if path[-1] > 0.9 * path[-2] and it > 2:
            break
    return c, res, path

for r_min in (0.3,):
    for nr in (129, 257, 513):
        t0 = time.time()
        c, res, path = newton(nr, r_min)
        el = time.time() - t0
        # build the full state and measure entropy + rate
        chart = make_chart("polar_annulus", nr, 48, r_min=r_min)
        g = _cap_metric(chart, c)
        st = FlowState(0.0, 1.0, g, constant_map(chart, [0.0]),
                       constant_field(chart, 0.0), 1.0)
        E = entropy_E(st)
        rep = entropy_E_rate(st)
        print("r_min=%.2f nr=%4d  %5.1fs  floor %.3e  E=%.3e  rate=%.3e"
              % (r_min, nr, el, path[-1], E, rep.total))
        print("   path:", ["%.1e" % v for v in path])
