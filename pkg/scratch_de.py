import numpy as np
from rhflow import calculus as ca
from rhflow import functionals as fn
from rhflow.presets import perturbed_cap
from rhflow.variations import Perturbation, fd_delta

st, _ = perturbed_cap(nr=129, ntheta=32, r_min=0.3, beta=0.02, newton=False)

# dE/dt via FD along the exact ps direction v = -2 Ric + 2 alpha P = dg/dt
bundle = ca.curvature(st.g)
e_den, pull, _ = ca.map_pullback(st.g, st.phi, st.alpha)
v11 = -2 * bundle.ric.t11 + 2 * st.alpha * pull.t11
v12 = -2 * bundle.ric.t12 + 2 * st.alpha * pull.t12
v22 = -2 * bundle.ric.t22 + 2 * st.alpha * pull.t22
pert = Perturbation(v11=v11, v12=v12, v22=v22)   # honest extrapolate closure

def E_of(state):
    return fn.entropy_E(state)

fd = fd_delta(E_of, st, pert, eps=1e-4)
rep = fn.entropy_E_rate(st)
print("fd dE (flow direction, Richardson): %.10e" % fd.richardson)
print("rate total:                          %.10e" % rep.total)
print("parts:", {k: "%.4e" % v for k, v in rep.parts.items()})
print("duals:", {k: "%.4e" % v for k, v in rep.duals.items()})
print("rel gap: %.3e" % (abs(fd.richardson - rep.total) / abs(rep.total)))
