import numpy as np
from rhflow import calculus as ca
from rhflow import functionals as fn
from rhflow.presets import perturbed_cap, round_cap
from rhflow.variations import Perturbation, fd_delta, ibp_residual


def flow_dir(st):
    b = ca.curvature(st.g)
    e, pull, _ = ca.map_pullback(st.g, st.phi, st.alpha)
    return Perturbation(v11=-2 * b.ric.t11 + 2 * st.alpha * pull.t11,
                        v12=-2 * b.ric.t12 + 2 * st.alpha * pull.t12,
                        v22=-2 * b.ric.t22 + 2 * st.alpha * pull.t22)

# default preset (broad bump, seed base) passes its hypothesis checks
st, rep = perturbed_cap()
print("default perturbed-cap:")
for line in rep.lines():
    print("  ", line)

# frozen criterion-8 configuration
rc, rrep = round_cap(nr=513, ntheta=32, r_min=0.3)
rc2, _ = round_cap(nr=257, ntheta=32, r_min=0.3)
E_rc, E_rc2 = fn.entropy_E(rc), fn.entropy_E(rc2)
rate_rc = fn.entropy_E_rate(rc).total
rate_rc2 = fn.entropy_E_rate(rc2).total
print("round-cap 513: E %.3e  rate %.3e   257: E %.3e  rate %.3e  ratio %.2f"
      % (E_rc, rate_rc, E_rc2, rate_rc2, abs(rate_rc2) / abs(rate_rc)))

pc, _ = perturbed_cap(nr=513, ntheta=32, r_min=0.3, beta=0.02)
E_pc = fn.entropy_E(pc)
fd = fd_delta(fn.entropy_E, pc, flow_dir(pc), eps=1e-4)
rr = fn.entropy_E_rate(pc)
rel = abs(fd.richardson - rr.total) / abs(rr.total)
vol = {k: v for k, v in rr.parts.items() if k != "boundary"}
print("pert-cap 513: E %.4e  fd %.6e  rhs %.6e  rel %.3e" %
      (E_pc, fd.richardson, rr.total, rel))
print("  volume parts max: %.3e   boundary: %.3e   sign(dE): %s"
      % (max(vol.values()), rr.parts["boundary"],
         "negative" if rr.total < 0 else "positive"))

# ibp on the new bump (identities-suite material)
for nr in (65, 129, 257):
    p, _ = perturbed_cap(nr=nr, ntheta=32, r_min=0.3, beta=0.02)
    good = ibp_residual(p)
    bad = ibp_residual(p, drop_boundary=True)
    print("ibp nr=%4d  solved %.3e   broken %.3e" % (nr, good, bad))
