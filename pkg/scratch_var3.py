import numpy as np
from rhflow.chart import Chart, FlowState, MetricField, ScalarField, constant_map
from rhflow import calculus as ca
from rhflow import variations as va
from rhflow.functionals import f_functional

n = 65
ch = Chart("rectangle", n, n, (False, False), (0.0, 0.0), (1.0, 1.0))
X, Y = ch.coords()
f0 = 0.3*np.cos(np.pi*X)*np.cos(2*np.pi*Y)
phiv = 0.4*np.cos(2*np.pi*X)*np.cos(np.pi*Y)
phi = constant_map(ch, [0.0]).with_values(phiv[:, :, None])
g = MetricField(ch, 1.0+0.2*np.cos(np.pi*X)*np.cos(np.pi*Y),
                0.05*np.cos(np.pi*X)*np.cos(np.pi*Y),
                1.0+0.1*np.cos(2*np.pi*Y))
st = FlowState(0.0, 1.0, g, phi, ScalarField(ch, f0), 1.5)
alpha = st.alpha
theta = 0.3*np.cos(np.pi*Y)
pert = va.Perturbation(theta=theta[:, :, None], theta_admissible=True)

fd = va.fd_delta(f_functional, st, pert, 1e-3)
print("fd rich        = %+.10e" % fd.richardson)

# pre-IBP form: -2 alpha int <grad phi, grad theta> e^{-f} dv
w = np.exp(-f0)
px, py = ca.grad_lower(ch, phiv, bc="neumann")
tx, ty = ca.grad_lower(ch, theta, bc="neumann")
inner = (g.inv11*px*tx + g.inv12*(px*ty+py*tx) + g.inv22*py*ty)
pre = -2.0*alpha*ca.integrate(g, inner*w)
print("pre-IBP        = %+.10e" % pre)

rep = va.analytic_delta_F(st, pert)
print("analytic total = %+.10e  parts=%s" % (rep.total, rep.parts))

# post-IBP volume piece recomputed by hand with pointwise ingredients
gamma = ca.christoffel(g)
H = ca.hessian(g, phiv, bc="neumann", gamma=gamma)
lap_pt = ca.trace(g, H)               # pointwise trace-hessian laplacian
lap_flux = ca.laplace_beltrami(g, phiv, bc="neumann").values
fx, fy = ca.grad_lower(ch, f0, bc="neumann")
gfx = g.inv11*fx + g.inv12*fy
gfy = g.inv12*fx + g.inv22*fy
dot = px*gfx + py*gfy
F1_pt = 2*alpha*ca.integrate(g, theta*(lap_pt - dot)*w)
F1_fl = 2*alpha*ca.integrate(g, theta*(lap_flux - dot)*w)
print("F1 pointwise   = %+.10e" % F1_pt)
print("F1 fluxform    = %+.10e" % F1_fl)
print("max|lap_pt-lap_flux| interior=%.3e  global=%.3e" % (
    np.abs(lap_pt-lap_flux)[2:-2, 2:-2].max(), np.abs(lap_pt-lap_flux).max()))
