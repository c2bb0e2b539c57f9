"""Matrix-free elliptic solves against the conservative Neumann operator.

All three entry points share one preconditioned conjugate-gradient kernel on
A = -L, where L is calculus.neumann_operator's symmetric negative
semidefinite zero-flux form.  The nullspace (constants) is handled by
projection: the right-hand side must be compatible (zero integral), iterates
are kept mean-free, and the returned field is gauged to zero dv-average.
"""

from dataclasses import dataclass

import numpy as np

from .calculus import neumann_operator, volume_element
from .chart import MapField, ScalarField
from .errors import IncompatibleRHS, NoConvergence


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    residual_norm: float        # final ||r||_2 relative to ||b||_2
    gauge_shift: float          # constant removed to reach zero dv-mean


def _values(u):
    return u.values if hasattr(u, "values") else np.asarray(u, float)


def _pcg(apply_A, b, diag, tol, maxiter):
    """CG on the singular-consistent system A x = b, b orthogonal to 1."""
    b = b - b.mean()
    bnorm = float(np.sqrt(np.sum(b * b)))
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0
    x = np.zeros_like(b)
    r = b.copy()
    z = r / diag
    p = z.copy()
    rz = float(np.sum(r * z))
    for it in range(1, maxiter + 1):
        Ap = apply_A(p)
        alpha = rz / float(np.sum(p * Ap))
        x += alpha * p
        r -= alpha * Ap
        r -= r.mean()                       # stay in range(A)
        rnorm = float(np.sqrt(np.sum(r * r)))
        if rnorm <= tol * bnorm:
            return x, it, rnorm / bnorm
        z = r / diag
        rz_new = float(np.sum(r * z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NoConvergence("CG stalled at relative residual %.3e after %d "
                        "iterations" % (rnorm / bnorm, maxiter))


def _diag_estimate(g, mass):
    chart = g.chart
    return mass * (2.0 * g.inv11 / chart.hx ** 2
                   + 2.0 * g.inv22 / chart.hy ** 2)


def solve_poisson_neumann(g, rhs, tol=1e-10, maxiter=None):
    """Solve laplace u = rhs with zero-flux boundary, zero dv-mean gauge.

    rhs must satisfy the compatibility condition int rhs dv = 0 (checked to
    1e-8 relative); the discrete operator is exactly conservative so the
    projected system is consistent.
    """
    rv = _values(rhs)
    mass = volume_element(g)
    total = float(np.sum(mass * rv))
    l2 = float(np.sqrt(np.sum(mass * rv * rv)))
    if abs(total) > 1e-8 * max(l2, 1e-300):
        raise IncompatibleRHS("int rhs dv = %.3e exceeds 1e-8 * ||rhs|| "
                              "= %.3e" % (total, 1e-8 * l2))
    if maxiter is None:
        maxiter = 50 * rv.size

    def apply_A(p):
        return -neumann_operator(g, p)[0]

    b = -mass * rv
    x, it, res = _pcg(apply_A, b, _diag_estimate(g, mass), tol, maxiter)
    shift = float(np.sum(mass * x) / np.sum(mass))
    return ScalarField(g.chart, x - shift), SolveReport(it, res, shift)


def solve_potential_f(g, S, tol=1e-10, maxiter=None):
    """Potential for the entropy identities: laplace f = mean_dv(S) - S.

    The mean is removed with the same quadrature the solver uses, so the
    right-hand side is compatible by construction.
    """
    sv = _values(S)
    mass = volume_element(g)
    sbar = float(np.sum(mass * sv) / np.sum(mass))
    return solve_poisson_neumann(g, sbar - sv, tol, maxiter)


def solve_harmonic_map(g, phi, tol=1e-10, maxiter=None):
    """Project a map onto the discrete-harmonic one in its homotopy class.

    Circle components keep their winding: the correction delta solves
    (-L) delta = L phi componentwise (a plain scalar field, so adding it
    cannot change any winding number), which makes L(phi + delta) = 0 up to
    solver tolerance.  Linear components have only constant harmonic
    representatives under zero-flux conditions and are replaced by their
    dv-average exactly.
    """
    if maxiter is None:
        maxiter = 50 * phi.values[..., 0].size
    mass = volume_element(g)
    diag = _diag_estimate(g, mass)
    new = np.array(phi.values)
    reports = []
    for k in range(phi.n_components):
        comp = phi.component(k)
        if phi.kinds[k] == "linear":
            mean = float(np.sum(mass * comp) / np.sum(mass))
            new[:, :, k] = mean
            reports.append(SolveReport(0, 0.0, mean))
            continue
        b, _ = neumann_operator(g, comp, period=phi.period)

        def apply_A(p):
            return -neumann_operator(g, p)[0]

        delta, it, res = _pcg(apply_A, b, diag, tol, maxiter)
        new[:, :, k] = comp + delta
        reports.append(SolveReport(it, res, 0.0))
    return phi.with_values(new), reports
