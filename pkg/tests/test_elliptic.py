"""Elliptic solves: dense-matrix oracle, eigenfunction convergence,
compatibility handling, harmonic maps with winding."""

import numpy as np
import pytest

from rhflow import calculus as ca
from rhflow import elliptic as el
from rhflow.chart import MapField, MetricField, constant_metric, make_chart
from rhflow.errors import IncompatibleRHS

TWO_PI = 2.0 * np.pi


def _dense_solve(g, rhs):
    """Independent oracle: assemble -L column by column, pinv solve."""
    n = rhs.size
    shape = rhs.shape
    A = np.empty((n, n))
    eye = np.eye(n)
    for j in range(n):
        A[:, j] = -ca.neumann_operator(g, eye[:, j].reshape(shape))[0].ravel()
    mass = ca.volume_element(g)
    b = -(mass * rhs).ravel()
    u = np.linalg.lstsq(A, b, rcond=None)[0].reshape(shape)
    return u - np.sum(mass * u) / np.sum(mass)


def test_cg_matches_dense_oracle():
    ch = make_chart("cylinder", 16, 8, Ly=1.0)
    X, Y = ch.coords()
    g = MetricField(ch, 1 + 0.3 * np.cos(X), 0.1 * np.sin(X),
                    1.2 + 0.2 * Y)
    rhs = np.sin(2 * X) * Y + np.cos(X)
    mass = ca.volume_element(g)
    rhs = rhs - np.sum(mass * rhs) / np.sum(mass)
    u, rep = el.solve_poisson_neumann(g, rhs, tol=1e-12)
    u_ref = _dense_solve(g, rhs)
    assert np.abs(u.values - u_ref).max() < 1e-8
    assert rep.iterations > 0 and rep.residual_norm <= 1e-12


def test_eigenfunction_convergence_flat_square():
    errs = []
    for n in (17, 33):
        ch = make_chart("rectangle", n, n)
        X, Y = ch.coords()
        g = constant_metric(ch, 1.0, 0.0, 1.0)
        u_exact = np.cos(np.pi * X) * np.cos(np.pi * Y)
        rhs = -2 * np.pi ** 2 * u_exact
        u, _ = el.solve_poisson_neumann(g, rhs, tol=1e-12)
        errs.append(np.abs(u.values - u_exact).max())
    assert errs[0] / errs[1] > 3.2
    assert errs[1] < 0.05


def test_incompatible_rhs_raises():
    ch = make_chart("rectangle", 8, 8)
    g = constant_metric(ch, 1.0, 0.0, 1.0)
    with pytest.raises(IncompatibleRHS):
        el.solve_poisson_neumann(g, np.ones(ch.shape))


def test_zero_rhs_returns_zero():
    ch = make_chart("rectangle", 8, 8)
    g = constant_metric(ch, 1.0, 0.0, 1.0)
    u, rep = el.solve_poisson_neumann(g, np.zeros(ch.shape))
    assert np.all(u.values == 0.0)
    assert rep.iterations == 0


def test_solution_gauge_is_zero_mean():
    ch = make_chart("polar_annulus", 17, 16, r_min=0.4)
    r, th = ch.coords()
    g = MetricField(ch, np.ones_like(r), np.zeros_like(r), r ** 2)
    rhs = np.cos(th) * r
    mass = ca.volume_element(g)
    rhs -= np.sum(mass * rhs) / np.sum(mass)
    u, _ = el.solve_poisson_neumann(g, rhs, tol=1e-11)
    assert abs(ca.integrate(g, u)) < 1e-10 * np.abs(u.values).max()


def test_solve_potential_f_residual():
    ch = make_chart("cylinder", 24, 12)
    X, Y = ch.coords()
    g = MetricField(ch, 1 + 0.2 * np.cos(X), np.zeros(ch.shape),
                    np.ones(ch.shape))
    S = np.sin(X) + 0.5 * Y ** 2 + 3.0     # arbitrary, nonzero mean
    f, rep = el.solve_potential_f(g, S, tol=1e-12)
    mass = ca.volume_element(g)
    sbar = np.sum(mass * S) / np.sum(mass)
    lap = ca.laplace_beltrami(g, f.values, bc="neumann").values
    scale = np.abs(S - sbar).max()
    assert np.abs(lap - (sbar - S)).max() < 1e-7 * scale


def test_harmonic_circle_map_closed_form():
    # g11 = (1 + .3 cos x)^2, g22 = 1: harmonic winding-1 map is
    # phi(x) = x + .3 sin x (up to rotation)
    errs = []
    for n in (32, 64):
        ch = make_chart("cylinder", n, 8, Ly=1.0)
        X, _ = ch.coords()
        g = MetricField(ch, (1 + 0.3 * np.cos(X)) ** 2, np.zeros(ch.shape),
                        np.ones(ch.shape))
        phi0 = MapField(ch, X[..., None], ("circle",))
        phi, reps = el.solve_harmonic_map(g, phi0, tol=1e-12)
        exact = X + 0.3 * np.sin(X)
        got = phi.component(0)
        diff = got - exact
        diff -= diff.mean()                 # rotation gauge
        errs.append(np.abs(diff).max())
        assert ca.tension_sup_norm(g, phi) < 1e-9
    assert errs[0] / errs[1] > 3.2


def test_harmonic_map_initial_guess_independence():
    ch = make_chart("cylinder", 24, 8)
    X, Y = ch.coords()
    g = MetricField(ch, (1 + 0.2 * np.cos(X)) ** 2, np.zeros(ch.shape),
                    np.ones(ch.shape))
    phi_a = MapField(ch, X[..., None], ("circle",))
    bump = X + 0.4 * np.sin(2 * X) * np.cos(np.pi * Y)
    phi_b = MapField(ch, bump[..., None], ("circle",))
    sol_a, _ = el.solve_harmonic_map(g, phi_a, tol=1e-13)
    sol_b, _ = el.solve_harmonic_map(g, phi_b, tol=1e-13)
    d = sol_a.component(0) - sol_b.component(0)
    d -= d.mean()
    assert np.abs(d).max() < 1e-8


def test_harmonic_map_preserves_winding():
    ch = make_chart("cylinder", 24, 8)
    X, _ = ch.coords()
    g = MetricField(ch, (1 + 0.25 * np.cos(X)) ** 2, np.zeros(ch.shape),
                    np.ones(ch.shape))
    phi0 = MapField(ch, (2 * X)[..., None], ("circle",))   # winding 2
    phi, _ = el.solve_harmonic_map(g, phi0, tol=1e-12)
    v = phi.component(0)
    winding = np.sum(np.diff(np.unwrap(np.append(v[:, 0], v[0, 0]),
                                       period=TWO_PI))) / TWO_PI
    assert winding == pytest.approx(2.0, abs=1e-6)


def test_harmonic_map_linear_component_is_mean():
    ch = make_chart("cylinder", 16, 8)
    X, Y = ch.coords()
    g = constant_metric(ch, 1.0, 0.0, 1.0)
    vals = np.stack([X, 2.0 + np.sin(Y)], axis=-1)
    phi0 = MapField(ch, vals, ("circle", "linear"))
    phi, reps = el.solve_harmonic_map(g, phi0)
    mass = ca.volume_element(g)
    want = np.sum(mass * (2.0 + np.sin(Y))) / np.sum(mass)
    assert np.abs(phi.component(1) - want).max() < 1e-13
