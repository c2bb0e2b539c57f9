"""Discrete Riemannian calculus on a chart.

Curvature, Christoffel symbols, gradient/Hessian/Laplace-Beltrami operators,
boundary geometry (normals, geodesic curvature, second fundamental form) and
quadrature.  Everything is vectorised over the grid; all stencils come from
stencils.diff_bundle so interior and boundary closures stay consistent across
operators (this is what makes several discrete identities exact rather than
merely O(h^2); see the notes on individual functions).

Conventions: index 0 = axis x, 1 = axis y.  Covariant tensors are stored as
(t11, t12, t22); vectors are contravariant.  bc is either "none" (pure
one-sided extrapolation ghosts, no boundary condition implied) or "neumann"
(reflection ghosts on bounded axes, zero-flux walls for the conservative
Laplacian).
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .chart import (Chart, MapField, MetricField, ScalarField, SymTensorField,
                    VectorField)
from .errors import NoBoundary
from .stencils import d1, d2, d_cross

# ---------------------------------------------------------------------------
# ghost-mode plumbing


def _modes(chart, bc):
    """Per-axis ghost modes for scalar data under the given bc."""
    pick = "reflect" if bc == "neumann" else "extrapolate"
    return tuple(
        "extrapolate" if chart.periodic[ax] else pick for ax in (0, 1))


def _values(u):
    return u.values if hasattr(u, "values") else np.asarray(u, float)


# ---------------------------------------------------------------------------
# Christoffel symbols and curvature


def metric_partials(g):
    """dg[l][a][b] = d_l g_ab as plain arrays (extrapolation ghosts)."""
    chart = g.chart
    comps = {(0, 0): g.g11, (0, 1): g.g12, (1, 0): g.g12, (1, 1): g.g22}
    dg = [[[None, None], [None, None]] for _ in (0, 1)]
    for (a, b), arr in comps.items():
        for ax in (0, 1):
            dg[ax][a][b] = d1(chart, arr, ax)
    # symmetrise storage a<->b (same array objects)
    return dg


def christoffel(g):
    """Gamma[k][i][j] = Gamma^k_ij, nested lists of (nx, ny) arrays.

    Built from the same first-derivative stencils as every other operator, so
    discrete metric compatibility nabla_k g_ij = 0 holds exactly wherever the
    product rule does (constant conformal rescalings in particular).
    """
    dg = metric_partials(g)
    inv = ((g.inv11, g.inv12), (g.inv12, g.inv22))
    low = [[[0.5 * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j])
             for j in (0, 1)] for i in (0, 1)] for l in (0, 1)]
    gamma = [[[inv[k][0] * low[0][i][j] + inv[k][1] * low[1][i][j]
               for j in (0, 1)] for i in (0, 1)] for k in (0, 1)]
    return gamma


def scalar_curvature(g):
    """Scalar curvature R = 2K with K from the Brioschi determinant formula.

    One stencil application per metric-component derivative; divides by
    (det g)^2, so expect a large (still O(h^2)) error constant where the
    metric is small, e.g. near the inner radius of an annulus.
    """
    chart = g.chart
    E, F, G = g.g11, g.g12, g.g22
    Ex, Ey = d1(chart, E, 0), d1(chart, E, 1)
    Gx, Gy = d1(chart, G, 0), d1(chart, G, 1)
    Fx, Fy = d1(chart, F, 0), d1(chart, F, 1)
    Eyy = d2(chart, E, 1)
    Gxx = d2(chart, G, 0)
    Fxy = d_cross(chart, F)
    det = g.det
    a11 = -0.5 * Eyy + Fxy - 0.5 * Gxx
    # det of [[a11, .5Ex, Fx-.5Ey], [Fy-.5Gx, E, F], [.5Gy, F, G]]
    m1 = (a11 * det
          - 0.5 * Ex * ((Fy - 0.5 * Gx) * G - F * (0.5 * Gy))
          + (Fx - 0.5 * Ey) * ((Fy - 0.5 * Gx) * F - E * (0.5 * Gy)))
    # det of [[0, .5Ey, .5Gx], [.5Ey, E, F], [.5Gx, F, G]]
    m2 = (-0.5 * Ey * (0.5 * Ey * G - F * 0.5 * Gx)
          + 0.5 * Gx * (0.5 * Ey * F - E * 0.5 * Gx))
    K = (m1 - m2) / (det * det)
    return ScalarField(chart, 2.0 * K)


@dataclass(frozen=True)
class CurvatureBundle:
    gamma: list                 # Gamma[k][i][j] arrays
    R: ScalarField
    ric: SymTensorField         # (R/2) g_ij


def curvature(g):
    R = scalar_curvature(g)
    half_R = 0.5 * R.values
    ric = SymTensorField(g.chart, half_R * g.g11, half_R * g.g12,
                         half_R * g.g22)
    return CurvatureBundle(christoffel(g), R, ric)


# ---------------------------------------------------------------------------
# first/second order operators


def grad_lower(chart, u, bc="none", period=None):
    m = _modes(chart, bc)
    v = _values(u)
    return d1(chart, v, 0, m[0], period), d1(chart, v, 1, m[1], period)


def gradient(g, u, bc="none", period=None):
    """Contravariant gradient grad^i = g^ij d_j u."""
    ux, uy = grad_lower(g.chart, u, bc, period)
    gx = g.inv11 * ux + g.inv12 * uy
    gy = g.inv12 * ux + g.inv22 * uy
    return VectorField(g.chart, np.stack([gx, gy], axis=-1))


def grad_norm_sq(g, u, bc="none", period=None):
    """|grad u|^2 = g^ij d_i u d_j u, pointwise >= 0 for SPD g."""
    ux, uy = grad_lower(g.chart, u, bc, period)
    return (g.inv11 * ux * ux + 2.0 * g.inv12 * ux * uy
            + g.inv22 * uy * uy)


def inner(g, X, Y):
    """g(X, Y) for contravariant vector fields."""
    xv, yv = _values(X), _values(Y)
    return (g.g11 * xv[..., 0] * yv[..., 0]
            + g.g12 * (xv[..., 0] * yv[..., 1] + xv[..., 1] * yv[..., 0])
            + g.g22 * xv[..., 1] * yv[..., 1])


def hessian(g, u, bc="none", period=None, gamma=None):
    """(hess u)_ij = d_i d_j u - Gamma^k_ij d_k u."""
    chart = g.chart
    m = _modes(chart, bc)
    v = _values(u)
    if gamma is None:
        gamma = christoffel(g)
    ux, uy = d1(chart, v, 0, m[0], period), d1(chart, v, 1, m[1], period)
    uxx = d2(chart, v, 0, m[0], period)
    uyy = d2(chart, v, 1, m[1], period)
    uxy = d1(chart, d1(chart, v, 0, m[0], period), 1, m[1], None)
    h11 = uxx - gamma[0][0][0] * ux - gamma[1][0][0] * uy
    h12 = uxy - gamma[0][0][1] * ux - gamma[1][0][1] * uy
    h22 = uyy - gamma[0][1][1] * ux - gamma[1][1][1] * uy
    return SymTensorField(chart, h11, h12, h22)


def trace(g, T):
    """tr_g T = g^ij T_ij."""
    t11, t12, t22 = T.components() if hasattr(T, "components") else T
    return g.inv11 * t11 + 2.0 * g.inv12 * t12 + g.inv22 * t22


def tensor_norm_sq(g, T):
    """||T||^2 = g^ik g^jl T_ij T_kl via the mixed tensor g^-1 T."""
    t11, t12, t22 = T.components() if hasattr(T, "components") else T
    a11 = g.inv11 * t11 + g.inv12 * t12
    a12 = g.inv11 * t12 + g.inv12 * t22
    a21 = g.inv12 * t11 + g.inv22 * t12
    a22 = g.inv12 * t12 + g.inv22 * t22
    return a11 * a11 + 2.0 * a12 * a21 + a22 * a22


# ---------------------------------------------------------------------------
# conservative (flux-form) Laplace-Beltrami

def _corner_vals(Q, ncx, ncy):
    """Values of a node array at the 4 corners of every cell."""
    Q10 = np.roll(Q, -1, axis=0)
    Q01 = np.roll(Q, -1, axis=1)
    Q11 = np.roll(Q10, -1, axis=1)
    return (Q[:ncx, :ncy], Q10[:ncx, :ncy], Q01[:ncx, :ncy], Q11[:ncx, :ncy])


def neumann_operator(g, u, period=None):
    """(L u, mass): symmetric negative-semidefinite zero-flux operator.

    L is the gradient of the corner-quadrature Dirichlet energy
    E(u) = (hx hy / 4) sum_cells sum_corners  grad u . (W g^-1 grad u)
    with edge-difference gradients, i.e. a bilinear-quadrature flux form.
    Properties (exact, not asymptotic): sum_k (L u)_k = 0; u = const gives
    L u = 0; L is symmetric; on a constant diagonal metric it reduces to the
    familiar 5-point stencil.  mass_k = W_k * (trapezoid cell area), and the
    pointwise Laplacian is (L u)/mass.
    """
    chart = g.chart
    nx, ny = chart.shape
    hx, hy = chart.hx, chart.hy
    perx, pery = chart.periodic
    W = g.sqrt_det
    A = W * g.inv11
    B = W * g.inv12
    C = W * g.inv22
    v = _values(u)
    dx = np.diff(v, axis=0)
    if perx:
        seam = v[[0], :] - v[[-1], :]
        dx = np.concatenate([dx, seam], axis=0)
    dy = np.diff(v, axis=1)
    if pery:
        seam = v[:, [0]] - v[:, [-1]]
        dy = np.concatenate([dy, seam], axis=1)
    if period is not None:
        dx = dx - period * np.round(dx / period)
        dy = dy - period * np.round(dy / period)
    gx = dx / hx
    gy = dy / hy
    ncx = nx if perx else nx - 1
    ncy = ny if pery else ny - 1
    A00, A10, A01, A11 = _corner_vals(A, ncx, ncy)
    B00, B10, B01, B11 = _corner_vals(B, ncx, ncy)
    C00, C10, C01, C11 = _corner_vals(C, ncx, ncy)
    gxb = gx[:, 0:ncy]
    gxt = np.roll(gx, -1, axis=1)[:, 0:ncy] if pery else gx[:, 1:ncy + 1]
    gyl = gy[0:ncx, :]
    gyr = np.roll(gy, -1, axis=0)[0:ncx, :] if perx else gy[1:ncx + 1, :]
    w = 0.25 * hx * hy
    fxb = w * ((A00 + A10) * gxb + B00 * gyl + B10 * gyr)
    fxt = w * ((A01 + A11) * gxt + B01 * gyl + B11 * gyr)
    fyl = w * ((C00 + C01) * gyl + B00 * gxb + B01 * gxt)
    fyr = w * ((C10 + C11) * gyr + B10 * gxb + B11 * gxt)
    # scatter the energy gradient to the cells' corner nodes
    acc = np.zeros((ncx + 1, ncy + 1))
    acc[0:ncx, 0:ncy] += fxb / hx + fyl / hy
    acc[1:ncx + 1, 0:ncy] += -fxb / hx + fyr / hy
    acc[0:ncx, 1:ncy + 1] += fxt / hx - fyl / hy
    acc[1:ncx + 1, 1:ncy + 1] += -fxt / hx - fyr / hy
    if perx:
        acc[0, :] += acc[ncx, :]
        acc = acc[:nx, :]
    if pery:
        acc[:, 0] += acc[:, ncy]
        acc = acc[:, :ny]
    mass = W * np.outer(chart.cell_widths(0), chart.cell_widths(1))
    return acc, mass


def laplace_beltrami(g, u, bc="neumann", period=None, gamma=None):
    """Laplace-Beltrami of a scalar (or lifted circle) field.

    bc="neumann": conservative flux form with zero-flux walls; integrates to
    exactly zero against the mass weights.  bc="none": non-divergence form
    g^ij (hess u)_ij with extrapolation ghosts, identical code path to
    trace(hessian), for fields carrying no boundary condition.
    """
    if bc == "none":
        return ScalarField(g.chart, trace(g, hessian(g, u, "none", period,
                                                     gamma)))
    if bc != "neumann":
        raise ValueError("bc must be 'neumann' or 'none'")
    acc, mass = neumann_operator(g, u, period)
    return ScalarField(g.chart, acc / mass)


# ---------------------------------------------------------------------------
# map (coupled field) calculus


def map_gradients(phi, bc="neumann"):
    """Lower gradients d_i phi^lam, list over components, lifted for circle
    kinds so they are independent of the angle representative."""
    chart = phi.chart
    out = []
    for k in range(phi.n_components):
        period = phi.period if phi.kinds[k] == "circle" else None
        out.append(grad_lower(chart, phi.component(k), bc, period))
    return out


def map_pullback(g, phi, alpha, bc="neumann"):
    """(energy density |grad phi|^2, pullback alpha * dphi x dphi, tension).

    tr_g(pullback) = alpha |grad phi|^2 holds exactly by construction.
    The tension of a flat-target map is the componentwise Laplacian with
    Neumann walls.
    """
    chart = g.chart
    grads = map_gradients(phi, bc)
    e = np.zeros(chart.shape)
    p11 = np.zeros(chart.shape)
    p12 = np.zeros(chart.shape)
    p22 = np.zeros(chart.shape)
    tension = np.zeros(chart.shape + (phi.n_components,))
    for k, (ux, uy) in enumerate(grads):
        e += (g.inv11 * ux * ux + 2.0 * g.inv12 * ux * uy
              + g.inv22 * uy * uy)
        p11 += ux * ux
        p12 += ux * uy
        p22 += uy * uy
        period = phi.period if phi.kinds[k] == "circle" else None
        tension[:, :, k] = laplace_beltrami(g, phi.component(k), bc,
                                            period).values
    pull = SymTensorField(chart, alpha * p11, alpha * p12, alpha * p22)
    return ScalarField(chart, e), pull, tension


def tension_sup_norm(g, phi, bc="neumann"):
    _, _, tau = map_pullback(g, phi, 1.0, bc)
    return float(np.abs(tau).max())


# ---------------------------------------------------------------------------
# boundary geometry


@dataclass(frozen=True)
class BoundaryEdge:
    """One boundary component: all nodes with fixed index along `axis`."""
    axis: int                   # normal axis (0 or 1)
    side: int                   # 0 = low end, 1 = high end
    index: int                  # node index along `axis`
    normal: np.ndarray          # contravariant outward unit normal, (m, 2)
    tangent: np.ndarray         # contravariant unit tangent, (m, 2)
    kg: np.ndarray              # geodesic curvature -g(grad_T T, n), (m,)
    dA: np.ndarray              # quadrature weights (corner nodes -> 0), (m,)

    def restrict(self, arr):
        """Restrict a node array to this edge (1-D of length m)."""
        return arr[self.index, :] if self.axis == 0 else arr[:, self.index]


@dataclass(frozen=True)
class BoundaryGeometry:
    chart: Chart
    edges: List[BoundaryEdge]

    def integrate(self, per_edge_values):
        """Sum of integral over edges; per_edge_values is a list aligned with
        self.edges of 1-D arrays (or a full node array to be restricted)."""
        total = 0.0
        for e, vals in zip(self.edges, per_edge_values):
            v = e.restrict(vals) if getattr(vals, "ndim", 1) == 2 else vals
            total += float(np.sum(v * e.dA))
        return total


def _edge_arrays(g, chart, axis, side, gamma):
    n_axis = chart.n(axis)
    idx = 0 if side == 0 else n_axis - 1
    t_ax = 1 - axis

    def at_edge(arr):
        return arr[idx, :] if axis == 0 else arr[:, idx]

    gcomp = ((g.g11, g.g12), (g.g12, g.g22))
    ginv = ((g.inv11, g.inv12), (g.inv12, g.inv22))
    g_tt = at_edge(gcomp[t_ax][t_ax])
    m = g_tt.shape[0]

    # unit tangent along the edge coordinate
    T = np.zeros((m, 2))
    T[:, t_ax] = 1.0 / np.sqrt(g_tt)

    # outward unit normal: raise the conormal +-dx^axis and normalise
    sign = 1.0 if side == 1 else -1.0
    inv_aa = at_edge(ginv[axis][axis])
    nvec = np.zeros((m, 2))
    nvec[:, 0] = sign * at_edge(ginv[0][axis]) / np.sqrt(inv_aa)
    nvec[:, 1] = sign * at_edge(ginv[1][axis]) / np.sqrt(inv_aa)

    # geodesic curvature: nabla_T T = T^t d_t(T^t) e_t + Gamma^k_tt (T^t)^2,
    # k_g = -g(nabla_T T, n).
    inv_sqrt_gtt_full = 1.0 / np.sqrt(gcomp[t_ax][t_ax])
    dt_invsqrt = d1(chart, inv_sqrt_gtt_full, t_ax)
    Tt = 1.0 / np.sqrt(g_tt)
    covTT = np.zeros((m, 2))
    covTT[:, t_ax] = Tt * at_edge(dt_invsqrt)
    for k in (0, 1):
        covTT[:, k] += at_edge(gamma[k][t_ax][t_ax]) * Tt * Tt
    g11e, g12e, g22e = at_edge(g.g11), at_edge(g.g12), at_edge(g.g22)
    kg = -(g11e * covTT[:, 0] * nvec[:, 0]
           + g12e * (covTT[:, 0] * nvec[:, 1] + covTT[:, 1] * nvec[:, 0])
           + g22e * covTT[:, 1] * nvec[:, 1])

    # measure: sqrt(g_tt) * tangential cell width; rectangle corners weigh 0
    dA = np.sqrt(g_tt) * chart.cell_widths(t_ax)
    if not chart.periodic[t_ax]:
        dA = dA.copy()
        dA[0] = dA[-1] = 0.0
    return BoundaryEdge(axis, side, idx, nvec, T, kg, dA)


def boundary_geometry(g, chart=None, gamma=None):
    chart = chart or g.chart
    if not chart.has_boundary:
        raise NoBoundary("chart %r has no boundary" % (chart.topology,))
    if gamma is None:
        gamma = christoffel(g)
    edges = [_edge_arrays(g, chart, axis, side, gamma)
             for axis, side in chart.boundary_edges()]
    return BoundaryGeometry(chart, edges)


def normal_derivative(g, edge, u, admissible=False, period=None):
    """d_n u = n^i d_i u on the edge.

    `admissible` declares the coordinate derivative across the wall to vanish
    (reflection closure): that component is then exactly zero and only the
    tangential part n^t d_t u survives, which is itself exactly zero when the
    metric is diagonal at the edge.  Otherwise both partials come from
    one-sided extrapolation stencils."""
    chart = g.chart
    v = _values(u)
    if admissible:
        t_ax = 1 - edge.axis
        ut = d1(chart, v, t_ax, "extrapolate", period)
        return edge.normal[:, t_ax] * edge.restrict(ut)
    ux = d1(chart, v, 0, "extrapolate", period)
    uy = d1(chart, v, 1, "extrapolate", period)
    return (edge.normal[:, 0] * edge.restrict(ux)
            + edge.normal[:, 1] * edge.restrict(uy))


def tangential_derivative(g, edge, u, period=None):
    """T^i d_i u on the edge (1/sqrt(g_tt) times the edge-coordinate slope)."""
    chart = g.chart
    t_ax = 1 - edge.axis
    ut = d1(chart, _values(u), t_ax, "extrapolate", period)
    return edge.tangent[:, t_ax] * edge.restrict(ut)


def second_fundamental_form(edge, g, X_edge):
    """Pi(X, X) = k_g g(X_T, X_T) for a contravariant X given on the edge as
    an (m, 2) array; X_T is the tangential projection."""
    g11e = edge.restrict(g.g11)
    g12e = edge.restrict(g.g12)
    g22e = edge.restrict(g.g22)
    Tx, Ty = edge.tangent[:, 0], edge.tangent[:, 1]
    gXT = (g11e * X_edge[:, 0] * Tx
           + g12e * (X_edge[:, 0] * Ty + X_edge[:, 1] * Tx)
           + g22e * X_edge[:, 1] * Ty)
    return edge.kg * gXT * gXT


# ---------------------------------------------------------------------------
# quadrature


def volume_element(g):
    """Nodewise dv weight: sqrt(det g) times the trapezoid cell area."""
    chart = g.chart
    return g.sqrt_det * np.outer(chart.cell_widths(0), chart.cell_widths(1))


def integrate(g, u, domain="volume", boundary=None):
    """Integral of a scalar field over the volume or the whole boundary.

    Summation is numpy's pairwise reduction over a fixed traversal order, so
    results are deterministic.
    """
    if domain == "volume":
        return float(np.sum(_values(u) * volume_element(g)))
    if domain == "boundary":
        bg = boundary or boundary_geometry(g)
        v = _values(u)
        return float(sum(np.sum(e.restrict(v) * e.dA) for e in bg.edges))
    raise ValueError("domain must be 'volume' or 'boundary'")
