"""Finite-difference stencils built from forward-difference bundles.

Every derivative in the package is assembled from the per-axis bundle of
forward differences D_i = u_{i+1} - u_i extended by one ghost difference at
each end of a bounded axis:

    extrapolate   D_{-1} = 3 D_0 - 3 D_1 + D_2      (cubic ghost node; gives
                  the standard second-order one-sided stencils at the ends)
    reflect       D_{-1} = -D_0                     (Neumann ghost u_{-1}=u_1;
                  first derivative is exactly zero at the wall)

Periodic axes wrap.  Node i then sees a left difference B[i] and a right
difference B[i+1], and

    d1 = (B[i] + B[i+1]) / (2h)        d2 = (B[i+1] - B[i]) / h^2

which is centered second order in the interior and one-sided second order at
bounded ends.  Circle-valued data passes period: every difference (including
the periodic seam) is lifted to the nearest representative before use, so
results do not depend on the chosen angle representatives.
"""

import numpy as np


def _wrap(d, period):
    return d - period * np.round(d / period)


def diff_bundle(u, axis, periodic, mode="extrapolate", period=None):
    """Forward differences along `axis` with one ghost at each end.

    Returns an array whose size along `axis` is n+1; position k holds
    D_{k-1}, so node i owns (B[i], B[i+1]).
    """
    u = np.asarray(u, float)
    d = np.diff(u, axis=axis)
    if period is not None:
        d = _wrap(d, period)
    if periodic:
        seam = np.take(u, [0], axis=axis) - np.take(u, [-1], axis=axis)
        if period is not None:
            seam = _wrap(seam, period)
        return np.concatenate([seam, d, seam], axis=axis)
    if mode == "reflect":
        lo = -np.take(d, [0], axis=axis)
        hi = -np.take(d, [-1], axis=axis)
    elif mode == "extrapolate":
        d0, d1, d2 = (np.take(d, [k], axis=axis) for k in (0, 1, 2))
        e0, e1, e2 = (np.take(d, [k], axis=axis) for k in (-1, -2, -3))
        lo = 3.0 * d0 - 3.0 * d1 + d2
        hi = 3.0 * e0 - 3.0 * e1 + e2
    else:
        raise ValueError("unknown ghost mode %r" % (mode,))
    return np.concatenate([lo, d, hi], axis=axis)


def _take_range(b, axis, start, stop):
    sl = [slice(None)] * b.ndim
    sl[axis] = slice(start, stop)
    return b[tuple(sl)]


def d1_from_bundle(b, axis, h):
    n = b.shape[axis] - 1
    return (_take_range(b, axis, 0, n) + _take_range(b, axis, 1, n + 1)) / (2.0 * h)


def d2_from_bundle(b, axis, h):
    n = b.shape[axis] - 1
    return (_take_range(b, axis, 1, n + 1) - _take_range(b, axis, 0, n)) / (h * h)


def d1(chart, u, axis, mode="extrapolate", period=None):
    b = diff_bundle(u, axis, chart.periodic[axis], mode, period)
    return d1_from_bundle(b, axis, chart.spacing(axis))


def d2(chart, u, axis, mode="extrapolate", period=None):
    b = diff_bundle(u, axis, chart.periodic[axis], mode, period)
    return d2_from_bundle(b, axis, chart.spacing(axis))


def d_cross(chart, u, mode=("extrapolate", "extrapolate"), period=None):
    """Mixed second derivative d^2 u / dx dy.  The lift (if any) applies to
    the first differentiation only; after that the data is single-valued."""
    ux = d1(chart, u, 0, mode[0], period)
    return d1(chart, ux, 1, mode[1], None)


def grad_components(chart, u, mode=("extrapolate", "extrapolate"), period=None):
    """(du/dx, du/dy) with per-axis ghost modes."""
    return (d1(chart, u, 0, mode[0], period),
            d1(chart, u, 1, mode[1], period))
