"""Discrete parameter domains (charts) and the field containers living on them.

A chart is a single uniform logical grid [0..nx-1] x [0..ny-1] with per-axis
periodicity flags.  Three topologies are supported:

  rectangle      x in [0, Lx], y in [0, Ly], both axes bounded (4 edges)
  cylinder       x periodic with period P, y in [0, Ly] (2 boundary circles)
  polar_annulus  r in [r_min, 1] on axis 0, theta periodic on axis 1
                 (2 boundary circles; r_min > 0 keeps the pole out)

Fields are immutable: their arrays are set non-writeable at construction and
every operation returns a new field.  Shapes are (nx, ny) node-major, index
[i, j] = (axis0, axis1).
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidDimensions, InvalidParam, NotSPD

TWO_PI = 2.0 * np.pi

MIN_NODES = 8


def _frozen(a):
    # always copy: freezing an aliased caller array in place is a footgun
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Chart:
    """Uniform grid over one of the three supported topologies.

    periodic[k] marks axis k as wrap-around; a periodic axis has n equally
    spaced nodes covering [0, extent) with spacing extent/n, a bounded axis
    has n nodes covering [lo, hi] with spacing (hi-lo)/(n-1).
    """

    topology: str
    nx: int
    ny: int
    periodic: Tuple[bool, bool]
    origin: Tuple[float, float]     # coordinate of node (0, 0)
    extent: Tuple[float, float]     # axis lengths (period for periodic axes)

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def hx(self):
        return self.extent[0] / (self.nx if self.periodic[0] else self.nx - 1)

    @property
    def hy(self):
        return self.extent[1] / (self.ny if self.periodic[1] else self.ny - 1)

    def spacing(self, axis):
        return self.hx if axis == 0 else self.hy

    def n(self, axis):
        return self.nx if axis == 0 else self.ny

    def axis_coords(self, axis):
        h = self.spacing(axis)
        return self.origin[axis] + h * np.arange(self.n(axis))

    def coords(self):
        """Meshgrid (X0, X1) of node coordinates, each shaped (nx, ny)."""
        x = self.axis_coords(0)
        y = self.axis_coords(1)
        return np.meshgrid(x, y, indexing="ij")

    def cell_widths(self, axis):
        """Trapezoid quadrature weights per node along one axis."""
        n, h = self.n(axis), self.spacing(axis)
        w = np.full(n, h)
        if not self.periodic[axis]:
            w[0] = w[-1] = 0.5 * h
        return w

    def boundary_edges(self):
        """Edges as (axis, side) pairs, side 0 = low end, 1 = high end."""
        edges = []
        for axis in (0, 1):
            if not self.periodic[axis]:
                edges.append((axis, 0))
                edges.append((axis, 1))
        return edges

    @property
    def has_boundary(self):
        return not (self.periodic[0] and self.periodic[1])

    def boundary_mask(self):
        m = np.zeros((self.nx, self.ny), dtype=bool)
        if not self.periodic[0]:
            m[0, :] = m[-1, :] = True
        if not self.periodic[1]:
            m[:, 0] = m[:, -1] = True
        return m


def make_chart(topology, nx, ny, Lx=1.0, Ly=1.0, period=TWO_PI, r_min=0.05):
    """Build a chart.  Geometry parameters by topology:

    rectangle:     Lx, Ly
    cylinder:      period (axis 0), Ly
    polar_annulus: r_min (axis 0 spans [r_min, 1]; axis 1 is theta, period 2 pi)
    """
    nx, ny = int(nx), int(ny)
    if nx < MIN_NODES or ny < MIN_NODES:
        raise InvalidDimensions(
            "node counts must be >= %d, got %dx%d" % (MIN_NODES, nx, ny))
    if topology == "rectangle":
        if Lx <= 0 or Ly <= 0:
            raise InvalidParam("rectangle extents must be positive")
        return Chart("rectangle", nx, ny, (False, False), (0.0, 0.0), (Lx, Ly))
    if topology == "cylinder":
        if period <= 0 or Ly <= 0:
            raise InvalidParam("cylinder period and Ly must be positive")
        return Chart("cylinder", nx, ny, (True, False), (0.0, 0.0), (period, Ly))
    if topology == "polar_annulus":
        if not (0.0 < r_min < 1.0):
            raise InvalidParam("r_min must lie in (0, 1), got %r" % (r_min,))
        return Chart("polar_annulus", nx, ny, (False, True),
                     (r_min, 0.0), (1.0 - r_min, TWO_PI))
    raise InvalidParam("unknown topology %r" % (topology,))


def _check_chart_shape(chart, a, name):
    if a.shape[:2] != chart.shape:
        raise InvalidDimensions(
            "%s shape %s does not match chart %s" % (name, a.shape, chart.shape))


@dataclass(frozen=True)
class ScalarField:
    chart: Chart
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        _check_chart_shape(self.chart, self.values, "ScalarField")


@dataclass(frozen=True)
class VectorField:
    """Contravariant components, shape (nx, ny, 2)."""
    chart: Chart
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        _check_chart_shape(self.chart, self.values, "VectorField")
        if self.values.shape[2:] != (2,):
            raise InvalidDimensions("VectorField needs trailing axis 2")


@dataclass(frozen=True)
class SymTensorField:
    """Covariant symmetric 2-tensor stored as components (t11, t12, t22)."""
    chart: Chart
    t11: np.ndarray
    t12: np.ndarray
    t22: np.ndarray

    def __post_init__(self):
        for name in ("t11", "t12", "t22"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
            _check_chart_shape(self.chart, getattr(self, name), name)

    def components(self):
        return self.t11, self.t12, self.t22


@dataclass(frozen=True)
class MapField:
    """Target values of the coupled map, components stacked on the last axis.

    kinds[k] is "linear" (values in R) or "circle" (angle values; every
    derivative stencil uses lifted differences mod period so the map is a
    well-defined circle map regardless of representative).
    """
    chart: Chart
    values: np.ndarray              # (nx, ny, N)
    kinds: Tuple[str, ...]
    period: float = TWO_PI

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        _check_chart_shape(self.chart, self.values, "MapField")
        if self.values.ndim != 3 or self.values.shape[2] != len(self.kinds):
            raise InvalidDimensions("MapField component count mismatch")
        for k in self.kinds:
            if k not in ("linear", "circle"):
                raise InvalidParam("map component kind must be linear|circle")
        if self.period <= 0:
            raise InvalidParam("map period must be positive")

    @property
    def n_components(self):
        return len(self.kinds)

    def component(self, k):
        return self.values[:, :, k]

    def with_values(self, values):
        return MapField(self.chart, values, self.kinds, self.period)


class MetricField:
    """SPD metric g_ij with cached inverse and area element.

    Construction validates pointwise positivity (g11 > 0 and det g > 0) and
    caches g^ij and sqrt(det g); fields are read-only.
    """

    def __init__(self, chart, g11, g12, g22):
        g11 = np.asarray(g11, float)
        g12 = np.asarray(g12, float)
        g22 = np.asarray(g22, float)
        for name, a in (("g11", g11), ("g12", g12), ("g22", g22)):
            _check_chart_shape(chart, a, name)
        det = g11 * g22 - g12 * g12
        if not np.all(np.isfinite(det)):
            raise NotSPD("metric has non-finite entries")
        bad = (g11 <= 0) | (det <= 0)
        if bad.any():
            i, j = np.unravel_index(np.argmax(bad), bad.shape)
            raise NotSPD("metric not SPD at node (%d, %d): g11=%g det=%g"
                         % (i, j, g11[i, j], det[i, j]), node=(int(i), int(j)))
        self.chart = chart
        self.g11 = _frozen(g11)
        self.g12 = _frozen(g12)
        self.g22 = _frozen(g22)
        self.det = _frozen(det)
        self.sqrt_det = _frozen(np.sqrt(det))
        self.inv11 = _frozen(g22 / det)
        self.inv12 = _frozen(-g12 / det)
        self.inv22 = _frozen(g11 / det)

    def components(self):
        return self.g11, self.g12, self.g22

    def inverse_components(self):
        return self.inv11, self.inv12, self.inv22

    def as_tensor(self):
        return SymTensorField(self.chart, self.g11, self.g12, self.g22)


@dataclass(frozen=True)
class FlowState:
    """One time slice of any of the flow systems."""
    t: float
    tau: Optional[float]
    g: MetricField
    phi: MapField
    f: ScalarField
    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise InvalidParam("alpha must be positive, got %g" % self.alpha)

    @property
    def chart(self):
        return self.g.chart


def constant_field(chart, value):
    return ScalarField(chart, np.full(chart.shape, float(value)))


def constant_map(chart, values, kinds=None, period=TWO_PI):
    values = np.atleast_1d(np.asarray(values, float))
    if kinds is None:
        kinds = ("linear",) * values.size
    arr = np.broadcast_to(values, chart.shape + (values.size,)).copy()
    return MapField(chart, arr, kinds, period)


def constant_metric(chart, g11, g12, g22):
    """Constant-coefficient metric; raises NotSPD when not positive-definite."""
    full = np.full(chart.shape, float(g11)), np.full(chart.shape, float(g12)), \
        np.full(chart.shape, float(g22))
    return MetricField(chart, *full)


def identity_metric(chart):
    return constant_metric(chart, 1.0, 0.0, 1.0)
