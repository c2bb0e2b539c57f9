"""Chart construction, field containers, validation."""

import numpy as np
import pytest

from rhflow.chart import (MIN_NODES, FlowState, MapField, MetricField,
                          ScalarField, constant_field, constant_map,
                          constant_metric, identity_metric, make_chart)
from rhflow.errors import InvalidDimensions, InvalidParam, NotSPD


def test_rectangle_spacing_and_coords():
    ch = make_chart("rectangle", 9, 17, Lx=2.0, Ly=1.0)
    assert ch.periodic == (False, False)
    assert ch.hx == pytest.approx(2.0 / 8)
    assert ch.hy == pytest.approx(1.0 / 16)
    x = ch.axis_coords(0)
    assert x[0] == 0.0 and x[-1] == pytest.approx(2.0)
    X, Y = ch.coords()
    assert X.shape == (9, 17)
    assert X[3, 0] == pytest.approx(x[3])


def test_cylinder_periodic_axis():
    ch = make_chart("cylinder", 32, 16, Ly=1.0, period=2 * np.pi)
    assert ch.periodic == (True, False)
    # periodic spacing P/n, last node one step short of the seam
    assert ch.hx == pytest.approx(2 * np.pi / 32)
    x = ch.axis_coords(0)
    assert x[-1] == pytest.approx(2 * np.pi - ch.hx)
    assert ch.hy == pytest.approx(1.0 / 15)


def test_polar_annulus_extents():
    ch = make_chart("polar_annulus", 16, 24, r_min=0.25)
    assert ch.periodic == (False, True)
    r = ch.axis_coords(0)
    assert r[0] == pytest.approx(0.25) and r[-1] == pytest.approx(1.0)
    th = ch.axis_coords(1)
    assert th[-1] == pytest.approx(2 * np.pi - ch.hy)


def test_cell_widths_cover_extent():
    ch = make_chart("rectangle", 11, 9, Lx=3.0, Ly=2.0)
    assert np.sum(ch.cell_widths(0)) == pytest.approx(3.0)
    assert ch.cell_widths(0)[0] == pytest.approx(ch.hx / 2)
    cyl = make_chart("cylinder", 12, 8)
    assert np.sum(cyl.cell_widths(0)) == pytest.approx(2 * np.pi)
    assert np.all(cyl.cell_widths(0) == cyl.hx)


def test_boundary_edges_by_topology():
    assert len(make_chart("rectangle", 8, 8).boundary_edges()) == 4
    cyl = make_chart("cylinder", 8, 8)
    assert cyl.boundary_edges() == [(1, 0), (1, 1)]
    ann = make_chart("polar_annulus", 8, 8).boundary_edges()
    assert ann == [(0, 0), (0, 1)]
    assert make_chart("cylinder", 8, 8).has_boundary


def test_dimension_validation():
    with pytest.raises(InvalidDimensions):
        make_chart("rectangle", MIN_NODES - 1, 8)
    with pytest.raises(InvalidDimensions):
        make_chart("cylinder", 8, 7)
    with pytest.raises(InvalidParam):
        make_chart("moebius", 8, 8)
    with pytest.raises(InvalidParam):
        make_chart("rectangle", 8, 8, Lx=-1.0)
    with pytest.raises(InvalidParam):
        make_chart("polar_annulus", 8, 8, r_min=1.5)


def test_metric_spd_validation():
    ch = make_chart("rectangle", 8, 8)
    g11 = np.ones(ch.shape)
    g12 = np.zeros(ch.shape)
    g22 = np.ones(ch.shape)
    g22[3, 4] = -0.5
    with pytest.raises(NotSPD) as exc:
        MetricField(ch, g11, g12, g22)
    assert exc.value.node == (3, 4)
    bad12 = g12.copy()
    bad12[1, 1] = 2.0  # det < 0
    with pytest.raises(NotSPD):
        MetricField(ch, g11, bad12, np.ones(ch.shape))
    with pytest.raises(NotSPD):
        MetricField(ch, g11 * np.nan, g12, np.ones(ch.shape))


def test_metric_inverse_cached():
    ch = make_chart("rectangle", 8, 8)
    g = constant_metric(ch, 2.0, 0.5, 1.0)
    det = 2.0 * 1.0 - 0.25
    assert g.inv11[0, 0] == pytest.approx(1.0 / det)
    assert g.inv12[0, 0] == pytest.approx(-0.5 / det)
    assert g.inv22[0, 0] == pytest.approx(2.0 / det)
    assert g.sqrt_det[0, 0] == pytest.approx(np.sqrt(det))


def test_fields_are_immutable():
    ch = make_chart("rectangle", 8, 8)
    f = constant_field(ch, 1.0)
    with pytest.raises(ValueError):
        f.values[0, 0] = 2.0
    g = identity_metric(ch)
    with pytest.raises(ValueError):
        g.g11[0, 0] = 3.0


def test_map_field_components():
    ch = make_chart("cylinder", 8, 8)
    x, y = ch.coords()
    phi = MapField(ch, np.stack([x, y], axis=-1), ("circle", "linear"))
    assert phi.n_components == 2
    assert phi.kinds == ("circle", "linear")
    np.testing.assert_array_equal(phi.component(0), x)
    phi2 = phi.with_values(phi.values * 1.0)
    assert phi2.kinds == phi.kinds
    with pytest.raises(InvalidDimensions):
        MapField(ch, np.stack([x, y], axis=-1), ("circle",))
    with pytest.raises(InvalidParam):
        MapField(ch, x[..., None], ("spiral",))


def test_flow_state_validation():
    ch = make_chart("cylinder", 8, 8)
    g = identity_metric(ch)
    phi = constant_map(ch, [0.0])
    f = constant_field(ch, 0.0)
    st = FlowState(0.0, 1.0, g, phi, f, alpha=2.0)
    assert st.chart is ch
    with pytest.raises(InvalidParam):
        FlowState(0.0, 1.0, g, phi, f, alpha=0.0)


def test_scalar_field_chart_shape_check():
    ch = make_chart("rectangle", 8, 10)
    with pytest.raises(InvalidDimensions):
        ScalarField(ch, np.zeros((8, 8)))
