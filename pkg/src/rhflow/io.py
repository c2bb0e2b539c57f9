"""Deterministic text serialization: entropy trace CSV and state snapshots.

Floats are rendered with %.17g (exact double round trip), lines end with LF,
NaN renders as "nan"; byte-for-byte reproducibility for a fixed config is a
tested property.  A snapshot is one self-describing file: a key = value
header (chart, time, reverse time, coupling) followed by node-major rows of
the field columns.
"""

import numpy as np

from .chart import Chart, FlowState, MapField, MetricField, ScalarField
from .errors import ParseError

TRACE_COLUMNS = (
    "t", "tau", "E_entropy", "F", "W_RH", "W_Perelman",
    "dE_fd", "dE_rhs", "dF_fd", "dF_rhs", "dW_fd", "dW_rhs",
    "min_S", "min_kg", "max_tension_residual", "conjheat_residual",
)

SNAPSHOT_MAGIC = "# rhflow snapshot 1"


def fmt(x):
    return "%.17g" % float(x)


def write_trace(path, rows):
    """rows: iterable of per-snapshot value sequences ordered like
    TRACE_COLUMNS (NaN for not-applicable entries)."""
    lines = [",".join(TRACE_COLUMNS)]
    for row in rows:
        if len(row) != len(TRACE_COLUMNS):
            raise ParseError("trace row has %d entries, need %d"
                             % (len(row), len(TRACE_COLUMNS)))
        lines.append(",".join(fmt(v) for v in row))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace(path):
    """-> dict column name -> float array."""
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("%s: empty trace" % path)
    names = lines[0].split(",")
    data = [[] for _ in names]
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(names):
            raise ParseError("%s:%d: %d fields, header has %d"
                             % (path, lineno, len(parts), len(names)),
                             line=lineno)
        for k, p in enumerate(parts):
            data[k].append(float(p))
    return {name: np.array(col) for name, col in zip(names, data)}


# ---------------------------------------------------------------------------
# snapshots


def write_snapshot(path, state):
    chart = state.chart
    phi = state.phi
    cols = ["g11", "g12", "g22"]
    cols += ["phi%d" % k for k in range(phi.n_components)]
    cols.append("f")
    head = [
        SNAPSHOT_MAGIC,
        "topology = %s" % chart.topology,
        "nx = %d" % chart.nx,
        "ny = %d" % chart.ny,
        "periodic = %d,%d" % (int(chart.periodic[0]), int(chart.periodic[1])),
        "origin = %s,%s" % (fmt(chart.origin[0]), fmt(chart.origin[1])),
        "extent = %s,%s" % (fmt(chart.extent[0]), fmt(chart.extent[1])),
        "t = %s" % fmt(state.t),
        "tau = %s" % ("none" if state.tau is None else fmt(state.tau)),
        "alpha = %s" % fmt(state.alpha),
        "phi_kinds = %s" % ",".join(phi.kinds),
        "phi_period = %s" % fmt(phi.period),
        "columns = %s" % " ".join(cols),
        "---",
    ]
    fields = [state.g.g11, state.g.g12, state.g.g22]
    fields += [phi.values[:, :, k] for k in range(phi.n_components)]
    fields.append(state.f.values)
    flat = [a.reshape(-1) for a in fields]
    n = chart.nx * chart.ny
    rows = [" ".join(fmt(col[i]) for col in flat) for i in range(n)]
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(head + rows) + "\n")


def _header_value(header, key, path):
    if key not in header:
        raise ParseError("%s: snapshot header missing %r" % (path, key))
    return header[key]


def read_snapshot(path):
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != SNAPSHOT_MAGIC:
        raise ParseError("%s: not a snapshot file (bad magic)" % path,
                         line=1)
    header = {}
    body_at = None
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "---":
            body_at = lineno
            break
        if "=" not in line:
            raise ParseError("%s:%d: expected key = value in header"
                             % (path, lineno), line=lineno)
        key, _, val = line.partition("=")
        header[key.strip()] = val.strip()
    if body_at is None:
        raise ParseError("%s: missing --- separator" % path)

    topology = _header_value(header, "topology", path)
    nx = int(_header_value(header, "nx", path))
    ny = int(_header_value(header, "ny", path))
    periodic = tuple(bool(int(v)) for v in header["periodic"].split(","))
    origin = tuple(float(v) for v in header["origin"].split(","))
    extent = tuple(float(v) for v in header["extent"].split(","))
    chart = Chart(topology, nx, ny, periodic, origin, extent)

    t = float(_header_value(header, "t", path))
    tau_raw = _header_value(header, "tau", path)
    tau = None if tau_raw == "none" else float(tau_raw)
    alpha = float(_header_value(header, "alpha", path))
    kinds = tuple(_header_value(header, "phi_kinds", path).split(","))
    period = float(_header_value(header, "phi_period", path))
    cols = _header_value(header, "columns", path).split()

    n = nx * ny
    body = lines[body_at:]
    if len(body) != n:
        raise ParseError("%s: %d data rows, chart needs %d"
                         % (path, len(body), n))
    raw = np.empty((n, len(cols)))
    for i, line in enumerate(body):
        parts = line.split()
        if len(parts) != len(cols):
            raise ParseError("%s:%d: %d fields, header declares %d"
                             % (path, body_at + 1 + i, len(parts),
                                len(cols)), line=body_at + 1 + i)
        raw[i] = [float(p) for p in parts]
    grids = {name: raw[:, k].reshape(nx, ny) for k, name in enumerate(cols)}

    g = MetricField(chart, grids["g11"], grids["g12"], grids["g22"])
    nphi = len(kinds)
    pv = np.stack([grids["phi%d" % k] for k in range(nphi)], axis=-1)
    phi = MapField(chart, pv, kinds, period)
    f = ScalarField(chart, grids["f"])
    return FlowState(t, tau, g, phi, f, alpha)
