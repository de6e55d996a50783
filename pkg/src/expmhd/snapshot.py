"""Binary and CSV snapshot formats for 2D field states.

Binary layout (little-endian), 96-byte header followed by the cell
data:

    offset  size  field
    0       6     magic  b"MHD25\\0"
    6       2     format version (uint16, currently 1)
    8       4     nx (uint32)
    12      4     ny (uint32)
    16      32    x_lo, x_hi, y_lo, y_hi (float64)
    48      8     simulation time (float64)
    56      32    gamma, mu, eta, kappa (float64)
    88      8     reserved (zero)

Data: nx * ny cells in row-major (y fastest) order, 8 float64 values per
cell in the order rho, rho*vx, rho*vy, rho*vz, Bx, By, Bz, e.

The CSV alternative (intended for small grids) has one row per cell
with columns x, y followed by the same 8 variables, and the header
metadata in leading comment lines.
"""

import io
import struct

import numpy as np

from .mhd import NVARS, Grid2D, MhdParams

MAGIC = b"MHD25\x00"
VERSION = 1
_HEADER = struct.Struct("<6sHII4dd4d8x")
HEADER_SIZE = _HEADER.size

_CSV_COLUMNS = ["x", "y", "rho", "mx", "my", "mz", "Bx", "By", "Bz", "e"]


class SnapshotFormatError(ValueError):
    """Malformed snapshot file."""


def write_snapshot(path, U, grid, time, params):
    """Write a binary field snapshot."""
    U = np.asarray(U, dtype=float)
    if U.shape != (NVARS, grid.nx, grid.ny):
        raise ValueError(f"state shape {U.shape} does not match grid "
                         f"({NVARS}, {grid.nx}, {grid.ny})")
    header = _HEADER.pack(MAGIC, VERSION, grid.nx, grid.ny,
                          grid.x_lo, grid.x_hi, grid.y_lo, grid.y_hi,
                          float(time),
                          params.gamma, params.mu, params.eta, params.kappa)
    # (8, nx, ny) -> cell-major (nx, ny, 8)
    data = np.ascontiguousarray(np.moveaxis(U, 0, -1))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.astype("<f8").tobytes())


def read_snapshot(path):
    """Read a binary snapshot; returns (U, grid, time, params)."""
    with open(path, "rb") as fh:
        raw = fh.read(HEADER_SIZE)
        if len(raw) < HEADER_SIZE:
            raise SnapshotFormatError(f"{path}: truncated header")
        (magic, version, nx, ny, x_lo, x_hi, y_lo, y_hi,
         time, gamma, mu, eta, kappa) = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise SnapshotFormatError(f"{path}: unsupported version {version}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    expected = nx * ny * NVARS
    if data.size != expected:
        raise SnapshotFormatError(
            f"{path}: expected {expected} values, found {data.size}")
    U = np.moveaxis(data.reshape(nx, ny, NVARS), -1, 0).copy()
    grid = Grid2D(nx, ny, x_lo, x_hi, y_lo, y_hi)
    params = MhdParams(mu=mu, eta=eta, kappa=kappa, gamma=gamma)
    return U, grid, time, params


def write_snapshot_csv(path, U, grid, time, params):
    """Write the CSV alternative of the snapshot (small grids)."""
    U = np.asarray(U, dtype=float)
    x, y = grid.cell_centers()
    buf = io.StringIO()
    buf.write(f"# MHD25 csv time={time!r} nx={grid.nx} ny={grid.ny}\n")
    buf.write(f"# domain=[{grid.x_lo!r},{grid.x_hi!r}]x[{grid.y_lo!r},{grid.y_hi!r}]\n")
    buf.write(f"# gamma={params.gamma!r} mu={params.mu!r} "
              f"eta={params.eta!r} kappa={params.kappa!r}\n")
    buf.write(",".join(_CSV_COLUMNS) + "\n")
    for i in range(grid.nx):
        for j in range(grid.ny):
            vals = [x[i], y[j]] + [U[k, i, j] for k in range(NVARS)]
            # repr of a Python float round-trips; numpy scalars do not
            buf.write(",".join(repr(float(v)) for v in vals) + "\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())
