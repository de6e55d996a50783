"""Reader for the benchmark's binary field snapshots plus derived fields.

The format is consumed from its documented layout only: a 96-byte
little-endian header (magic "MHD25\\0", uint16 version, uint32 nx/ny,
float64 domain bounds, time, gamma/mu/eta/kappa, 8 reserved bytes)
followed by nx*ny cells of 8 float64 values each, cell-major with y
fastest.  Per-cell variables: rho, rho*vx, rho*vy, rho*vz, Bx, By, Bz, e.
The CSV alternative (leading "# MHD25 csv" line) is detected and parsed
transparently.
"""

import re
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"MHD25\x00"
VERSION = 1
HEADER = struct.Struct("<6sHII4dd4d8x")
NVARS = 8

VAR_NAMES = ("rho", "mx", "my", "mz", "Bx", "By", "Bz", "e")


class SnapshotError(ValueError):
    """Malformed or unsupported snapshot file."""


@dataclass(frozen=True)
class Snapshot:
    data: np.ndarray       # (8, nx, ny)
    nx: int
    ny: int
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    time: float
    gamma: float
    mu: float
    eta: float
    kappa: float

    @property
    def hx(self):
        return (self.x_hi - self.x_lo) / self.nx

    @property
    def hy(self):
        return (self.y_hi - self.y_lo) / self.ny

    def cell_centers(self):
        x = self.x_lo + (np.arange(self.nx) + 0.5) * self.hx
        y = self.y_lo + (np.arange(self.ny) + 0.5) * self.hy
        return x, y


def read(path):
    """Read a snapshot, binary or the CSV alternative (sniffed by magic)."""
    with open(path, "rb") as fh:
        raw = fh.read(HEADER.size)
        if raw.startswith(b"# MHD25 csv"):
            return _read_csv(path)
        if len(raw) < HEADER.size:
            raise SnapshotError(f"{path}: truncated header")
        (magic, version, nx, ny, x_lo, x_hi, y_lo, y_hi, time,
         gamma, mu, eta, kappa) = HEADER.unpack(raw)
        if magic != MAGIC:
            raise SnapshotError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise SnapshotError(f"{path}: unsupported version {version}")
        flat = np.frombuffer(fh.read(), dtype="<f8")
    if flat.size != nx * ny * NVARS:
        raise SnapshotError(f"{path}: expected {nx * ny * NVARS} values, "
                            f"found {flat.size}")
    data = np.moveaxis(flat.reshape(nx, ny, NVARS), -1, 0).copy()
    return Snapshot(data=data, nx=nx, ny=ny, x_lo=x_lo, x_hi=x_hi,
                    y_lo=y_lo, y_hi=y_hi, time=time, gamma=gamma,
                    mu=mu, eta=eta, kappa=kappa)


_CSV_HEAD = re.compile(r"# MHD25 csv time=(\S+) nx=(\d+) ny=(\d+)")
_CSV_DOMAIN = re.compile(r"# domain=\[(\S+),(\S+)\]x\[(\S+),(\S+)\]")
_CSV_PARAMS = re.compile(r"# gamma=(\S+) mu=(\S+) eta=(\S+) kappa=(\S+)")


def _read_csv(path):
    with open(path) as fh:
        head = _CSV_HEAD.match(fh.readline())
        domain = _CSV_DOMAIN.match(fh.readline())
        params = _CSV_PARAMS.match(fh.readline())
        if not (head and domain and params):
            raise SnapshotError(f"{path}: malformed csv snapshot header")
        time = float(head.group(1))
        nx, ny = int(head.group(2)), int(head.group(3))
        x_lo, x_hi, y_lo, y_hi = (float(domain.group(i)) for i in range(1, 5))
        gamma, mu, eta, kappa = (float(params.group(i)) for i in range(1, 5))
        columns = fh.readline().strip().split(",")
        if columns[2:] != list(VAR_NAMES):
            raise SnapshotError(f"{path}: unexpected csv columns {columns}")
        body = np.loadtxt(fh, delimiter=",", ndmin=2)
    if body.shape != (nx * ny, NVARS + 2):
        raise SnapshotError(f"{path}: expected {nx * ny} csv rows, "
                            f"found shape {body.shape}")
    data = np.moveaxis(body[:, 2:].reshape(nx, ny, NVARS), -1, 0).copy()
    return Snapshot(data=data, nx=nx, ny=ny, x_lo=x_lo, x_hi=x_hi,
                    y_lo=y_lo, y_hi=y_hi, time=time, gamma=gamma,
                    mu=mu, eta=eta, kappa=kappa)


def _pad(field, odd_y=False):
    """One ghost layer: periodic in x, reflecting in y (odd flips sign)."""
    out = np.pad(field, ((1, 1), (0, 0)), mode="wrap")
    out = np.pad(out, ((0, 0), (1, 1)), mode="symmetric")
    if odd_y:
        out[:, 0] *= -1.0
        out[:, -1] *= -1.0
    return out


def current_z(snap):
    """J_z = d_x B_y - d_y B_x with the benchmark's centered stencil.

    Uses the benchmark problems' boundary convention: periodic in x,
    reflecting in y with B_y odd.
    """
    bx = _pad(snap.data[4])
    by = _pad(snap.data[5], odd_y=True)
    return (by[2:, 1:-1] - by[:-2, 1:-1]) / (2.0 * snap.hx) \
        - (bx[1:-1, 2:] - bx[1:-1, :-2]) / (2.0 * snap.hy)


def div_b(snap):
    """Centered divergence of the in-plane magnetic field."""
    bx = _pad(snap.data[4])
    by = _pad(snap.data[5], odd_y=True)
    return (bx[2:, 1:-1] - bx[:-2, 1:-1]) / (2.0 * snap.hx) \
        + (by[1:-1, 2:] - by[1:-1, :-2]) / (2.0 * snap.hy)


def field(snap, name):
    """Named scalar field, primitive or derived."""
    idx = {v: k for k, v in enumerate(VAR_NAMES)}
    if name in idx:
        return snap.data[idx[name]]
    rho = snap.data[0]
    if name in ("v_x", "v_y", "v_z"):
        return snap.data[1 + ("v_x", "v_y", "v_z").index(name)] / rho
    if name == "p":
        v2 = (snap.data[1] ** 2 + snap.data[2] ** 2 + snap.data[3] ** 2) / rho
        b2 = snap.data[4] ** 2 + snap.data[5] ** 2 + snap.data[6] ** 2
        return (snap.gamma - 1.0) * (snap.data[7] - 0.5 * v2 - 0.5 * b2)
    if name == "J_z":
        return current_z(snap)
    if name == "divB":
        return div_b(snap)
    raise ValueError(f"unknown field {name!r}; known: "
                     f"{', '.join(FIELD_NAMES)}")


FIELD_NAMES = VAR_NAMES + ("v_x", "v_y", "v_z", "p", "J_z", "divB")
