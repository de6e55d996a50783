"""2.5D resistive MHD right-hand side on a uniform cell-centered grid.

Conserved variables per cell: (rho, rho*vx, rho*vy, rho*vz, Bx, By, Bz, e).
All quantities depend on x and y only, but velocity and magnetic field
keep their z components.  Spatial derivatives use the classic
second-order centered stencil throughout, including inside the diffusive
fluxes, which makes the discrete divergence of B a preserved linear
invariant of the semi-discretization.

Energy closure: e = p/(gamma-1) + rho |v|^2 / 2 + |B|^2 / 2 (the factor
1/2 on the magnetic term is configurable through MhdParams.b_half for
consistency experiments, and is the convention used by all fluxes).
"""

from dataclasses import dataclass

import numpy as np

NVARS = 8
RHO, MX, MY, MZ, BX, BY, BZ, EN = range(NVARS)

# components that flip sign under a reflecting boundary, per axis
_ODD_X = (MX, BX)
_ODD_Y = (MY, BY)


class AdmissibilityError(ValueError):
    """State with non-positive density or pressure."""


@dataclass(frozen=True)
class Grid2D:
    """Uniform cell-centered grid on [x_lo, x_hi] x [y_lo, y_hi]."""

    nx: int
    ny: int
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError("grid needs at least 4 cells per direction")
        if self.x_hi <= self.x_lo or self.y_hi <= self.y_lo:
            raise ValueError("domain bounds must be increasing")

    @property
    def hx(self):
        return (self.x_hi - self.x_lo) / self.nx

    @property
    def hy(self):
        return (self.y_hi - self.y_lo) / self.ny

    def cell_centers(self):
        """x (nx,) and y (ny,) coordinates of cell centers."""
        x = self.x_lo + (np.arange(self.nx) + 0.5) * self.hx
        y = self.y_lo + (np.arange(self.ny) + 0.5) * self.hy
        return x, y

    @property
    def n_dof(self):
        return NVARS * self.nx * self.ny


@dataclass(frozen=True)
class MhdParams:
    """Dimensionless dissipation parameters and adiabatic index."""

    mu: float = 0.0      # viscosity, inverse Reynolds number
    eta: float = 0.0     # resistivity, inverse Lundquist number
    kappa: float = 0.0   # thermal conductivity, inverse Prandtl number
    gamma: float = 5.0 / 3.0
    b_half: bool = True  # e = p/(g-1) + rho v^2/2 + |B|^2/2 when True

    def __post_init__(self):
        if min(self.mu, self.eta, self.kappa) < 0:
            raise ValueError("dissipation parameters must be non-negative")
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")


@dataclass(frozen=True)
class BoundaryPolicy:
    """Per-axis ghost-fill policy: periodic | reflect | zero-gradient."""

    x: str = "periodic"
    y: str = "reflect"

    _VALID = ("periodic", "reflect", "zero-gradient")

    def __post_init__(self):
        for pol in (self.x, self.y):
            if pol not in self._VALID:
                raise ValueError(f"unknown boundary policy {pol!r}")


def state_to_vector(U):
    return np.ascontiguousarray(U).reshape(-1)

def vector_to_state(y, grid):
    return y.reshape(NVARS, grid.nx, grid.ny)


def _magnetic_energy(U, params):
    b2 = U[BX] ** 2 + U[BY] ** 2 + U[BZ] ** 2
    return 0.5 * b2 if params.b_half else b2


def _worst_cell(field):
    return tuple(int(v) for v in
                 np.unravel_index(int(np.argmin(field)), field.shape))


def pressure(U, params, check=True):
    """Pointwise pressure field from conserved variables.

    Raises AdmissibilityError (naming the first offending cell) when the
    density or the recovered pressure is non-positive.
    """
    rho = U[RHO]
    if check and np.any(rho <= 0.0):
        i = _worst_cell(rho)
        raise AdmissibilityError(f"non-positive density at cell {i}: {rho[i]}")
    kin = 0.5 * (U[MX] ** 2 + U[MY] ** 2 + U[MZ] ** 2) / rho
    p = (params.gamma - 1.0) * (U[EN] - kin - _magnetic_energy(U, params))
    if check and np.any(p <= 0.0):
        i = _worst_cell(p)
        raise AdmissibilityError(f"non-positive pressure at cell {i}: {p[i]}")
    return p


def energy_from(rho, v, B, p, params):
    """Total energy density for given primitives (inverse of pressure)."""
    v = np.asarray(v)
    B = np.asarray(B)
    kin = 0.5 * rho * (v[0] ** 2 + v[1] ** 2 + v[2] ** 2)
    mag = B[0] ** 2 + B[1] ** 2 + B[2] ** 2
    mag = 0.5 * mag if params.b_half else mag
    return p / (params.gamma - 1.0) + kin + mag


def apply_ghosts(U, bc, width=2):
    """Pad the state with ghost cells per the boundary policy."""
    pads = ((0, 0), (width, width), (width, width))

    def pad_axis(arr, axis, policy, odd_components):
        if policy == "periodic":
            return np.pad(arr, _axis_pad(axis, width), mode="wrap")
        if policy == "zero-gradient":
            return np.pad(arr, _axis_pad(axis, width), mode="edge")
        out = np.pad(arr, _axis_pad(axis, width), mode="symmetric")
        sl_lo = [slice(None)] * 3
        sl_hi = [slice(None)] * 3
        sl_lo[axis] = slice(0, width)
        sl_hi[axis] = slice(-width, None)
        for comp in odd_components:
            out[(comp, *sl_lo[1:])] *= -1.0
            out[(comp, *sl_hi[1:])] *= -1.0
        return out

    out = pad_axis(U, 1, bc.x, _ODD_X)
    out = pad_axis(out, 2, bc.y, _ODD_Y)
    return out


def _axis_pad(axis, width):
    pads = [(0, 0), (0, 0), (0, 0)]
    pads[axis] = (width, width)
    return tuple(pads)


def hyperbolic_flux(U, params, check=True):
    """Ideal-MHD flux tensors (x-flux, y-flux), each shaped like U."""
    rho = U[RHO]
    v = U[MX:MZ + 1] / rho
    B = U[BX:BZ + 1]
    p = pressure(U, params, check=check)
    ptot = p + 0.5 * (B[0] ** 2 + B[1] ** 2 + B[2] ** 2)
    bdotv = B[0] * v[0] + B[1] * v[1] + B[2] * v[2]

    fx = np.empty_like(U)
    fy = np.empty_like(U)
    fx[RHO] = U[MX]
    fy[RHO] = U[MY]
    for d, md in enumerate((MX, MY, MZ)):
        fx[md] = rho * v[d] * v[0] - B[d] * B[0]
        fy[md] = rho * v[d] * v[1] - B[d] * B[1]
    fx[MX] += ptot
    fy[MY] += ptot
    for d, bd in enumerate((BX, BY, BZ)):
        fx[bd] = v[0] * B[d] - B[0] * v[d]
        fy[bd] = v[1] * B[d] - B[1] * v[d]
    fx[EN] = (U[EN] + ptot) * v[0] - B[0] * bdotv
    fy[EN] = (U[EN] + ptot) * v[1] - B[1] * bdotv
    return fx, fy


def _ddx(f, hx):
    """Centered x-derivative on the interior (loses one cell per side)."""
    return (f[..., 2:, 1:-1] - f[..., :-2, 1:-1]) / (2.0 * hx)


def _ddy(f, hy):
    return (f[..., 1:-1, 2:] - f[..., 1:-1, :-2]) / (2.0 * hy)


def diffusive_flux(Up, params, grid, check=True):
    """Diffusive flux tensors on the once-shrunk padded field.

    ``Up`` must carry at least one ghost layer beyond the region where
    fluxes are requested; the returned arrays are smaller than ``Up`` by
    one cell on each side.
    """
    hx, hy = grid.hx, grid.hy
    rho = Up[RHO]
    v = Up[MX:MZ + 1] / rho
    B = Up[BX:BZ + 1]
    p = pressure(Up, params, check=check)
    T = p / rho

    inner = (slice(1, -1), slice(1, -1))
    dvx = _ddx(v, hx)          # (3, nx', ny') = d v_d / dx
    dvy = _ddy(v, hy)
    dBx = _ddx(B, hx)
    dBy = _ddy(B, hy)
    divv = dvx[0] + dvy[1]

    shape = (NVARS,) + dvx.shape[1:]
    fx = np.zeros(shape)
    fy = np.zeros(shape)

    mu, eta, kap, g = params.mu, params.eta, params.kappa, params.gamma
    vi = v[(slice(None), *inner)]
    Bi = B[(slice(None), *inner)]

    # stress tensor tau_dc = d_c v_d + d_d v_c - (2/3) div(v) delta_dc
    tau_xx = 2.0 * dvx[0] - (2.0 / 3.0) * divv
    tau_yy = 2.0 * dvy[1] - (2.0 / 3.0) * divv
    tau_xy = dvy[0] + dvx[1]
    tau_zx = dvx[2]
    tau_zy = dvy[2]
    fx[MX] = mu * tau_xx
    fy[MX] = mu * tau_xy
    fx[MY] = mu * tau_xy
    fy[MY] = mu * tau_yy
    fx[MZ] = mu * tau_zx
    fy[MZ] = mu * tau_zy

    # resistive term eta (dB - dB^T): component (d, c) = d_c B_d - d_d B_c
    fx[BY] = eta * (dBx[1] - dBy[0])
    fy[BX] = -fx[BY]
    fx[BZ] = eta * dBx[2]
    fy[BZ] = eta * dBy[2]

    # energy: mu tau.v + gamma mu kappa/(gamma-1) grad T
    #         + eta (grad(B.B)/2 - (B.grad)B)
    heat = g * mu * kap / (g - 1.0)
    fx[EN] = mu * (tau_xx * vi[0] + tau_xy * vi[1] + tau_zx * vi[2]) \
        + heat * _ddx(T[None], hx)[0] \
        + eta * (Bi[1] * (dBx[1] - dBy[0]) + Bi[2] * dBx[2])
    fy[EN] = mu * (tau_xy * vi[0] + tau_yy * vi[1] + tau_zy * vi[2]) \
        + heat * _ddy(T[None], hy)[0] \
        + eta * (Bi[0] * (dBy[0] - dBx[1]) + Bi[2] * dBy[2])
    return fx, fy


def rhs(U, params, grid, bc, check=True):
    """Semi-discrete right-hand side dU/dt = -div F_h + div F_d."""
    hx, hy = grid.hx, grid.hy
    Up = apply_ghosts(U, bc, width=2)
    fh_x, fh_y = hyperbolic_flux(Up, params, check=check)
    fd_x, fd_y = diffusive_flux(Up, params, grid, check=check)
    gx = fh_x[:, 1:-1, 1:-1] - fd_x
    gy = fh_y[:, 1:-1, 1:-1] - fd_y
    return -_ddx(gx, hx) - _ddy(gy, hy)


def make_rhs(params, grid, bc, check=True):
    """Flat-vector right-hand-side closure for the time integrators."""
    def f(y):
        U = vector_to_state(np.asarray(y, dtype=float), grid)
        return state_to_vector(rhs(U, params, grid, bc, check=check))
    return f


def div_B(U, grid, bc):
    """Centered-difference divergence of the in-plane magnetic field.

    Returns the (nx, ny) divergence field and its max absolute value.
    """
    Up = apply_ghosts(U, bc, width=1)
    d = (Up[BX, 2:, 1:-1] - Up[BX, :-2, 1:-1]) / (2.0 * grid.hx) \
        + (Up[BY, 1:-1, 2:] - Up[BY, 1:-1, :-2]) / (2.0 * grid.hy)
    return d, float(np.max(np.abs(d)))


def current_J(U, grid, bc):
    """Centered-difference current J = curl B, shape (3, nx, ny)."""
    Up = apply_ghosts(U, bc, width=1)
    B = Up[BX:BZ + 1]
    dBx = _ddx(B, grid.hx)
    dBy = _ddy(B, grid.hy)
    J = np.empty((3, grid.nx, grid.ny))
    J[0] = dBy[2]               # d_y B_z
    J[1] = -dBx[2]              # -d_x B_z
    J[2] = dBx[1] - dBy[0]      # d_x B_y - d_y B_x
    return J
