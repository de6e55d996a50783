"""Benchmark orchestration: runs, references, errors, CSV records.

A flat key=value config file describes one experiment: problem, grid,
physical parameters, method and a sweep over tolerances or step sizes.
Achieved errors are measured against a cached high-accuracy reference
that is cross-checked between two independent integrators before use.
"""

import hashlib
import math
import os
import time as _time
from dataclasses import dataclass

import numpy as np

from . import mhd
from .epirk import StepController, StepStats, StiffnessFailure, integrate_adaptive, integrate_fixed
from .krylov import KrylovConvergenceError
from .mhd import AdmissibilityError, BoundaryPolicy, Grid2D, MhdParams
from .problems import KhSpec, ReconnectionSpec, default_bc, kh_ic, reconnection_ic
from .snapshot import read_snapshot, write_snapshot

CSV_COLUMNS = ["method", "control", "error", "seconds", "steps_accepted",
               "steps_rejected", "krylov_projections", "operator_applies",
               "max_divB", "status"]

METHODS = ("epirk5p1", "epirk4-fixed", "epirk5p1-fixed", "rk4-explicit-reference")


class ConfigError(ValueError):
    """Invalid or missing experiment configuration."""


class ReferenceDisagreement(RuntimeError):
    """Independent reference solutions differ beyond the safety threshold."""


@dataclass
class ExperimentConfig:
    problem: str = "reconnection"
    nx: int = 64
    ny: int = 32
    mu: float = 5e-2
    eta: float = 5e-3
    kappa: float = 4e-2
    gamma: float = 5.0 / 3.0
    method: str = "epirk5p1"
    tolerances: tuple = ()
    step_sizes: tuple = ()
    t_final: float = 10.0
    snapshot_times: tuple = ()
    bc_x: str = ""
    bc_y: str = ""
    krylov_tol: float = 1e-8      # used by the fixed-step methods
    reference_tol: float = 1e-11
    reference_check: float = 1e-7  # allowed reference cross-disagreement
    kh_shear_width: float = 0.1
    seed: int = 0                  # reserved; the math is deterministic

    def __post_init__(self):
        if self.problem not in ("reconnection", "kh"):
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.t_final <= 0:
            raise ConfigError("t_final must be positive")
        if self.method == "epirk5p1" and not self.tolerances:
            raise ConfigError("adaptive method needs a tolerance list")
        if self.method != "epirk5p1" and not self.step_sizes:
            raise ConfigError(f"method {self.method} needs a step-size list")

    @property
    def controls(self):
        return self.tolerances if self.method == "epirk5p1" else self.step_sizes

    def grid(self):
        if self.problem == "reconnection":
            return ReconnectionSpec().grid(self.nx, self.ny)
        return KhSpec(shear_width=self.kh_shear_width).grid(self.nx, self.ny)

    def params(self):
        return MhdParams(mu=self.mu, eta=self.eta, kappa=self.kappa,
                         gamma=self.gamma)

    def bc(self):
        base = default_bc(self.problem)
        return BoundaryPolicy(x=self.bc_x or base.x, y=self.bc_y or base.y)

    def initial_state(self):
        if self.problem == "reconnection":
            return reconnection_ic(self.grid(), params=self.params())
        return kh_ic(self.grid(), KhSpec(shear_width=self.kh_shear_width),
                     params=self.params())

    def resolved_items(self):
        """All fields with defaults expanded, for reproducible logging."""
        out = []
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if isinstance(value, tuple):
                value = ",".join(repr(v) for v in value)
            out.append((name, value))
        return out

    def cache_key(self):
        physics = [(k, v) for k, v in self.resolved_items()
                   if k in ("problem", "nx", "ny", "mu", "eta", "kappa",
                            "gamma", "t_final", "bc_x", "bc_y",
                            "kh_shear_width", "reference_tol")]
        blob = ";".join(f"{k}={v!r}" for k, v in physics)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_FLOAT_KEYS = {"mu", "eta", "kappa", "gamma", "t_final", "krylov_tol",
               "reference_tol", "reference_check", "kh_shear_width"}
_INT_KEYS = {"nx", "ny", "seed"}
_LIST_KEYS = {"tolerances", "step_sizes", "snapshot_times"}


def parse_config(path):
    """Parse a flat key=value config file into an ExperimentConfig."""
    values = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                key, _, raw = line.partition("=")
                key, raw = key.strip(), raw.strip()
                if key in _FLOAT_KEYS:
                    values[key] = float(raw)
                elif key in _INT_KEYS:
                    values[key] = int(raw)
                elif key in _LIST_KEYS:
                    values[key] = tuple(float(v) for v in raw.split(",") if v.strip())
                elif key in ExperimentConfig.__dataclass_fields__:
                    values[key] = raw
                else:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value in {path}: {exc}") from exc
    return ExperimentConfig(**values)


def error_norm(U, U_ref, grid):
    """Max over components of the grid-weighted l2 difference norm."""
    U = np.asarray(U)
    U_ref = np.asarray(U_ref)
    if U.shape != U_ref.shape or U.shape[1:] != (grid.nx, grid.ny):
        raise ValueError(f"state shapes {U.shape} / {U_ref.shape} do not "
                         f"match grid ({grid.nx}, {grid.ny})")
    diff = U - U_ref
    area = grid.hx * grid.hy
    norms = np.sqrt(np.sum(diff * diff, axis=(1, 2)) * area)
    return float(np.max(norms))


def _rk4_stable_dt(U, grid, params):
    """Conservative explicit step size from wave and diffusion speeds."""
    rho = U[mhd.RHO]
    v2 = (U[mhd.MX] ** 2 + U[mhd.MY] ** 2 + U[mhd.MZ] ** 2) / rho ** 2
    b2 = U[mhd.BX] ** 2 + U[mhd.BY] ** 2 + U[mhd.BZ] ** 2
    p = mhd.pressure(U, params)
    c_fast = np.sqrt((params.gamma * p + b2) / rho) + np.sqrt(v2)
    h = min(grid.hx, grid.hy)
    dt_wave = 0.3 * h / float(np.max(c_fast))
    diff = max(params.mu, params.eta,
               params.gamma * params.mu * params.kappa / (params.gamma - 1.0),
               1e-30)
    dt_diff = 0.2 * h * h / diff
    return min(dt_wave, dt_diff)


def integrate_rk4(rhs, y0, t0, t_end, h):
    """Classical explicit RK4 with the last step clipped."""
    y = np.asarray(y0, dtype=float).copy()
    t = t0
    stats = StepStats()
    start = _time.perf_counter()
    while t < t_end - 1e-14 * max(1.0, abs(t_end)):
        step = min(h, t_end - t)
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * step * k1)
        k3 = rhs(y + 0.5 * step * k2)
        k4 = rhs(y + step * k3)
        y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += step
        stats.steps_accepted += 1
        stats.rhs_evals += 4
    stats.wall_time = _time.perf_counter() - start
    return y, stats


def _integrate(cfg, control, y0, t0, t_end, grid):
    rhs = mhd.make_rhs(cfg.params(), grid, cfg.bc())
    if cfg.method == "epirk5p1":
        ctl = StepController(tol=control)
        # an inadmissible trial state at a loose tolerance is a
        # rejection, not a hard failure; h_min still bounds the retries
        return integrate_adaptive(rhs, y0, t0, t_end, ctl,
                                  recoverable=(mhd.AdmissibilityError,))
    if cfg.method == "epirk4-fixed":
        return integrate_fixed("epirk4", rhs, y0, t0, t_end, control,
                               tol_krylov=cfg.krylov_tol)
    if cfg.method == "epirk5p1-fixed":
        return integrate_fixed("epirk5p1", rhs, y0, t0, t_end, control,
                               tol_krylov=cfg.krylov_tol)
    return integrate_rk4(rhs, y0, t0, t_end, control)


def reference_solution(cfg, cache_dir):
    """High-accuracy final state for the configured problem.

    Computed with adaptive EPIRK5P1 at ``cfg.reference_tol`` and
    cross-checked against an independent small-step classical RK4 run;
    disagreement above ``cfg.reference_check`` is a hard failure.  The
    result is cached on disk keyed by the physical configuration, and a
    cache hit returns a bitwise-identical state.
    """
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, f"reference-{cfg.cache_key()}.mhd25")
    grid = cfg.grid()
    if os.path.exists(path):
        U, rgrid, _, _ = read_snapshot(path)
        if (rgrid.nx, rgrid.ny) == (grid.nx, grid.ny):
            return U

    y0 = mhd.state_to_vector(cfg.initial_state())
    rhs = mhd.make_rhs(cfg.params(), grid, cfg.bc())
    ctl = StepController(tol=cfg.reference_tol)
    y_epirk, _ = integrate_adaptive(rhs, y0, 0.0, cfg.t_final, ctl,
                                    recoverable=(mhd.AdmissibilityError,))
    U_epirk = mhd.vector_to_state(y_epirk, grid)

    # run well below the stability limit so the fourth-order local error
    # sits comfortably under the cross-check threshold
    dt = _rk4_stable_dt(cfg.initial_state(), grid, cfg.params()) / 5.0
    y_rk4, _ = integrate_rk4(rhs, y0, 0.0, cfg.t_final, dt)
    U_rk4 = mhd.vector_to_state(y_rk4, grid)

    gap = error_norm(U_epirk, U_rk4, grid)
    if gap > cfg.reference_check:
        raise ReferenceDisagreement(
            f"reference integrators disagree by {gap:.3e} "
            f"(threshold {cfg.reference_check:.3e})")
    write_snapshot(path, U_epirk, grid, cfg.t_final, cfg.params())
    # read back so cached and fresh paths return the identical bits
    U, _, _, _ = read_snapshot(path)
    return U


@dataclass
class RunRecord:
    """One work-precision point."""

    method: str
    control: float
    error: float
    seconds: float
    stats: StepStats
    max_divB: float
    status: str = "ok"

    def row(self):
        return [self.method, repr(self.control), repr(self.error),
                repr(self.seconds), self.stats.steps_accepted,
                self.stats.steps_rejected, self.stats.projections,
                self.stats.operator_applies, repr(self.max_divB), self.status]


def run_experiment(cfg, out_dir, snapshot_times=None, reference=None,
                   cache_dir=None):
    """Execute the configured sweep; returns the list of RunRecords.

    Writes ``records.csv`` (one row per control value, resolved config
    in leading comment lines) and binary snapshots at the requested
    times.  Individual failures are recorded and do not abort the sweep.
    """
    os.makedirs(out_dir, exist_ok=True)
    cache_dir = cache_dir or os.path.join(out_dir, "cache")
    grid = cfg.grid()
    bc = cfg.bc()
    snap_times = sorted(snapshot_times if snapshot_times is not None
                        else cfg.snapshot_times)
    if reference is None:
        reference = reference_solution(cfg, cache_dir)

    records = []
    for control in cfg.controls:
        y = mhd.state_to_vector(cfg.initial_state())
        stats = StepStats()
        status = "ok"
        seconds = 0.0
        try:
            t_prev = 0.0
            for t_snap in snap_times:
                if not (0.0 < t_snap < cfg.t_final):
                    continue
                y, seg = _integrate(cfg, control, y, t_prev, t_snap, grid)
                stats.merge(seg)
                seconds += seg.wall_time
                if not np.all(np.isfinite(y)):
                    raise FloatingPointError("non-finite state")
                _write_snap(out_dir, cfg, control, t_snap,
                            mhd.vector_to_state(y, grid), grid)
                t_prev = t_snap
            y, seg = _integrate(cfg, control, y, t_prev, cfg.t_final, grid)
            stats.merge(seg)
            seconds += seg.wall_time
            if not np.all(np.isfinite(y)):
                raise FloatingPointError("non-finite state at final time")
            U = mhd.vector_to_state(y, grid)
            _write_snap(out_dir, cfg, control, cfg.t_final, U, grid)
            err = error_norm(U, reference, grid)
            _, divb = mhd.div_B(U, grid, bc)
        except (StiffnessFailure, KrylovConvergenceError,
                AdmissibilityError, FloatingPointError) as exc:
            err = math.nan
            divb = math.nan
            status = f"failed:{type(exc).__name__}"
        records.append(RunRecord(cfg.method, control, err, seconds, stats,
                                 divb, status))
    write_records_csv(os.path.join(out_dir, "records.csv"), cfg, records)
    return records


def _write_snap(out_dir, cfg, control, t, U, grid):
    name = f"{cfg.problem}-{cfg.method}-c{control:g}-t{t:g}.mhd25"
    write_snapshot(os.path.join(out_dir, name), U, grid, t, cfg.params())


def write_records_csv(path, cfg, records):
    with open(path, "w") as fh:
        for key, value in cfg.resolved_items():
            fh.write(f"# {key}={value}\n")
        # sweep points run back to back in this process, so the timing
        # rows are directly comparable
        fh.write("# concurrency=sequential\n")
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in records:
            fh.write(",".join(str(v) for v in rec.row()) + "\n")


def read_records_csv(path):
    """Read records.csv back; returns (header dict, list of row dicts)."""
    meta = {}
    rows = []
    with open(path) as fh:
        header = None
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append(dict(zip(header, line.split(","))))
    return meta, rows
