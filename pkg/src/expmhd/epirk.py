"""EpiRK exponential time steppers.

Implements the three-stage fifth-order variable-step scheme (EPIRK5P1)
and the three-stage fourth-order constant-step scheme (EPIRK4), both
driven by the matrix-free Krylov machinery, plus fixed-step and adaptive
integration drivers.  A generic tableau runner is provided for testing
other coefficient sets; it does not attempt to minimize projections.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .fdjac import FdJacobianOperator
from .krylov import (KrylovConfig, KrylovConvergenceError, KrylovStats,
                     LinearOperator, PhiCombRequest, multi_scale_eval,
                     phi_comb)

# EPIRK5P1 coefficients, declared as decimal strings so the shipped
# constants can be compared verbatim.
EPIRK5P1_DECIMALS = {
    "a11": "0.35129592695058193092",
    "a21": "0.84405472011657126298",
    "a22": "1.6905891609568963624",
    "b1": "1.0",
    "b2": "1.2727127317356892397",
    "b3": "2.2714599265422622275",
    "g11": "0.35129592695058193092",
    "g21": "0.84405472011657126298",
    "g22": "0.5",
    "g31": "1.0",
    "g32": "0.71111095364366870359",
    "g33": "0.62378111953371494809",
}

_C5 = {name: float(value) for name, value in EPIRK5P1_DECIMALS.items()}


class StiffnessFailure(RuntimeError):
    """Adaptive controller drove the step size below its minimum."""

    def __init__(self, message, t, h, last_error):
        super().__init__(message)
        self.t = t
        self.h = h
        self.last_error = last_error


@dataclass
class EpiRKTableau:
    """Coefficients of a generic EpiRK scheme.

    ``a[i][j]`` weights stage i's j-th term (j = 0 is the F_n column,
    j >= 1 the divided-difference columns); the last row holds b.
    ``g`` has the same layout and carries the phi-argument scales.
    ``p[i][j]`` maps phi order k -> weight, defining
    psi_ij(z) = sum_k p_ijk phi_k(z).
    """

    s: int
    a: list
    g: list
    p: list

    def __post_init__(self):
        for row in self.g:
            for gval in row:
                if gval is not None and not (0.0 < gval <= 1.0):
                    raise ValueError(f"g coefficients must be in (0, 1], got {gval}")


EPIRK5P1 = EpiRKTableau(
    s=3,
    a=[[_C5["a11"]],
       [_C5["a21"], _C5["a22"]],
       [_C5["b1"], _C5["b2"], _C5["b3"]]],
    g=[[_C5["g11"]],
       [_C5["g21"], _C5["g22"]],
       [_C5["g31"], _C5["g32"], _C5["g33"]]],
    p=[[{1: 1.0}],
       [{1: 1.0}, {1: 1.0}],
       [{1: 1.0}, {1: 1.0}, {3: 1.0}]],
)

EPIRK4 = EpiRKTableau(
    s=3,
    a=[[0.5],
       [2.0 / 3.0],
       [1.0, 1.0, 1.0]],
    g=[[0.5],
       [2.0 / 3.0],
       [1.0, 1.0, 1.0]],
    # remainder weights in the divided-difference basis: with
    # D1 = R(Y1), D2 = R(Y2) - 2 R(Y1), the published R(Y1)/R(Y2)
    # weights (32, -144) and (-27/2, 81) become (5, 18) and (-27/2, 81).
    p=[[{1: 1.0}],
       [{1: 1.0}],
       [{1: 1.0}, {3: 5.0, 4: 18.0}, {3: -13.5, 4: 81.0}]],
)


@dataclass
class StepStats:
    """Cost accounting for one or more steps."""

    steps_accepted: int = 0
    steps_rejected: int = 0
    projections: int = 0
    rhs_evals: int = 0
    operator_applies: int = 0
    substeps: int = 0
    max_basis_size: int = 0
    wall_time: float = 0.0

    def merge_krylov(self, kstats):
        self.projections += kstats.projections
        self.operator_applies += kstats.operator_applies
        self.substeps += kstats.substeps
        self.max_basis_size = max(self.max_basis_size, kstats.max_basis_size)

    def merge(self, other):
        self.steps_accepted += other.steps_accepted
        self.steps_rejected += other.steps_rejected
        self.projections += other.projections
        self.rhs_evals += other.rhs_evals
        self.operator_applies += other.operator_applies
        self.substeps += other.substeps
        self.max_basis_size = max(self.max_basis_size, other.max_basis_size)
        self.wall_time += other.wall_time


@dataclass
class StepController:
    """Accept/reject controller for the adaptive EPIRK5P1 driver.

    The weighted RMS error norm uses atol = rtol = tol, matching the
    benchmark protocol where all tolerances coincide.
    """

    tol: float
    safety: float = 0.9
    order: int = 4                 # exponent 1/(order+1) in the update
    h_min: float = 1e-12
    h_max: float = math.inf
    clamp: tuple = (0.2, 5.0)
    h_init: float | None = None

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.h_min >= self.h_max:
            raise ValueError("h_min must be below h_max")

    def error_norm(self, err_vec, y):
        w = self.tol + self.tol * np.abs(y)
        return float(np.sqrt(np.mean((err_vec / w) ** 2)))

    def next_h(self, h, err):
        if err == 0.0:
            factor = self.clamp[1]
        else:
            factor = self.safety * err ** (-1.0 / (self.order + 1))
            factor = min(max(factor, self.clamp[0]), self.clamp[1])
        return min(max(h * factor, self.h_min), self.h_max)


class _CountingRhs:
    def __init__(self, rhs):
        self.rhs = rhs
        self.calls = 0

    def __call__(self, y):
        self.calls += 1
        return self.rhs(y)


def remainder(rhs, y_n, f_n, jop, y):
    """Nonlinear remainder R(y) = F(y) - F(y_n) - J(y_n)(y - y_n)."""
    return rhs(y) - f_n - jop(y - y_n)


def epirk5p1_step(rhs, y_n, h, tol_krylov, cfg=None, f_n=None, jop=None):
    """One EPIRK5P1 step; returns (y_next, error_estimate, StepStats).

    Uses exactly three Krylov projections: a multi-scale projection on
    h F_n for all three stage scales, one on h R(Y_1) for the two scales
    that need it, and one for the phi_3 term on h (R(Y_2) - 2 R(Y_1)).
    The error estimate is the final phi_3 correction (the b_3 term),
    which reuses the third projection.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    c = _C5
    stats = StepStats()
    counting = _CountingRhs(rhs)
    y_n = np.asarray(y_n, dtype=float)
    f_n = counting(y_n) if f_n is None else np.asarray(f_n, dtype=float)
    if jop is None:
        jop = FdJacobianOperator(counting, y_n, f_n)
    hf = h * f_n

    (u11, u21, u31), k1 = multi_scale_eval(
        jop, h, hf, [c["g11"], c["g21"], c["g31"]], tol_krylov, cfg)
    stats.merge_krylov(k1)
    y1 = y_n + c["a11"] * u11
    r1 = remainder(counting, y_n, f_n, jop, y1)

    (w22, w32), k2 = multi_scale_eval(
        jop, h, h * r1, [c["g22"], c["g32"]], tol_krylov, cfg)
    stats.merge_krylov(k2)
    y2 = y_n + c["a21"] * u21 + c["a22"] * w22
    r2 = remainder(counting, y_n, f_n, jop, y2)

    v3 = h * (r2 - 2.0 * r1)
    n = y_n.size
    req = PhiCombRequest(operator=jop, h=h, c=c["g33"],
                         vectors=[np.zeros(n), np.zeros(n), v3],
                         tol=tol_krylov)
    w33, k3 = phi_comb(req, cfg)
    stats.merge_krylov(k3)

    correction = c["b3"] * w33
    y_next = y_n + c["b1"] * u31 + c["b2"] * w32 + correction
    stats.rhs_evals = counting.calls
    stats.steps_accepted = 1
    return y_next, correction, stats


def epirk4_step(rhs, y_n, h, tol_krylov, cfg=None, f_n=None, jop=None):
    """One EPIRK4 step; returns (y_next, StepStats).

    Two Krylov projections: one multi-scale projection of phi_1 on h F_n
    at scales {1/2, 2/3, 1} and one projection that evaluates the
    combined phi_3/phi_4 remainder terms at scale 1.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    stats = StepStats()
    counting = _CountingRhs(rhs)
    y_n = np.asarray(y_n, dtype=float)
    f_n = counting(y_n) if f_n is None else np.asarray(f_n, dtype=float)
    if jop is None:
        jop = FdJacobianOperator(counting, y_n, f_n)
    hf = h * f_n

    (u_half, u_23, u_1), k1 = multi_scale_eval(
        jop, h, hf, [0.5, 2.0 / 3.0, 1.0], tol_krylov, cfg)
    stats.merge_krylov(k1)
    y1 = y_n + 0.5 * u_half
    y2 = y_n + (2.0 / 3.0) * u_23
    r1 = remainder(counting, y_n, f_n, jop, y1)
    r2 = remainder(counting, y_n, f_n, jop, y2)

    n = y_n.size
    v3 = h * (32.0 * r1 - 13.5 * r2)
    v4 = h * (-144.0 * r1 + 81.0 * r2)
    req = PhiCombRequest(operator=jop, h=h, c=1.0,
                         vectors=[np.zeros(n), np.zeros(n), v3, v4],
                         tol=tol_krylov)
    w, k2 = phi_comb(req, cfg)
    stats.merge_krylov(k2)

    y_next = y_n + u_1 + w
    stats.rhs_evals = counting.calls
    stats.steps_accepted = 1
    return y_next, stats


def epirk_tableau_step(tableau, rhs, y_n, h, tol_krylov, cfg=None):
    """Generic EpiRK step from an arbitrary tableau (testing aid).

    Evaluates every psi term through its own projection; correctness
    over projection economy.  Divided differences are Newton forward
    differences over the nodes y_n, Y_1, ..., Y_{s-1} (the y_n node
    drops out since R(y_n) = 0).
    """
    counting = _CountingRhs(rhs)
    y_n = np.asarray(y_n, dtype=float)
    n = y_n.size
    f_n = counting(y_n)
    jop = FdJacobianOperator(counting, y_n, f_n)
    hf = h * f_n
    stats = StepStats()

    def psi_apply(pmap, g, v):
        kmax = max(pmap)
        vectors = [pmap.get(k, 0.0) * v for k in range(1, kmax + 1)]
        req = PhiCombRequest(operator=jop, h=h, c=g, vectors=vectors,
                             tol=tol_krylov)
        w, kst = phi_comb(req, cfg)
        stats.merge_krylov(kst)
        return w

    remainders = []          # R(Y_1), R(Y_2), ...
    result = None
    for i in range(tableau.s):
        final = i == tableau.s - 1
        acc = y_n + tableau.a[i][0] * psi_apply(tableau.p[i][0],
                                                tableau.g[i][0], hf)
        for j in range(1, len(tableau.a[i])):
            dd = _forward_difference(remainders, j)
            acc = acc + tableau.a[i][j] * psi_apply(tableau.p[i][j],
                                                    tableau.g[i][j], h * dd)
        if final:
            result = acc
        else:
            remainders.append(remainder(counting, y_n, f_n, jop, acc))
    stats.rhs_evals = counting.calls
    stats.steps_accepted = 1
    return result, stats


def _forward_difference(remainders, j):
    """Delta^(j) R over nodes y_n, Y_1, ... with R(y_n) = 0."""
    acc = np.zeros_like(remainders[0])
    for i in range(1, j + 1):
        acc = acc + (-1.0) ** (j - i) * math.comb(j, i) * remainders[i - 1]
    return acc


def integrate_fixed(method, rhs, y0, t0, t_end, h, tol_krylov=1e-12, cfg=None):
    """March from t0 to t_end with constant steps (last step clipped).

    ``method`` is "epirk4" or "epirk5p1".
    """
    if t_end <= t0:
        raise ValueError("t_end must exceed t0")
    if h <= 0:
        raise ValueError("step size must be positive")
    y = np.asarray(y0, dtype=float).copy()
    t = t0
    total = StepStats()
    start = time.perf_counter()
    while t < t_end - 1e-14 * max(1.0, abs(t_end)):
        step = min(h, t_end - t)
        if method == "epirk4":
            y, stats = epirk4_step(rhs, y, step, tol_krylov, cfg)
        elif method == "epirk5p1":
            y, _, stats = epirk5p1_step(rhs, y, step, tol_krylov, cfg)
        else:
            raise ValueError(f"unknown method {method!r}")
        total.merge(stats)
        t += step
    total.wall_time = time.perf_counter() - start
    return y, total


def integrate_adaptive(rhs, y0, t0, t_end, ctl, cfg=None, recoverable=()):
    """Adaptive EPIRK5P1 integration with accept/reject control.

    The Krylov tolerance equals the controller tolerance.  Raises
    :class:`StiffnessFailure` if the step size falls below ``ctl.h_min``.
    Exception types listed in ``recoverable`` (e.g. an admissibility
    guard inside the right-hand side) reject the trial step like an
    over-large error estimate instead of propagating; a non-finite error
    estimate is rejected the same way.
    """
    if t_end <= t0:
        raise ValueError("t_end must exceed t0")
    y = np.asarray(y0, dtype=float).copy()
    t = t0
    h = ctl.h_init if ctl.h_init is not None else (t_end - t0) / 100.0
    h = min(h, ctl.h_max)
    total = StepStats()
    start = time.perf_counter()
    while t < t_end - 1e-14 * max(1.0, abs(t_end)):
        h = min(h, t_end - t)
        try:
            y_new, err_vec, stats = epirk5p1_step(rhs, y, h, ctl.tol, cfg)
        except KrylovConvergenceError:
            total.steps_rejected += 1
            h = h / 2.0
            if h < ctl.h_min:
                total.wall_time = time.perf_counter() - start
                raise StiffnessFailure(
                    f"step size {h:.3e} below h_min at t = {t:.6g} "
                    f"(Krylov non-convergence)", t=t, h=h, last_error=math.nan)
            continue
        except recoverable:
            total.steps_rejected += 1
            if h <= ctl.h_min:
                total.wall_time = time.perf_counter() - start
                raise StiffnessFailure(
                    f"trial step rejected by the right-hand side at the "
                    f"minimum size {h:.3e}, t = {t:.6g}",
                    t=t, h=h, last_error=math.inf)
            h = max(ctl.h_min, 0.2 * h)
            continue
        err = ctl.error_norm(err_vec, y_new)
        if not math.isfinite(err):
            err = math.inf
        if err <= 1.0:
            total.merge(stats)
            y = y_new
            t += h
        else:
            total.steps_rejected += 1
            total.projections += stats.projections
            total.rhs_evals += stats.rhs_evals
            total.operator_applies += stats.operator_applies
            if h <= ctl.h_min:
                total.wall_time = time.perf_counter() - start
                raise StiffnessFailure(
                    f"step rejected at the minimum size {h:.3e}, "
                    f"t = {t:.6g} (error norm {err:.3e})",
                    t=t, h=h, last_error=err)
        h = ctl.next_h(h, err)
    total.wall_time = time.perf_counter() - start
    return y, total
