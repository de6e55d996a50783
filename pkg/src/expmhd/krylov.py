"""Krylov approximation of phi-function linear combinations.

Approximates w = sum_{k=1}^p phi_k(c*h*J) v_k for a large matrix-free
operator J by Arnoldi projection.  The combination is folded into a
single exponential of a slightly augmented operator: with

    A_aug = [[c*h*J, B], [0, K]],   B = [v_p, ..., v_1],  K = upshift,

the first N components of exp(tau * A_aug) [u; e_p] propagate the
solution of u' = (c h J) u + sum_k tau^(k-1)/(k-1)! v_k, whose value at
tau = 1 is the requested combination.  The interval [0, 1] is split
adaptively into substeps when the Krylov basis would otherwise grow too
large, mirroring the O(m^2) cost argument for adaptive Krylov methods.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .phifuncs import phi_dense

MAX_COMB_ORDER = 5

# Fraction of the seed scale below which an Arnoldi vector is considered
# a lucky breakdown.
BREAKDOWN_RTOL = 1e-12


class KrylovConvergenceError(RuntimeError):
    """Raised when the basis cap is reached with the substep at minimum."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class LinearOperator:
    """Matrix-free linear operator v -> A v of fixed dimension."""

    def __init__(self, n, matvec):
        self.n = int(n)
        self._matvec = matvec

    def __call__(self, v):
        return self._matvec(v)

    @classmethod
    def from_matrix(cls, M):
        M = np.asarray(M, dtype=float)
        return cls(M.shape[0], lambda v: M @ v)


@dataclass
class KrylovStats:
    """Cost counters for one or more projections."""

    operator_applies: int = 0
    substeps: int = 0
    max_basis_size: int = 0
    projections: int = 0

    def merge(self, other):
        self.operator_applies += other.operator_applies
        self.substeps += other.substeps
        self.max_basis_size = max(self.max_basis_size, other.max_basis_size)
        self.projections += other.projections


@dataclass
class KrylovConfig:
    """Tuning knobs for the adaptive Krylov evaluation."""

    m_init: int = 10
    m_max: int = 100
    soft_cap: int = 25
    grow_threshold: int = 10
    substep_growth: float = 4.0 / 3.0
    min_substep: float = 1.0 / 1024.0
    max_substep: float = 1.0
    reorthogonalize: bool = True


@dataclass
class ArnoldiBasis:
    """Orthonormal basis V, Hessenberg projection H and seed norm beta."""

    V: np.ndarray          # (n, m) or (n, m+1); columns orthonormal
    H: np.ndarray          # (m, m) on breakdown, else (m+1, m)
    m: int
    beta: float
    breakdown: bool = False

    @property
    def h_next(self):
        """Subdiagonal element h_{m+1,m} (0 after a breakdown)."""
        if self.breakdown or self.H.shape[0] == self.m:
            return 0.0
        return self.H[self.m, self.m - 1]


@dataclass
class PhiCombRequest:
    """Query for w = sum_{k=1}^p phi_k(c*h*J) v_k."""

    operator: LinearOperator
    h: float
    c: float
    vectors: list                  # v_1 ... v_p, each of dimension N
    tol: float

    def __post_init__(self):
        if not (0.0 < self.c <= 1.0):
            raise ValueError(f"scale factor c must be in (0, 1], got {self.c}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        p = len(self.vectors)
        if p < 1 or p > MAX_COMB_ORDER:
            raise ValueError(f"need 1 <= p <= {MAX_COMB_ORDER} vectors, got {p}")
        n = self.operator.n
        for k, v in enumerate(self.vectors, start=1):
            if np.shape(v) != (n,):
                raise ValueError(f"vector v_{k} has shape {np.shape(v)}, expected ({n},)")


class _ArnoldiProcess:
    """Incrementally extendable Arnoldi factorization with reorthogonalization."""

    def __init__(self, apply_op, v, m_cap, reorthogonalize=True):
        self.apply = apply_op
        self.n = len(v)
        self.m_cap = min(m_cap, self.n)
        self.beta = float(np.linalg.norm(v))
        if self.beta == 0.0:
            raise ValueError("Arnoldi seed vector must be nonzero")
        self.V = np.empty((self.n, self.m_cap + 1))
        self.V[:, 0] = v / self.beta
        self.Hbar = np.zeros((self.m_cap + 1, self.m_cap))
        self.m = 0
        self.breakdown = False
        self.applies = 0

    def extend(self):
        """Add one basis vector; returns False on lucky breakdown."""
        if self.breakdown or self.m >= self.m_cap:
            return False
        j = self.m
        w = self.apply(self.V[:, j])
        self.applies += 1
        scale = np.linalg.norm(w)
        for i in range(j + 1):
            hij = np.dot(w, self.V[:, i])
            self.Hbar[i, j] += hij
            w = w - hij * self.V[:, i]
        if True:  # one reorthogonalization pass (modified Gram-Schmidt)
            for i in range(j + 1):
                corr = np.dot(w, self.V[:, i])
                self.Hbar[i, j] += corr
                w = w - corr * self.V[:, i]
        hnext = np.linalg.norm(w)
        self.m = j + 1
        if hnext <= BREAKDOWN_RTOL * max(scale, 1.0):
            self.breakdown = True
            return False
        self.Hbar[j + 1, j] = hnext
        self.V[:, j + 1] = w / hnext
        return True

    def basis(self):
        m = self.m
        if self.breakdown:
            return ArnoldiBasis(
                V=self.V[:, :m].copy(), H=self.Hbar[:m, :m].copy(),
                m=m, beta=self.beta, breakdown=True)
        return ArnoldiBasis(
            V=self.V[:, :m + 1].copy(), H=self.Hbar[:m + 1, :m].copy(),
            m=m, beta=self.beta, breakdown=False)

    @property
    def Hm(self):
        return self.Hbar[:self.m, :self.m]

    @property
    def h_next(self):
        if self.breakdown:
            return 0.0
        return self.Hbar[self.m, self.m - 1]


def arnoldi(op, v, m, reorthogonalize=True):
    """Build an m-step Arnoldi factorization of ``op`` seeded with ``v``.

    Early (lucky) breakdown returns a smaller basis with the breakdown
    flag set; in that case H is square and the Krylov subspace is
    invariant under the operator.
    """
    v = np.asarray(v, dtype=float)
    if np.linalg.norm(v) == 0.0:
        raise ValueError("Arnoldi seed vector must be nonzero")
    if m > op.n:
        raise ValueError(f"basis size {m} exceeds operator dimension {op.n}")
    proc = _ArnoldiProcess(op, v, m, reorthogonalize)
    while proc.m < m and proc.extend():
        pass
    return proc.basis()


def residual_estimate(basis, h, c, small_phi_seed):
    """Arnoldi stopping surrogate for phi evaluations.

    Parameters
    ----------
    basis : ArnoldiBasis
    h, c : float
        Step size and scale factor of the evaluated phi argument.
    small_phi_seed : (m,) ndarray
        The projected result phi(c*h*H_m) (beta e_1), i.e. the
        coefficient vector of the approximation in the basis V_m.

    Returns
    -------
    float
        h_{m+1,m} * |last component of small_phi_seed|, relative to the
        norm of the approximation.
    """
    y = np.asarray(small_phi_seed, dtype=float)
    norm = np.linalg.norm(y)
    if norm == 0.0:
        return 0.0
    return abs(basis.h_next) * abs(y[-1]) / norm


def _expm_seed(H, m, beta):
    """beta * exp(H) e_1 for the m x m projection H."""
    e1 = np.zeros(m)
    e1[0] = beta
    return scipy.linalg.expm(H) @ e1


def phi_comb(req, cfg=None):
    """Evaluate w = sum_{k=1}^p phi_k(c*h*J) v_k adaptively.

    Returns the approximation and a :class:`KrylovStats` record.  The
    interval is split into substeps whenever the basis hits the soft cap
    before the residual estimate meets the tolerance; the augmented
    formulation makes the partial results compose exactly.

    Raises
    ------
    KrylovConvergenceError
        If the hard basis cap is reached with the substep already at its
        minimum size.
    """
    cfg = cfg or KrylovConfig()
    stats = KrylovStats(projections=1)
    op = req.operator
    n = op.n
    p = len(req.vectors)
    vs = [np.asarray(v, dtype=float) for v in req.vectors]
    if all(np.all(v == 0.0) for v in vs):
        return np.zeros(n), stats

    ch = req.c * req.h
    # columns of B are v_p ... v_1; K is the p x p upshift
    B = np.column_stack(vs[::-1])

    def apply_aug(x):
        u, q = x[:n], x[n:]
        top = ch * op(u) + B @ q
        bottom = np.zeros(p)
        bottom[:p - 1] = q[1:]
        return np.concatenate([top, bottom])

    def count_applies(k):
        stats.operator_applies += k

    naug = n + p
    u = np.zeros(n)
    t = 0.0
    delta = 1.0
    while t < 1.0:
        delta = min(delta, cfg.max_substep, 1.0 - t)
        q = np.array([t ** (p - 1 - i) / math.factorial(p - 1 - i)
                      for i in range(p)])
        seed = np.concatenate([u, q])
        proc = _ArnoldiProcess(apply_aug, seed, min(cfg.m_max, naug),
                               cfg.reorthogonalize)
        m_target = min(cfg.m_init, naug)
        while proc.m < m_target and proc.extend():
            pass
        while True:
            Hm = proc.Hm
            y = _expm_seed(delta * Hm, proc.m, proc.beta)
            res = residual_estimate(proc.basis(), req.h, req.c, y) * delta
            tol_sub = req.tol * max(delta, 1e-2)
            # a full-dimension basis spans the whole space: projection exact
            if res <= tol_sub or proc.breakdown or proc.m >= proc.n:
                break
            if proc.m >= cfg.soft_cap and delta > cfg.min_substep:
                delta = delta / 2.0
                continue
            m_before = proc.m
            proc.extend()
            if proc.m == m_before:  # hard cap reached, basis unchanged
                if delta > cfg.min_substep:
                    delta = delta / 2.0
                    continue
                count_applies(proc.applies)
                raise KrylovConvergenceError(
                    f"Krylov basis cap {cfg.m_max} reached at substep "
                    f"{delta:.3e} (residual {res:.3e} > {tol_sub:.3e})",
                    residual=res)
        count_applies(proc.applies)
        proc.applies = 0
        x_new = proc.V[:, :proc.m] @ y
        u = x_new[:n]
        t = t + delta
        stats.substeps += 1
        stats.max_basis_size = max(stats.max_basis_size, proc.m)
        if proc.m <= cfg.grow_threshold:
            delta = delta * cfg.substep_growth
    # q-part of the state is known analytically; only u is returned
    return u, stats


def multi_scale_eval(op, h, v, scales, tol, cfg=None, order=1):
    """phi_order(c_i * h * J) v for several scales from one Arnoldi basis.

    The basis is grown until the residual estimate for the largest scale
    meets ``tol``; smaller scales reuse the same basis (the Arnoldi
    iteration itself does not depend on the scaling of the operator).

    Returns
    -------
    (list of ndarray, KrylovStats)
        One vector per scale, in the order given.
    """
    cfg = cfg or KrylovConfig()
    scales = list(scales)
    if not scales or any(not (0.0 < c <= 1.0) for c in scales):
        raise ValueError("scales must lie in (0, 1]")
    stats = KrylovStats(projections=1)
    v = np.asarray(v, dtype=float)
    n = op.n
    if np.all(v == 0.0):
        return [np.zeros(n) for _ in scales], stats

    c_big = max(scales)
    proc = _ArnoldiProcess(op, v, min(cfg.m_max, n), cfg.reorthogonalize)
    m_target = min(cfg.m_init, n)
    while proc.m < m_target and proc.extend():
        pass
    while True:
        y = _phi_seed(proc.Hm, order, c_big * h, proc.m, proc.beta)
        res = residual_estimate(proc.basis(), h, c_big, y) * c_big * h
        if res <= tol or proc.breakdown or proc.m >= proc.n:
            break
        m_before = proc.m
        proc.extend()
        if proc.m == m_before:  # hard cap reached, basis unchanged
            stats.operator_applies += proc.applies
            raise KrylovConvergenceError(
                f"Krylov basis cap {cfg.m_max} reached in multi-scale "
                f"evaluation (residual {res:.3e} > {tol:.3e})",
                residual=res)
    stats.operator_applies += proc.applies
    stats.max_basis_size = proc.m
    stats.substeps = 1
    Vm = proc.V[:, :proc.m]
    out = []
    for c in scales:
        y = _phi_seed(proc.Hm, order, c * h, proc.m, proc.beta)
        out.append(Vm @ y)
    return out, stats


def _phi_seed(Hm, order, scale, m, beta):
    """phi_order(scale * H_m) (beta e_1)."""
    e1 = np.zeros(m)
    e1[0] = beta
    phis = phi_dense(order, scale * Hm)
    return phis[order] @ e1
