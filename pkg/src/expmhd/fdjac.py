"""Matrix-free forward-difference Jacobian action.

J(a) v is approximated by (F(a + sigma v) - F(a)) / sigma with the
perturbation scaled so that ||sigma v||_inf = sqrt(eps), unless the
vector is already that small, in which case it is used as is.  The base
evaluation F(a) is cached at construction and reused for every apply.
"""

import math

import numpy as np

from .krylov import LinearOperator

EPS_MACHINE = np.finfo(float).eps
SQRT_EPS = math.sqrt(EPS_MACHINE)


class FdJacobianOperator(LinearOperator):
    """Forward-difference approximation of the Jacobian of ``rhs`` at ``a``.

    Parameters
    ----------
    rhs : callable
        Right-hand-side function y -> F(y).
    a : (n,) ndarray
        Base point.
    f_a : (n,) ndarray, optional
        Cached F(a); evaluated once here if not supplied.
    """

    def __init__(self, rhs, a, f_a=None):
        self.rhs = rhs
        self.a = np.asarray(a, dtype=float)
        self.f_a = np.asarray(f_a, dtype=float) if f_a is not None else rhs(self.a)
        super().__init__(self.a.size, self._apply)

    def _apply(self, v):
        v = np.asarray(v, dtype=float)
        vnorm = np.linalg.norm(v, np.inf)
        if vnorm == 0.0:
            return np.zeros_like(self.a)
        sigma = SQRT_EPS / vnorm if vnorm > SQRT_EPS else 1.0
        f_pert = self.rhs(self.a + sigma * v)
        if not np.all(np.isfinite(f_pert)):
            bad = int(np.flatnonzero(~np.isfinite(f_pert))[0])
            raise FloatingPointError(
                f"non-finite rhs value at component {bad} during Jacobian apply")
        return (f_pert - self.f_a) / sigma
