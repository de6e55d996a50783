"""Evaluation of the phi functions used by exponential integrators.

phi_0(z) = exp(z) and, for k >= 1,

    phi_k(z) = int_0^1 exp((1-s) z) s^(k-1) / (k-1)! ds,

equivalently the entire functions with Taylor series
sum_j z^j / (j+k)!.  Scalar values, dense matrix values (via a single
augmented-matrix exponential) and an independent truncated-series oracle
are provided.  Only small matrices are handled here; large operators go
through the Krylov machinery in :mod:`expmhd.krylov`.
"""

import math

import numpy as np
import scipy.linalg

MAX_ORDER = 4

# Below this magnitude the downward recurrence (phi_k - 1/k!)/z loses
# digits to cancellation, so a truncated Taylor series is used instead.
SMALL_ARG_THRESHOLD = 0.5
SERIES_TERMS = 20


def _check_order(k):
    if not isinstance(k, (int, np.integer)) or k < 0 or k > MAX_ORDER:
        raise ValueError(f"phi order must be an integer in [0, {MAX_ORDER}], got {k!r}")


def phi_scalar(k, z):
    """Evaluate phi_k(z) for a scalar argument.

    Parameters
    ----------
    k : int
        Order of the phi function, 0 <= k <= 4.
    z : float or complex
        Argument.

    Returns
    -------
    float or complex
    """
    _check_order(k)
    z = complex(z) if np.iscomplexobj(z) or isinstance(z, complex) else float(z)
    if k == 0:
        return np.exp(z)
    if abs(z) < SMALL_ARG_THRESHOLD:
        # Taylor series sum_j z^j / (j+k)!
        acc = 0.0
        term = 1.0 / math.factorial(k)
        zp = 1.0
        for j in range(SERIES_TERMS):
            acc += zp / math.factorial(j + k)
            zp = zp * z
        return acc
    val = np.exp(z)
    for j in range(k):
        val = (val - 1.0 / math.factorial(j)) / z
    return val


def phi_dense(k_max, H):
    """All matrices phi_0(H) ... phi_{k_max}(H) for a small dense H.

    Builds the block upper-bidiagonal augmented matrix

        [[H, I, 0, ...],
         [0, 0, I, ...],
         ...          ]

    whose exponential carries phi_j(H) in the top block row, and takes a
    single scipy Pade scaling-and-squaring exponential.

    Parameters
    ----------
    k_max : int
        Highest order required, 0 <= k_max <= 4.
    H : (n, n) array_like
        Square matrix with finite entries.

    Returns
    -------
    list of (n, n) ndarray
        [phi_0(H), ..., phi_{k_max}(H)].
    """
    _check_order(k_max)
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"H must be square, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise FloatingPointError("H contains non-finite entries")
    n = H.shape[0]
    if k_max == 0:
        return [scipy.linalg.expm(H)]
    dim = (k_max + 1) * n
    A = np.zeros((dim, dim))
    A[:n, :n] = H
    for j in range(k_max):
        blk = (j + 1) * n
        A[j * n:blk, blk:blk + n] = np.eye(n)
    E = scipy.linalg.expm(A)
    if not np.all(np.isfinite(E)):
        raise FloatingPointError("overflow in augmented-matrix exponential")
    return [E[:n, j * n:(j + 1) * n] for j in range(k_max + 1)]


def phi_series_oracle(k, H, terms):
    """Direct truncated-series evaluation of phi_k(H); test oracle.

    Sums sum_{j=0}^{terms-1} H^j / (j+k)! term by term, independent of
    the augmented-matrix path used by :func:`phi_dense`.

    Raises
    ------
    FloatingPointError
        If term norms grow for 5 consecutive terms (series diverging for
        the given truncation).
    """
    _check_order(k)
    H = np.atleast_2d(np.asarray(H, dtype=float))
    if H.shape[0] != H.shape[1]:
        raise ValueError(f"H must be square, got shape {H.shape}")
    n = H.shape[0]
    acc = np.zeros((n, n))
    term = np.eye(n) / math.factorial(k)  # H^0 / k!
    prev_norm = np.inf
    growth_run = 0
    for j in range(terms):
        acc = acc + term
        norm = np.linalg.norm(term)
        if norm > prev_norm:
            growth_run += 1
            if growth_run >= 5:
                raise FloatingPointError(
                    f"phi series diverging after {j + 1} terms (||term|| = {norm:.3e})"
                )
        else:
            growth_run = 0
        prev_norm = norm
        # H^{j+1}/(j+1+k)! = H @ (H^j/(j+k)!) / (j+k+1)
        term = (H @ term) / (j + k + 1)
    return acc
