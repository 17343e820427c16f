"""Symmetric positive-definite solves for kernel-matrix systems."""

import numpy as np
from scipy.linalg import lapack

from .errors import DecompositionError


def spd_solve(a, b):
    """Solve A X = B for symmetric positive-definite A via Cholesky.

    Parameters
    ----------
    a : (n, n) array_like
        Symmetric matrix; the caller adds any ridge needed to make it
        positive definite.
    b : (n,) or (n, k) array_like
        Right-hand side(s).

    Returns
    -------
    x : ndarray, same shape as `b`.

    Raises
    ------
    DecompositionError
        If the factorization hits a non-positive pivot; the failing
        pivot index (0-based) is reported.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    c, info = lapack.dpotrf(a, lower=1)
    if info > 0:
        raise DecompositionError(pivot_index=info - 1)
    if info < 0:
        raise ValueError(f"illegal value in argument {-info} of dpotrf")
    rhs = b if b.ndim == 2 else b[:, None]
    x, info = lapack.dpotrs(c, rhs, lower=1)
    if info != 0:
        raise ValueError(f"illegal value in argument {-info} of dpotrs")
    return x if b.ndim == 2 else x[:, 0]
