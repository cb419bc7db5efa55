"""Dense symmetric eigendecomposition via cyclic Jacobi rotations.

Self-contained and deterministic. Intended for the small matrices used by
the problem catalog; dimension is capped rather than letting sweep cost grow
silently.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import NumericalFailure

DIMENSION_CAP = 64
POSITIVE_EIGENVALUE_TOL = 1e-12

_SYMMETRY_RTOL = 1e-12
_OFF_DIAGONAL_RTOL = 1e-14
_MAX_SWEEPS = 60


def _rotate(a, v, p, q, c, s):
    # a <- J^T a J, v <- v J with J the (p, q) plane rotation.
    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - s * row_q
    a[q, :] = s * row_p + c * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0
    vec_p = v[:, p].copy()
    vec_q = v[:, q].copy()
    v[:, p] = c * vec_p - s * vec_q
    v[:, q] = s * vec_p + c * vec_q


def eigendecompose(matrix, dim_cap=DIMENSION_CAP):
    """Decompose a symmetric matrix as ``U @ diag(w) @ U.T``.

    Returns ``(w, U)`` with eigenvalues ``w`` ascending and orthonormal
    eigenvector columns ``U``. Rejects non-square, non-symmetric or
    non-finite input and matrices larger than ``dim_cap``.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > dim_cap:
        raise ValueError(f"dimension {n} exceeds cap {dim_cap}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    scale = float(np.max(np.abs(a)))
    if float(np.max(np.abs(a - a.T))) > _SYMMETRY_RTOL * max(1.0, scale):
        raise ValueError("matrix is not symmetric")

    work = 0.5 * (a + a.T)
    vecs = np.eye(n)
    off = _off_norm(work)
    for _ in range(_MAX_SWEEPS):
        if off <= _OFF_DIAGONAL_RTOL * max(1.0, scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                tau = (work[q, q] - work[p, p]) / (2.0 * apq)
                tan = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                cos = 1.0 / math.sqrt(1.0 + tan * tan)
                _rotate(work, vecs, p, q, cos, tan * cos)
        off = _off_norm(work)
    else:
        raise NumericalFailure("Jacobi sweeps did not converge", residual=off)

    eigvals = np.diag(work).copy()
    order = np.argsort(eigvals, kind="stable")
    return eigvals[order], vecs[:, order]


def _off_norm(a):
    return float(np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2)))


def smallest_positive_eigenvalue(eigvals, tol=POSITIVE_EIGENVALUE_TOL):
    """Smallest eigenvalue strictly above ``tol``; raises if there is none."""
    vals = np.asarray(eigvals, dtype=float)
    positive = vals[vals > tol]
    if positive.size == 0:
        raise ValueError("no positive eigenvalue above tolerance")
    return float(positive.min())
