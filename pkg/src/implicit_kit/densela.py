"""
Small dense linear algebra: LU with partial pivoting, determinant, solve, inverse.

Matrices are plain 2-D float ``numpy`` arrays. Everything here targets the
handful-of-unknowns regime of Jacobian blocks, so clarity wins over speed.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrixError

__all__ = ["lu_factor", "det", "solve", "inverse", "matmul", "PIVOT_FLOOR", "MAX_DET_DIM"]

PIVOT_FLOOR = 1e-14
MAX_DET_DIM = 64


def _square(A) -> np.ndarray:
    A = np.array(A, dtype=float, ndmin=2)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def lu_factor(A, check: bool = True):
    """Factor ``P A = L U`` in place on a copy of ``A``.

    Returns ``(LU, perm, sign)``: unit-lower and upper factors packed in one
    array, the row order ``perm`` and the permutation parity. With ``check``
    a pivot not exceeding ``PIVOT_FLOOR * max|A|`` raises
    :class:`SingularMatrixError`; without it elimination simply stops at an
    exactly zero pivot.
    """
    LU = _square(A).copy()
    n = LU.shape[0]
    perm = np.arange(n)
    sign = 1.0
    floor = PIVOT_FLOOR * (np.abs(LU).max() if LU.size else 0.0)
    for k in range(n):
        p = k + int(np.argmax(np.abs(LU[k:, k])))
        if p != k:
            LU[[k, p]] = LU[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        pivot = LU[k, k]
        if check and (abs(pivot) <= floor or pivot == 0.0):
            raise SingularMatrixError(f"matrix is singular to working precision at pivot {k}", pivot_index=k)
        if pivot == 0.0:
            continue
        LU[k + 1:, k] /= pivot
        LU[k + 1:, k + 1:] -= np.outer(LU[k + 1:, k], LU[k, k + 1:])
    return LU, perm, sign


def det(A) -> float:
    A = _square(A)
    if A.shape[0] > MAX_DET_DIM:
        raise ValueError(f"determinant limited to dimension {MAX_DET_DIM}")
    if A.shape[0] == 0:
        return 1.0
    LU, _, sign = lu_factor(A, check=False)
    return float(sign * np.prod(np.diag(LU)))


def solve(A, B) -> np.ndarray:
    """Solve ``A X = B``; ``B`` may be a vector or a matrix with matching rows."""
    A = _square(A)
    B = np.asarray(B, dtype=float)
    vector = B.ndim == 1
    Bm = B.reshape(-1, 1) if vector else B
    if Bm.shape[0] != A.shape[0]:
        raise ValueError(f"right-hand side has {Bm.shape[0]} rows, matrix has {A.shape[0]}")
    LU, perm, _ = lu_factor(A)
    n = A.shape[0]
    X = Bm[perm].copy()
    for k in range(n):
        X[k + 1:] -= np.outer(LU[k + 1:, k], X[k])
    for k in range(n - 1, -1, -1):
        X[k] -= LU[k, k + 1:] @ X[k + 1:]
        X[k] /= LU[k, k]
    return X.ravel() if vector else X


def inverse(A) -> np.ndarray:
    A = _square(A)
    return solve(A, np.eye(A.shape[0]))


def matmul(A, B) -> np.ndarray:
    return np.asarray(A, dtype=float) @ np.asarray(B, dtype=float)
