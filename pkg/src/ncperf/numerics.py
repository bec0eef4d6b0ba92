"""Small dense matrix helpers.

Matrices are plain 2-D ``numpy`` float arrays. The class counts handled here
are small (tens at most), so clarity wins over speed.
"""

from pathlib import Path

import numpy as np

from .exceptions import ParseError, ShapeMismatch, SingularMatrix

PIVOT_TOL = 1e-12


def as_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise ShapeMismatch(f"{name} must be a non-empty 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def invert(M):
    """Invert a square matrix by Gauss-Jordan elimination with partial pivoting.

    Raises
    ------
    SingularMatrix
        If a pivot of magnitude below ``PIVOT_TOL`` is met after row exchange.
    """
    M = as_matrix(M)
    n, k = M.shape
    if n != k:
        raise ShapeMismatch(f"cannot invert non-square matrix of shape {M.shape}")
    aug = np.hstack([M.copy(), np.eye(n)])
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(aug[col:, col])))
        pivot = aug[pivot_row, col]
        if abs(pivot) < PIVOT_TOL:
            raise SingularMatrix(f"pivot {pivot:.3e} in column {col} is below {PIVOT_TOL:g}")
        if pivot_row != col:
            aug[[col, pivot_row]] = aug[[pivot_row, col]]
        aug[col] /= aug[col, col]
        for row in range(n):
            if row != col and aug[row, col] != 0.0:
                aug[row] -= aug[row, col] * aug[col]
    return aug[:, n:]


def matmul(A, B):
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape[1] != B.shape[0]:
        raise ShapeMismatch(f"cannot multiply {A.shape} by {B.shape}")
    return A @ B


def matvec(A, v):
    A = as_matrix(A, "A")
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"cannot multiply {A.shape} by vector of shape {v.shape}")
    return A @ v


def transpose(A):
    return as_matrix(A).T.copy()


def induced_one_norm(M):
    """Maximum absolute column sum."""
    return float(np.max(np.sum(np.abs(as_matrix(M)), axis=0)))


def vec_norm(M, p=1):
    """Entrywise 1-norm or max-norm of a matrix (``p`` is 1 or ``np.inf``)."""
    M = np.abs(as_matrix(M))
    if p == 1:
        return float(M.sum())
    if p in (np.inf, "inf"):
        return float(M.max())
    raise ValueError(f"p must be 1 or inf, got {p!r}")


def inner(A, C):
    """Frobenius inner product ``<A, C>``."""
    return float(np.sum(np.asarray(A) * np.asarray(C)))


def read_matrix_csv(path):
    """Read a headerless comma-separated matrix."""
    path = Path(path)
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ParseError(f"{path}: no matrix rows")
    if len({len(r) for r in rows}) != 1:
        raise ParseError(f"{path}: rows have unequal length")
    return as_matrix(rows)


def write_matrix_csv(path, M):
    np.savetxt(path, as_matrix(M), delimiter=",", fmt="%.17g")
