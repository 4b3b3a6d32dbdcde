"""Numerical rank and subspace helpers shared by the verifiers."""

from __future__ import annotations

import numpy as np
from scipy.linalg import subspace_angles, svdvals

DEFAULT_RANK_TOLERANCE = 1e-10


def unit_columns(matrix: np.ndarray) -> np.ndarray:
    """Scale every non-zero column to unit Euclidean norm."""
    norms = np.linalg.norm(matrix, axis=0)
    norms[norms == 0.0] = 1.0
    return matrix / norms


def equilibrate(matrix: np.ndarray) -> np.ndarray:
    """Scale columns and then rows to unit norm; rank is unchanged."""
    scaled = unit_columns(matrix)
    row_norms = np.linalg.norm(scaled, axis=1)
    row_norms[row_norms == 0.0] = 1.0
    return scaled / row_norms[:, np.newaxis]


def numeric_rank(matrix: np.ndarray, tolerance: float = DEFAULT_RANK_TOLERANCE, balance: bool = True) -> int:
    """Count singular values above tolerance * sigma_max * max(rows, cols).

    With ``balance`` the matrix is equilibrated first so precoders with a wide
    dynamic range do not push genuine directions under the threshold.
    """
    if matrix.size == 0:
        return 0
    work = equilibrate(matrix) if balance else matrix
    values = svdvals(work)
    if values[0] == 0.0:
        return 0
    cutoff = tolerance * values[0] * max(work.shape)
    return int(np.count_nonzero(values > cutoff))


def max_principal_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Return the largest principal angle (radians) between span(a) and span(b)."""
    return float(np.max(subspace_angles(a, b)))


def collinearity_residual(candidate: np.ndarray, reference: np.ndarray) -> float:
    """Return min over complex c of ||a - c*b|| for unit-normalized a and b.

    Computed from the projection residual directly so round-off in
    ``1 - |<b, a>|**2`` does not inflate the result.
    """
    a = candidate / np.linalg.norm(candidate)
    b = reference / np.linalg.norm(reference)
    return float(np.linalg.norm(a - np.vdot(b, a) * b))


def complement_basis(matrix: np.ndarray, rank: int) -> np.ndarray:
    """Return an orthonormal basis of the orthogonal complement of the top-``rank`` column space."""
    rows = matrix.shape[0]
    if matrix.size == 0 or rank == 0:
        return np.eye(rows, dtype=np.complex128)
    left, _, _ = np.linalg.svd(matrix, full_matrices=True)
    return left[:, rank:]
