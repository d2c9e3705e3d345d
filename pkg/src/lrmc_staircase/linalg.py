"""Tolerance-aware dense linear algebra.

Every rank decision in the package goes through :func:`numerical_rank`, and
:func:`pseudoinverse` truncates at the same threshold so the two always agree.
Matrices are plain ``numpy.ndarray`` objects of dtype float64.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InputError(ValueError):
    """Malformed or non-conformable input."""


class RangeConditionError(ValueError):
    """A range inclusion required by the generalized Schur complement fails."""

    def __init__(self, which: str, residual: float):
        self.which = which
        self.residual = residual
        super().__init__(f"range condition {which} violated (residual {residual:.3e})")


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds.

    ``rank_rel_tol=None`` selects ``1e-9 * max(m, n)`` for each matrix.
    """

    rank_rel_tol: float | None = None
    range_rel_tol: float = 1e-8
    match_abs_tol: float = 1e-8

    def __post_init__(self):
        if self.rank_rel_tol is not None and not 0 < self.rank_rel_tol < 1:
            raise InputError("rank_rel_tol must lie in (0, 1)")
        if self.range_rel_tol <= 0 or self.match_abs_tol <= 0:
            raise InputError("tolerances must be strictly positive")

    def rank_threshold(self, shape) -> float:
        if self.rank_rel_tol is not None:
            return self.rank_rel_tol
        return 1e-9 * max(max(shape), 1)


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class BlockPartition:
    row_split: int
    col_split: int

    def check(self, shape):
        m, n = shape
        if not (1 <= self.row_split <= m - 1 and 1 <= self.col_split <= n - 1):
            raise InputError(f"split {self.row_split, self.col_split} not inside a {m}x{n} matrix")

    def blocks(self, M):
        self.check(M.shape)
        i, j = self.row_split, self.col_split
        return M[:i, :j], M[:i, j:], M[i:, :j], M[i:, j:]


def as_matrix(x) -> np.ndarray:
    """Coerce to a finite 2-D float array; 1-D input becomes a column."""
    M = np.array(x, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2:
        raise InputError(f"expected a matrix, got array of ndim {M.ndim}")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    return M


def singular_values(M: np.ndarray) -> np.ndarray:
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def numerical_rank(M, tol: Tolerances = DEFAULT_TOL) -> int:
    """Count singular values above ``rank_rel_tol * sigma_max``."""
    M = np.asarray(M, dtype=float)
    s = singular_values(M)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_threshold(M.shape) * s[0]))


def pseudoinverse(M, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    m, n = M.shape
    if M.size == 0:
        return np.zeros((n, m))
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((n, m))
    keep = s > tol.rank_threshold(M.shape) * s[0]
    return (Vt[keep].T / s[keep]) @ U[:, keep].T


def range_residual(A, B, tol: Tolerances = DEFAULT_TOL) -> float:
    """Relative residual of projecting the columns of ``B`` onto ``Range(A)``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[0] != B.shape[0]:
        raise InputError(f"row counts differ: {A.shape[0]} vs {B.shape[0]}")
    if B.size == 0:
        return 0.0
    R = B - A @ (pseudoinverse(A, tol) @ B)
    return float(np.linalg.norm(R) / max(1.0, np.linalg.norm(B)))


def range_contains(A, B, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff Range(B) lies in Range(A) up to ``range_rel_tol``."""
    return range_residual(A, B, tol) <= tol.range_rel_tol


def schur_complement(M, p: BlockPartition, tol: Tolerances = DEFAULT_TOL,
                     check: bool = True) -> np.ndarray:
    """Generalized Schur complement ``D - C A^+ B`` of the top-left block.

    With ``check=False`` the two range inclusions are not verified; callers
    use that only when they have certified them already.  Singular
    components below the rank threshold of ``M`` itself are cancellation
    noise and are removed, so a complement that vanishes exactly has rank 0.
    """
    M = np.asarray(M, dtype=float)
    A, B, C, D = p.blocks(M)
    if check:
        res = range_residual(A, B, tol)
        if res > tol.range_rel_tol:
            raise RangeConditionError("Range(B) in Range(A)", res)
        res = range_residual(A.T, C.T, tol)
        if res > tol.range_rel_tol:
            raise RangeConditionError("Range(C^T) in Range(A^T)", res)
    T = C @ pseudoinverse(A, tol) @ B
    S = D - T
    if S.size == 0:
        return S
    scale = max(singular_values(M)[0], singular_values(T)[0])
    U, s, Vt = np.linalg.svd(S, full_matrices=False)
    keep = s > tol.rank_threshold(M.shape) * scale
    return (U[:, keep] * s[keep]) @ Vt[keep]


def symmetric_check(M, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    if M.size and np.max(np.abs(M - M.T)) > tol.match_abs_tol:
        raise InputError("matrix is not symmetric")
    return M


def is_psd(M, tol: Tolerances = DEFAULT_TOL) -> bool:
    M = symmetric_check(M, tol)
    if M.size == 0:
        return True
    w = np.linalg.eigvalsh((M + M.T) / 2)
    return bool(w[0] >= -tol.rank_threshold(M.shape) * max(1.0, w[-1]))
