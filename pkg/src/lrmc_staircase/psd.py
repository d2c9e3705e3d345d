"""Positive semidefinite completion of ``[[A, B], [B^T, C]]`` with C missing.

Also reproduces the 3x3 example in which a rank-deficient clique
intersection still admits exactly one PSD completion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .linalg import (DEFAULT_TOL, InputError, Tolerances, as_matrix, is_psd, numerical_rank,
                     pseudoinverse, range_contains, symmetric_check)


class NoPsdCompletion(ValueError):
    pass


class RankExcess(ValueError):
    pass


@dataclass(frozen=True)
class PsdInstance:
    A: np.ndarray
    B: np.ndarray
    r: int

    def __post_init__(self):
        A = as_matrix(self.A)
        B = as_matrix(self.B)
        symmetric_check(A)
        if B.shape[0] != A.shape[0]:
            raise InputError(f"B has {B.shape[0]} rows, A has {A.shape[0]}")
        if self.r < 1:
            raise InputError("target rank must be positive")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def assemble(self, C) -> np.ndarray:
        return np.block([[self.A, self.B], [self.B.T, C]])


@dataclass(frozen=True)
class PsdCompletion:
    unique: bool
    completions: tuple[np.ndarray, ...]


def psd_complete(inst: PsdInstance, tol: Tolerances = DEFAULT_TOL, rng=None) -> PsdCompletion:
    """Unique ``C = B^T A^+ B`` when rank(A) = r, else two distinct PSD completions."""
    A, B, r = inst.A, inst.B, inst.r
    if not is_psd(A, tol):
        raise NoPsdCompletion("A is not positive semidefinite")
    if not range_contains(A, B, tol):
        raise NoPsdCompletion("Range(B) is not contained in Range(A)")
    a = numerical_rank(A, tol)
    if a > r:
        raise RankExcess(f"rank(A) = {a} > {r}")
    S = B.T @ pseudoinverse(A, tol) @ B
    S = (S + S.T) / 2
    if a == r:
        return PsdCompletion(True, (S,))
    k = r - a
    size = S.shape[0]
    if size < k:
        raise NoPsdCompletion(f"C is {size}x{size}; cannot carry the missing rank {k}")
    rng = np.random.default_rng(0) if rng is None else rng
    Q, _ = np.linalg.qr(rng.standard_normal((size, k)))
    lam = np.linalg.eigvalsh(A)[-1] if A.size else 1.0
    E = 0.5 * max(lam, 1e-12) * (Q @ Q.T)
    return PsdCompletion(False, (S + E, S + 2 * E))


# -- the 3x3 example -----------------------------------------------------------

H_EXAMPLE = ((5, 4, -2), (4, 16, -8), (-2, -8, 4))


@dataclass
class PsdDemoReport:
    matrix: list
    rank: int
    coefficients: tuple  # (x^2, x, 1) coefficients of the Schur scalar
    discriminant: float
    roots: list
    corner_rank: int
    assembled_ranks: list
    assembled_psd: list
    unique: bool
    message: str
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "matrix": self.matrix,
            "rank": self.rank,
            "schur_coefficients": [float(c) for c in self.coefficients],
            "discriminant": float(self.discriminant),
            "roots": [float(x) for x in self.roots],
            "corner_rank": self.corner_rank,
            "assembled_ranks": self.assembled_ranks,
            "assembled_psd": self.assembled_psd,
            "unique": self.unique,
            "message": self.message,
            "notes": self.notes,
        }

    def to_text(self) -> str:
        c2, c1, c0 = self.coefficients
        lines = [
            "matrix (x at positions (1,3) and (3,1)):",
            *("  " + " ".join("x" if v is None else f"{v:g}" for v in row) for row in self.matrix),
            f"target rank: {self.rank}",
            f"schur scalar: ({c2}) x^2 + ({c1}) x + ({c0})",
            f"discriminant: {self.discriminant}",
            "roots: " + (", ".join(f"x = {float(x):.17g}" for x in self.roots) or "none"),
            f"corner rank: {self.corner_rank}",
            f"assembled ranks: {self.assembled_ranks}",
            f"assembled psd: {self.assembled_psd}",
            self.message,
            *self.notes,
        ]
        return "\n".join(lines) + "\n"


def _schur_quadratic(H):
    """Coefficients of ``h33 - [x, h23] A^{-1} [x, h23]^T`` in exact arithmetic."""
    (h11, h12, _), (_, h22, h23), (_, _, h33) = H
    det = h11 * h22 - h12 * h12
    if det == 0:
        raise InputError("top-left 2x2 block is singular")
    p, q, s = h22 / det, -h12 / det, h11 / det
    return -p, -2 * q * h23, h33 - s * h23 * h23


def psd_counterexample(tol: Tolerances = DEFAULT_TOL, rank: int = 2, entries: dict | None = None) -> PsdDemoReport:
    """Solve for the missing corner ``x`` of the 3x3 example.

    ``entries`` overrides known entries by 0-based ``(i, j)``; the symmetric
    partner is set too.  The corner pair ``(0, 2)``/``(2, 0)`` is the unknown.
    """
    H = [[Fraction(v) for v in row] for row in H_EXAMPLE]
    for (i, j), v in (entries or {}).items():
        if {i, j} == {0, 2}:
            raise InputError("entry (1,3) is the unknown and cannot be set")
        H[i][j] = H[j][i] = Fraction(v)
    c2, c1, c0 = _schur_quadratic(H)
    disc = c1 * c1 - 4 * c2 * c0
    if disc == 0:
        roots = [-c1 / (2 * c2)]
    elif disc > 0:
        sq = math.sqrt(disc)
        roots = sorted(((-float(c1) - sq) / (2 * float(c2)), (-float(c1) + sq) / (2 * float(c2))))
    else:
        roots = []
    A = np.array([[float(v) for v in row[:2]] for row in H[:2]])
    corner = np.array([[float(H[1][1])]])
    corner_rank = numerical_rank(corner, tol)
    ranks, psd = [], []
    for x in roots:
        M = np.array([[float(v) for v in row] for row in H])
        M[0, 2] = M[2, 0] = float(x)
        ranks.append(numerical_rank(M, tol))
        psd.append(is_psd(M, tol))
    shown = [[None if {i, j} == {0, 2} else float(H[i][j]) for j in range(3)] for i in range(3)]
    notes = []
    rank_a = numerical_rank(A, tol)
    if rank >= 3:
        unique = False
        message = f"not unique at rank {rank}: every x gives a matrix of rank <= 3"
        if c2 < 0 and disc <= 0:
            notes.append("psd-feasible x: only the root above (the Schur scalar is never positive)")
    elif rank_a > rank:
        unique = False
        message = f"no completion of rank {rank}: the known 2x2 block already has rank {rank_a}"
    elif len(roots) == 1:
        unique = True
        message = f"unique completion at rank {rank}: x = {float(roots[0]):.17g}"
    elif len(roots) == 2:
        unique = False
        message = f"not unique at rank {rank}: two roots"
    else:
        unique = False
        message = f"no real root: no completion of rank {rank}"
    return PsdDemoReport(shown, rank, (c2, c1, c0), disc, roots, corner_rank, ranks, psd, unique, message, notes)
