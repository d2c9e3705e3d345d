"""Sampling patterns, biclique chains and corner blocks.

Indices are 0-based throughout the library; the text formats in
:mod:`lrmc_staircase.fileio` translate to and from 1-based indices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .linalg import InputError


class ChainInvalid(ValueError):
    """A proposed biclique chain violates one of the staircase conditions."""


@dataclass(frozen=True)
class SampledInstance:
    m: int
    n: int
    r: int
    samples: Mapping[tuple[int, int], float]

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise InputError("matrix dimensions must be positive")
        if not 1 <= self.r <= min(self.m, self.n):
            raise InputError(f"target rank {self.r} not in [1, min(m, n)={min(self.m, self.n)}]")
        for (i, j), v in self.samples.items():
            if not (0 <= i < self.m and 0 <= j < self.n):
                raise InputError(f"sample index ({i + 1}, {j + 1}) out of range")
            if not np.isfinite(v):
                raise InputError(f"sample ({i + 1}, {j + 1}) is not finite")
        object.__setattr__(self, "samples", dict(self.samples))

    @classmethod
    def from_matrix(cls, Z, mask, r: int) -> "SampledInstance":
        Z = np.asarray(Z, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        samples = {(int(i), int(j)): float(Z[i, j]) for i, j in zip(*np.nonzero(mask))}
        return cls(Z.shape[0], Z.shape[1], r, samples)

    @property
    def mask(self) -> np.ndarray:
        M = np.zeros((self.m, self.n), dtype=bool)
        for i, j in self.samples:
            M[i, j] = True
        return M

    def partial(self) -> np.ndarray:
        """Dense array with NaN at unsampled positions."""
        W = np.full((self.m, self.n), np.nan)
        for (i, j), v in self.samples.items():
            W[i, j] = v
        return W

    def matches(self, M, atol: float) -> bool:
        return all(abs(M[i, j] - v) <= atol for (i, j), v in self.samples.items())


@dataclass(frozen=True)
class Biclique:
    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def __post_init__(self):
        rows, cols = tuple(sorted(set(self.rows))), tuple(sorted(set(self.cols)))
        if not rows or not cols:
            raise InputError("biclique needs at least one row and one column")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @property
    def edges(self) -> frozenset:
        return frozenset(itertools.product(self.rows, self.cols))

    def values(self, inst: SampledInstance) -> np.ndarray:
        return np.array([[inst.samples[i, j] for j in self.cols] for i in self.rows])

    def __and__(self, other: "Biclique"):
        """Row and column index sets shared with ``other``."""
        return (tuple(sorted(set(self.rows) & set(other.rows))),
                tuple(sorted(set(self.cols) & set(other.cols))))


@dataclass(frozen=True)
class StaircaseChain:
    bicliques: tuple[Biclique, ...]
    mode: str = "strict"
    # "odd-wide" when the conditions hold verbatim, "odd-tall" when they hold
    # on the transposed instance; None in lenient mode or for l <= 2.
    orientation: str | None = None
    row_order: tuple[int, ...] = ()
    col_order: tuple[int, ...] = ()

    def __len__(self):
        return len(self.bicliques)

    @property
    def corners(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        b = self.bicliques
        return [b[k] & b[k + 1] for k in range(len(b) - 1)]


@dataclass(frozen=True)
class CornerBlock:
    index: int
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    values: np.ndarray = field(compare=False)


@dataclass(frozen=True)
class NotStaircase:
    reason: str

    def __bool__(self):
        return False


def _parity_violation(U, V, l, wide_odd: bool) -> str | None:
    """First violated intersection condition, or None.

    ``U``/``V`` are lists of sets indexed from 1.  With ``wide_odd`` the
    conditions are the verbatim ones; otherwise the roles of rows and columns
    are exchanged, which is the same condition set for the transposed matrix.
    """
    for i in range(1, l - 1):
        even = i % 2 == 0
        # verbatim: even i -> rows shrink to the middle, columns nest
        rows_meet = even if wide_odd else not even
        P, S = (U, V) if rows_meet else (V, U)
        if P[i] & P[i + 2] != P[i + 1]:
            return f"intersection condition at i={i}: middle block is not the overlap of its neighbours"
        if not (S[i] <= S[i + 1] and S[i + 2] <= S[i + 1]):
            return f"nesting condition at i={i}: neighbours not contained in the middle block"
    return None


def validate_chain(inst: SampledInstance, chain: Iterable[Biclique], mode: str = "strict") -> StaircaseChain:
    """Certify ``chain`` as a staircase chain for ``inst``.

    ``mode="strict"`` enforces the alternating intersection conditions (in
    either orientation), ``mode="lenient"`` only requires nonempty consecutive
    overlaps.  Raises :class:`ChainInvalid` naming the first violation.
    """
    if mode not in ("strict", "lenient"):
        raise InputError(f"unknown chain mode {mode!r}")
    chain = tuple(chain)
    if not chain:
        raise ChainInvalid("chain is empty")
    l = len(chain)
    for k, b in enumerate(chain):
        if max(b.rows) >= inst.m or max(b.cols) >= inst.n:
            raise ChainInvalid(f"biclique {k + 1} references an index outside the matrix")
        missing = [e for e in itertools.product(b.rows, b.cols) if e not in inst.samples]
        if missing:
            i, j = missing[0]
            raise ChainInvalid(f"biclique {k + 1} is not fully sampled: entry ({i + 1}, {j + 1}) missing")
    edges = [b.edges for b in chain]
    union = frozenset().union(*edges)
    if union != frozenset(inst.samples):
        extra = sorted(set(inst.samples) - union)
        i, j = extra[0]
        raise ChainInvalid(f"coverage: sample ({i + 1}, {j + 1}) lies in no biclique")
    rows = set().union(*(b.rows for b in chain))
    cols = set().union(*(b.cols for b in chain))
    if len(rows) != inst.m or len(cols) != inst.n:
        raise ChainInvalid("coverage: some row or column is touched by no biclique")
    for k in range(l - 1):
        if not edges[k] & edges[k + 1]:
            raise ChainInvalid(f"overlap: bicliques {k + 1} and {k + 2} share no entry")
        for j in range(k + 2, l):
            if edges[k] & edges[j]:
                raise ChainInvalid(f"overlap: non-consecutive bicliques {k + 1} and {j + 1} share entries")
    orientation = None
    if mode == "strict" and l >= 3:
        U = [None] + [set(b.rows) for b in chain]
        V = [None] + [set(b.cols) for b in chain]
        why = _parity_violation(U, V, l, wide_odd=True)
        if why is None:
            orientation = "odd-wide"
        elif _parity_violation(U, V, l, wide_odd=False) is None:
            orientation = "odd-tall"
        else:
            raise ChainInvalid(why)
    if mode == "strict":
        # each row and column must sit in a contiguous run of bicliques
        for kind, sets in (("row", [b.rows for b in chain]), ("column", [b.cols for b in chain])):
            for v in set().union(*sets):
                hits = [k for k, s in enumerate(sets) if v in s]
                if hits[-1] - hits[0] + 1 != len(hits):
                    raise ChainInvalid(f"running intersection: {kind} {v + 1} lies in bicliques "
                                       f"{', '.join(str(k + 1) for k in hits)} only")
    first = {}
    for k, b in enumerate(chain):
        for i in b.rows:
            first.setdefault(("r", i), k)
        for j in b.cols:
            first.setdefault(("c", j), k)
    row_order = tuple(sorted(range(inst.m), key=lambda i: (first[("r", i)], i)))
    col_order = tuple(sorted(range(inst.n), key=lambda j: (first[("c", j)], j)))
    return StaircaseChain(chain, mode, orientation, row_order, col_order)


def corner_blocks(chain: StaircaseChain, inst: SampledInstance) -> list[CornerBlock]:
    out = []
    for k, (rows, cols) in enumerate(chain.corners):
        vals = np.array([[inst.samples[i, j] for j in cols] for i in rows])
        out.append(CornerBlock(k, rows, cols, vals))
    return out


def _candidate_bicliques(inst: SampledInstance) -> list[Biclique]:
    row_sup = [frozenset(j for j in range(inst.n) if (i, j) in inst.samples) for i in range(inst.m)]
    col_sup = [frozenset(i for i in range(inst.m) if (i, j) in inst.samples) for j in range(inst.n)]
    found = set()
    for S in set(row_sup):
        if S:
            rows = [i for i in range(inst.m) if S <= row_sup[i]]
            found.add(Biclique(tuple(rows), tuple(S)))
    for S in set(col_sup):
        if S:
            cols = [j for j in range(inst.n) if S <= col_sup[j]]
            found.add(Biclique(tuple(S), tuple(cols)))
    found = list(found)
    # drop blocks contained in another candidate
    keep = [b for b in found
            if not any(c is not b and b.edges < c.edges for c in found)]
    return sorted(keep, key=lambda b: (b.rows, b.cols))


def _as_path(blocks: list[Biclique]) -> list[Biclique] | None:
    """Order ``blocks`` so that only consecutive ones share entries."""
    k = len(blocks)
    if k == 1:
        return blocks
    E = [b.edges for b in blocks]
    adj = {a: [b for b in range(k) if b != a and E[a] & E[b]] for a in range(k)}
    if any(len(v) > 2 or not v for v in adj.values()):
        return None
    ends = [a for a in range(k) if len(adj[a]) == 1]
    if len(ends) != 2:
        return None
    start = min(ends, key=lambda a: (blocks[a].rows, blocks[a].cols))
    order, prev = [start], None
    while len(order) < k:
        nxt = [b for b in adj[order[-1]] if b != prev]
        if not nxt:
            return None
        prev = order[-1]
        order.append(nxt[0])
    return [blocks[a] for a in order]


def _try_certify(inst, blocks, mode):
    path = _as_path(blocks)
    if path is None:
        return None
    try:
        return validate_chain(inst, path, mode)
    except ChainInvalid:
        return None


def detect_chain(inst: SampledInstance, mode: str = "strict", exhaustive_limit: int = 14):
    """Find a certified chain or return :class:`NotStaircase`.

    Failure to detect is not a proof that no chain exists.
    """
    if not inst.samples:
        return NotStaircase("no sampled entries")
    cands = _candidate_bicliques(inst)
    # blocks holding an entry nobody else covers must be in any cover by candidates
    owner = {}
    for b in cands:
        for e in b.edges:
            owner.setdefault(e, []).append(b)
    essential = {bs[0] for bs in owner.values() if len(bs) == 1}
    ess = sorted(essential, key=lambda b: (b.rows, b.cols))
    covered = frozenset().union(*(b.edges for b in ess)) if ess else frozenset()
    if ess and covered == frozenset(inst.samples):
        got = _try_certify(inst, ess, mode)
        if got is not None:
            return got
    if len(cands) <= exhaustive_limit:
        rest = [b for b in cands if b not in essential]
        for extra in range(len(rest) + 1):
            for combo in itertools.combinations(rest, extra):
                blocks = ess + list(combo)
                if frozenset().union(*(b.edges for b in blocks)) != frozenset(inst.samples):
                    continue
                got = _try_certify(inst, blocks, mode)
                if got is not None:
                    return got
        return NotStaircase(f"no chain among {len(cands)} candidate bicliques certifies")
    return NotStaircase(f"greedy assembly failed ({len(cands)} candidate bicliques)")
