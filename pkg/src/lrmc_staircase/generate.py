"""Random staircase instances with a known rank-r ground truth."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import InputError
from .pattern import Biclique, SampledInstance


@dataclass(frozen=True)
class Generated:
    instance: SampledInstance
    chain: tuple[Biclique, ...]
    truth: np.ndarray


def _split(total, parts, low, rng):
    if parts * low > total:
        raise InputError(f"cannot split {total} into {parts} bands of size >= {low}")
    sizes = np.full(parts, low)
    extra = rng.multinomial(total - parts * low, np.ones(parts) / parts)
    sizes += extra
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    return [list(range(bounds[k], bounds[k + 1])) for k in range(parts)]


def staircase_bands(l: int):
    """Band indices of each biclique for a tall-first staircase.

    Tall block ``2k+1`` spans row bands ``k, k+1`` and column band ``k``; wide
    block ``2k+2`` spans row band ``k+1`` and column bands ``k, k+1``.
    """
    out = []
    for b in range(l):
        k = b // 2
        out.append(((k, k + 1), (k,)) if b % 2 == 0 else ((k + 1,), (k, k + 1)))
    return out


def corner_bands(l: int):
    """(row band, column band) of each corner for a tall-first staircase."""
    return [(k // 2 + 1, (k + 1) // 2) for k in range(l - 1)]


def generate(m: int, n: int, r: int, l: int, seed: int = 0, deficient_corner: int | None = None,
             orientation: str = "wide", shuffle: bool = False) -> Generated:
    """Mask a random rank-r matrix with an l-biclique staircase.

    ``deficient_corner`` (0-based) drops that corner to rank ``r - 1`` while
    keeping the others at rank r; only end corners can be lowered alone.
    ``orientation="wide"`` makes odd-numbered bicliques wide (the verbatim
    condition set), ``"tall"`` the transpose.
    """
    if l < 1 or r < 1:
        raise InputError("l and r must be positive")
    if orientation not in ("wide", "tall"):
        raise InputError(f"unknown orientation {orientation!r}")
    if orientation == "wide":
        g = generate(n, m, r, l, seed, deficient_corner, "tall", shuffle)
        chain = tuple(Biclique(b.cols, b.rows) for b in g.chain)
        samples = {(j, i): v for (i, j), v in g.instance.samples.items()}
        return Generated(SampledInstance(m, n, r, samples), chain, g.truth.T.copy())
    rng = np.random.default_rng(seed)
    bands = staircase_bands(l)
    n_row = max(max(rb) for rb, _ in bands) + 1
    n_col = max(max(cb) for _, cb in bands) + 1
    if r > min(m, n):
        raise InputError(f"rank {r} exceeds min(m, n)")
    row_bands = _split(m, n_row, r, rng)
    col_bands = _split(n, n_col, r, rng)
    X = rng.standard_normal((m, r))
    Y = rng.standard_normal((n, r))
    if deficient_corner is not None:
        corners = corner_bands(l)
        if not 0 <= deficient_corner < len(corners):
            raise InputError(f"deficient corner {deficient_corner + 1} out of range 1..{len(corners)}")
        rb, cb = corners[deficient_corner]
        row_shared = sum(1 for c in corners if c[0] == rb) > 1
        col_shared = sum(1 for c in corners if c[1] == cb) > 1
        if row_shared and col_shared:
            raise InputError(f"corner {deficient_corner + 1} is interior; it cannot be rank deficient alone")
        # squeeze the unshared factor block into an (r-1)-dimensional subspace
        F, idx = (Y, col_bands[cb]) if not col_shared else (X, row_bands[rb])
        basis = rng.standard_normal((r, r - 1))
        F[idx] = rng.standard_normal((len(idx), r - 1)) @ basis.T
    Z = X @ Y.T
    chain = []
    for rbs, cbs in bands:
        rows = [i for k in rbs for i in row_bands[k]]
        cols = [j for k in cbs for j in col_bands[k]]
        chain.append((rows, cols))
    if shuffle:
        pr, pc = rng.permutation(m), rng.permutation(n)
        # position i of the shuffled matrix holds original row pr[i]
        inv_r, inv_c = np.argsort(pr), np.argsort(pc)
        Z = Z[np.ix_(pr, pc)]
        chain = [([int(inv_r[i]) for i in rows], [int(inv_c[j]) for j in cols]) for rows, cols in chain]
    mask = np.zeros((m, n), dtype=bool)
    for rows, cols in chain:
        mask[np.ix_(rows, cols)] = True
    inst = SampledInstance.from_matrix(Z, mask, r)
    return Generated(inst, tuple(Biclique(tuple(rw), tuple(cl)) for rw, cl in chain), Z)


def generate_cross(m: int, n: int, r: int, seed: int = 0, deficient: bool = True) -> Generated:
    """Two crossing bicliques ``(r1+r2) x (c1+c2)`` and ``(r2+r3) x (c2+c3)``.

    The blocks ``r1 x c3`` and ``r3 x c1`` are unsampled.  With ``deficient``
    the shared row band r2 and column band c2 both get factors of rank
    ``r - 1``; lowering only one of them leaves the completion unique.
    """
    if r < 1:
        raise InputError("r must be positive")
    rng = np.random.default_rng(seed)
    rb, cb = _split(m, 3, r, rng), _split(n, 3, r, rng)
    X = rng.standard_normal((m, r))
    Y = rng.standard_normal((n, r))
    if deficient:
        for F, idx in ((X, rb[1]), (Y, cb[1])):
            F[idx] = rng.standard_normal((len(idx), r - 1)) @ rng.standard_normal((r - 1, r))
    Z = X @ Y.T
    chain = (Biclique(tuple(rb[0] + rb[1]), tuple(cb[0] + cb[1])),
             Biclique(tuple(rb[1] + rb[2]), tuple(cb[1] + cb[2])))
    mask = np.zeros((m, n), dtype=bool)
    for b in chain:
        mask[np.ix_(b.rows, b.cols)] = True
    return Generated(SampledInstance.from_matrix(Z, mask, r), chain, Z)
