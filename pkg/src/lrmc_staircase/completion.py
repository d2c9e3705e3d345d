"""Uniqueness decision, Schur-complement recovery and non-uniqueness witnesses.

Recovery merges the chain bicliques left to right.  Merging a completed
region ``(R1, C1)`` with a biclique ``(R2, C2)`` lays the rows out as
``r1 = R1 - R2, r2 = R1 & R2, r3 = R2 - R1`` (columns likewise) so that the
only unknown cells are ``X1 = r1 x c3`` and ``X2 = r3 x c1``; each is filled
from the shared block ``Q = r2 x c2`` as ``C Q^+ B``.

When a corner is rank deficient the engine tries to build two different
rank-r completions and verifies both numerically.  It never reports
non-uniqueness without such a verified pair; when none is found the verdict
is :class:`Undecided`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr

from .linalg import DEFAULT_TOL, Tolerances, numerical_rank, pseudoinverse
from .pattern import Biclique, SampledInstance, StaircaseChain, corner_blocks

SEPARATION = 1e-3


class RankDeficient(ValueError):
    pass


class RankExcess(ValueError):
    pass


@dataclass(frozen=True)
class CompletionVerdict:
    corner_ranks: tuple[int, ...] = ()

    @property
    def tag(self) -> str:
        return type(self).__name__.lower()


@dataclass(frozen=True)
class Unique(CompletionVerdict):
    completion: np.ndarray = field(default=None, compare=False)


@dataclass(frozen=True)
class NonUnique(CompletionVerdict):
    first: np.ndarray = field(default=None, compare=False)
    second: np.ndarray = field(default=None, compare=False)
    deficient_corner: int = -1
    construction: str = ""
    plan: "PerturbationPlan | None" = field(default=None, compare=False)


@dataclass(frozen=True)
class Undecided(CompletionVerdict):
    reason: str = ""


@dataclass(frozen=True)
class Infeasible(CompletionVerdict):
    reason: str = ""


@dataclass(frozen=True)
class PerturbationPlan:
    """Schur blocks of the three-band construction, relative to ``A1``.

    Bands: rows ``a`` (deficient block), ``e`` and ``c``; columns ``p``
    (split into ``p1``, a column basis of ``A``, and ``p2``) and ``q``.
    """

    M1: np.ndarray
    M2: np.ndarray
    M3: np.ndarray
    M4: np.ndarray
    A1: np.ndarray
    basis_rank: int
    deficiency: int
    rows: dict
    cols: dict

    def eq3_residual(self, tol: Tolerances = DEFAULT_TOL) -> float:
        """Relative residual of ``M4 = M3 M1^+ M2``."""
        R = self.M4 - self.M3 @ pseudoinverse(self.M1, tol) @ self.M2
        return float(np.linalg.norm(R) / max(1.0, np.linalg.norm(self.M4)))


@dataclass(frozen=True)
class Witness:
    first: np.ndarray
    second: np.ndarray
    construction: str
    plan: PerturbationPlan | None = None


def complete_two_block(A, B, C, r: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Missing block ``D = C A^+ B`` of ``[[A, B], [C, D]]`` at rank ``r``."""
    A, B, C = (np.asarray(x, dtype=float) for x in (A, B, C))
    if B.shape[0] != A.shape[0] or C.shape[1] != A.shape[1]:
        raise ValueError(f"blocks not conformable: A{A.shape} B{B.shape} C{C.shape}")
    a = numerical_rank(A, tol)
    if a < r:
        raise RankDeficient(f"rank(A) = {a} < {r}")
    if a > r:
        raise RankExcess(f"rank(A) = {a} > {r}")
    return C @ pseudoinverse(A, tol) @ B


# -- region bookkeeping ------------------------------------------------------

def _layout(reg1, reg2):
    (R1, C1), (R2, C2) = reg1, reg2
    s1, s2, t1, t2 = set(R1), set(R2), set(C1), set(C2)
    return ([i for i in R1 if i not in s2], [i for i in R1 if i in s2], [i for i in R2 if i not in s1],
            [j for j in C1 if j not in t2], [j for j in C1 if j in t2], [j for j in C2 if j not in t1])


def _union(reg1, reg2):
    return (sorted(set(reg1[0]) | set(reg2[0])), sorted(set(reg1[1]) | set(reg2[1])))


def _merge(W, reg1, reg2, r, tol, strict):
    r1, r2, r3, c1, c2, c3 = _layout(reg1, reg2)
    Q = W[np.ix_(r2, c2)]
    fill = complete_two_block if strict else (lambda A, B, C, r, tol: C @ pseudoinverse(A, tol) @ B)
    if r1 and c3:
        W[np.ix_(r1, c3)] = fill(Q, W[np.ix_(r2, c3)], W[np.ix_(r1, c2)], r, tol)
    if r3 and c1:
        W[np.ix_(r3, c1)] = fill(Q, W[np.ix_(r2, c1)], W[np.ix_(r3, c2)], r, tol)
    return _union(reg1, reg2)


def _region(b: Biclique):
    return (list(b.rows), list(b.cols))


def _merge_run(W, blocks, r, tol, strict):
    reg = _region(blocks[0])
    for b in blocks[1:]:
        reg = _merge(W, reg, _region(b), r, tol, strict)
    return reg


def merge_chain(inst: SampledInstance, bicliques, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Complete ``inst`` by merging ``bicliques`` in the given order.

    Every merge requires its shared block to have rank exactly ``inst.r``.
    """
    W = inst.partial()
    _merge_run(W, list(bicliques), inst.r, tol, strict=True)
    if np.isnan(W).any():
        raise ValueError("bicliques do not cover every row and column")
    return W


# -- witnesses -----------------------------------------------------------------

def _unit(T):
    nrm = np.linalg.norm(T)
    return T / nrm if nrm > 0 else T


def _two_block_family(A, B, C, r, tol, rng, scale):
    """Candidate missing blocks D for ``[[A, B], [C, D]]`` of total rank ``r``.

    With ``B_perp = (I - A A^+) B`` and ``C_perp = C (I - A^+ A)`` the
    assembled rank is ``rank A + rank B_perp + rank C_perp + rank(P_l S P_r)``
    where ``S = D - C A^+ B`` and ``P_l``, ``P_r`` project away from
    ``C_perp`` and ``B_perp``.  Offsets along ``C_perp W`` or ``W B_perp``
    keep the rank fixed.
    """
    Ap = pseudoinverse(A, tol)
    a = numerical_rank(A, tol)
    D0 = C @ Ap @ B
    Bp = B - A @ (Ap @ B)
    Cp = C - (C @ Ap) @ A
    beta = numerical_rank(Bp, tol) if np.linalg.norm(Bp) > tol.range_rel_tol * max(1.0, np.linalg.norm(B)) else 0
    gamma = numerical_rank(Cp, tol) if np.linalg.norm(Cp) > tol.range_rel_tol * max(1.0, np.linalg.norm(C)) else 0
    k = r - (a + beta + gamma)
    if k < 0:
        return []
    p, q = D0.shape
    out = []
    if k > 0:
        Pl = np.eye(p) - (Cp @ pseudoinverse(Cp, tol) if gamma else 0)
        Pr = np.eye(q) - (pseudoinverse(Bp, tol) @ Bp if beta else 0)
        if numerical_rank(Pl, tol) < k or numerical_rank(Pr, tol) < k:
            return []
        for _ in range(2):
            G = rng.standard_normal((p, k)) @ rng.standard_normal((k, q))
            out.append((D0 + scale * _unit(Pl @ G @ Pr), "two_block"))
    else:
        out.append((D0, "two_block"))
        if gamma:
            T = Cp @ rng.standard_normal((Cp.shape[1], q))
            out.append((D0 + scale * _unit(T), "column_addition"))
        if beta:
            T = rng.standard_normal((p, Bp.shape[0])) @ Bp
            out.append((D0 + scale * _unit(T), "column_addition"))
    return out


def _scale(inst: SampledInstance, chain: StaircaseChain, tol):
    big = max(chain.bicliques, key=lambda b: len(b.rows) * len(b.cols))
    s = np.linalg.svd(big.values(inst), compute_uv=False)
    k = min(inst.r, numerical_rank(big.values(inst), tol))
    sigma = s[k - 1] if k else 0.0
    total = np.linalg.norm(list(inst.samples.values()))
    return 0.5 * max(sigma, 1e-2 * total, 1e-12)


def verify_completion(inst: SampledInstance, M, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Finite, matches every sample within ``match_abs_tol`` and has rank exactly r."""
    return bool(np.all(np.isfinite(M)) and inst.matches(M, tol.match_abs_tol)
                and numerical_rank(M, tol) == inst.r)


def separated(M1, M2) -> bool:
    return np.linalg.norm(M1 - M2) >= SEPARATION * max(1.0, np.linalg.norm(M1))


class _Pool:
    """Verified completions collected until two separated ones exist."""

    def __init__(self, inst, tol):
        self.inst, self.tol = inst, tol
        self.items: list[tuple[np.ndarray, str]] = []

    def offer(self, M, tag) -> Witness | None:
        if not verify_completion(self.inst, M, self.tol):
            return None
        for N, _ in self.items:
            if separated(N, M):
                return Witness(N, M.copy(), tag)
        self.items.append((M.copy(), tag))
        return None

    @property
    def base(self):
        return self.items[0][0] if self.items else None


def _fill_single(W, lay, r, tol, rng, scale):
    """Family of completions when only ``X2 = r3 x c1`` is unknown."""
    r1, r2, r3, c1, c2, c3 = lay
    top, right = r1 + r2, c2 + c3
    fam = _two_block_family(W[np.ix_(top, right)], W[np.ix_(top, c1)], W[np.ix_(r3, right)], r, tol, rng, scale)
    for D, tag in fam:
        F = W.copy()
        F[np.ix_(r3, c1)] = D
        yield F, tag


def perturbation_plan(M, rows: dict, cols: dict, tol: Tolerances = DEFAULT_TOL) -> PerturbationPlan:
    """Schur blocks for the three-band layout ``[[A, B], [E, F], [C, D]]``.

    ``rows`` maps ``a``, ``e``, ``c`` and ``cols`` maps ``p``, ``q`` to index
    lists; ``A = M[a, p]`` is the rank-deficient block.
    """
    a, e, c, p, q = rows["a"], rows["e"], rows["c"], cols["p"], cols["q"]
    A = M[np.ix_(a, p)]
    rb = numerical_rank(A, tol)
    _, _, piv = qr(A, pivoting=True, mode="economic")
    p1 = [p[k] for k in sorted(piv[:rb])]
    p2 = [p[k] for k in sorted(piv[rb:])]
    blk = lambda R, C: M[np.ix_(R, C)]
    A1 = blk(a, p1)
    A1p = pseudoinverse(A1, tol)
    E1 = blk(e, p1)
    C1 = blk(c, p1)
    M1 = blk(e, p2) - E1 @ A1p @ blk(a, p2)
    M2 = blk(e, q) - E1 @ A1p @ blk(a, q)
    M3 = blk(c, p2) - C1 @ A1p @ blk(a, p2)
    M4 = blk(c, q) - C1 @ A1p @ blk(a, q)
    return PerturbationPlan(M1, M2, M3, M4, A1, rb, -1,
                            dict(rows), {"p": list(p), "q": list(q), "p1": p1, "p2": p2})


def apply_plan(M, plan: PerturbationPlan) -> np.ndarray:
    """Perturbed completion: ``E2 + M1`` and ``D - M4 / 2``."""
    e, c = plan.rows["e"], plan.rows["c"]
    out = np.array(M, dtype=float)
    out[np.ix_(e, plan.cols["p2"])] += plan.M1
    out[np.ix_(c, plan.cols["q"])] -= 0.5 * plan.M4
    return out


def _three_block(inst, base, lay, tol, pool, transpose):
    r1, r2, r3, c1, c2, c3 = lay
    rows = {"a": r2, "e": r1, "c": r3}
    cols = {"p": c2 + c3, "q": c1}
    if not r1 or not r3 or not c1:
        return None
    M = base.T if transpose else base
    mask = inst.mask.T if transpose else inst.mask
    plan = perturbation_plan(M, rows, cols, tol)
    plan = PerturbationPlan(plan.M1, plan.M2, plan.M3, plan.M4, plan.A1, plan.basis_rank,
                            inst.r - plan.basis_rank, plan.rows, plan.cols)
    if plan.deficiency < 1 or not plan.cols["p2"]:
        return None
    if mask[np.ix_(r1, plan.cols["p2"])].any() or mask[np.ix_(r3, c1)].any():
        return None
    if numerical_rank(plan.M1, tol) == 0:
        return None
    Mb = apply_plan(M, plan)
    w = pool.offer(Mb.T if transpose else Mb, "three_block")
    if w is not None:
        return Witness(w.first, w.second, "three_block", plan)
    return None


def witness_nonunique(inst: SampledInstance, chain: StaircaseChain, corner: int,
                      tol: Tolerances = DEFAULT_TOL, rng=None, reference=None) -> Witness | None:
    """Two verified, separated rank-r completions, or ``None``.

    The chain is split at ``corner`` (0-based).  Each side is merged into one
    completed region; the two regions leave one or two unknown blocks.  With
    ``reference`` (a known completion) the regions take their values from it
    and it becomes the first member of the pair when possible.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    r = inst.r
    bl = list(chain.bicliques)
    if not 0 <= corner < len(bl) - 1:
        raise ValueError(f"corner index {corner} out of range")
    scale = _scale(inst, chain, tol)
    pool = _Pool(inst, tol)
    if reference is not None:
        W = np.array(reference, dtype=float)
        left = (sorted(set().union(*(b.rows for b in bl[:corner + 1]))),
                sorted(set().union(*(b.cols for b in bl[:corner + 1]))))
        right = (sorted(set().union(*(b.rows for b in bl[corner + 1:]))),
                 sorted(set().union(*(b.cols for b in bl[corner + 1:]))))
        pool.offer(W, "reference")
    else:
        W = inst.partial()
        left = _merge_run(W, bl[:corner + 1], r, tol, strict=False)
        right = _merge_run(W, bl[corner + 1:], r, tol, strict=False)
    lay = _layout(left, right)
    r1, r2, r3, c1, c2, c3 = lay
    has1, has2 = bool(r1 and c3), bool(r3 and c1)
    if not has1 and not has2:
        return None
    if has1 != has2:
        transpose = has1
        Wt = W.T.copy() if transpose else W
        lt = (c1, c2, c3, r1, r2, r3) if transpose else lay
        back = (lambda X: X.T) if transpose else (lambda X: X)
        for F, tag in _fill_single(Wt, lt, r, tol, rng, scale):
            w = pool.offer(back(F), tag)
            if w is not None:
                return w
        base = pool.base
        if base is not None:
            return _three_block(inst, base, lt, tol, pool, transpose)
        return None
    return _cross(W, lay, r, tol, rng, scale, pool)


def _factor(M, r, tol):
    if numerical_rank(M, tol) != r:
        return None
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    return U[:, :r] * s[:r], Vt[:r].T


def _glue(W, lay, r, tol, rng, pool):
    """Align rank-r factorizations of the two regions through a gauge ``G``.

    With ``L = XL YL^T`` on ``(r1+r2) x (c1+c2)`` and ``R = XR YR^T`` on
    ``(r2+r3) x (c2+c3)``, any invertible G with ``XL[r2] G = XR[r2]`` and
    ``G YR[c2]^T = YL[c2]^T`` gives the completion ``X1 = XL[r1] G YR[c3]^T``,
    ``X2 = XR[r3] G^-1 YL[c1]^T``.  Both conditions are linear in G; a
    solution set of positive dimension yields distinct completions.
    """
    r1, r2, r3, c1, c2, c3 = lay
    fl = _factor(W[np.ix_(r1 + r2, c1 + c2)], r, tol)
    fr = _factor(W[np.ix_(r2 + r3, c2 + c3)], r, tol)
    if fl is None or fr is None:
        return None
    (XL, YL), (XR, YR) = fl, fr
    n1, n2 = len(r1), len(c1)
    A, B = XL[n1:], XR[:len(r2)]            # rows r2
    C, D = YR[:len(c2)].T, YL[n2:].T        # cols c2
    eye = np.eye(r)
    # YR has orthonormal columns; rescale the row-band equations to match
    sx = np.linalg.norm(XL, 2)
    # row-major vec: vec(A G) = (A kron I) g, vec(G C) = (I kron C^T) g
    K = np.vstack([np.kron(A / sx, eye), np.kron(eye, C.T)])
    rhs = np.concatenate([B.ravel() / sx, D.ravel()])
    g0 = np.linalg.lstsq(K, rhs, rcond=None)[0]
    if np.linalg.norm(K @ g0 - rhs) > tol.range_rel_tol * max(1.0, np.linalg.norm(rhs)):
        return None
    _, s, Vt = np.linalg.svd(K)
    thr = tol.rank_threshold(K.shape) * max(1.0, s[0] if s.size else 0.0)
    null = Vt[np.sum(s > thr):]
    if not len(null):
        return None
    G0 = g0.reshape(r, r)
    step = 0.5 * max(1.0, np.linalg.norm(G0))
    for t in (0.0, 1.0, -1.0, 2.0, -2.0):
        d = null.T @ rng.standard_normal(len(null)) if t else np.zeros(r * r)
        G = G0 + t * step * _unit(d).reshape(r, r)
        if np.linalg.cond(G) > 1e8:
            continue
        F = W.copy()
        if r1 and c3:
            F[np.ix_(r1, c3)] = XL[:n1] @ G @ YR[len(c2):].T
        if r3 and c1:
            F[np.ix_(r3, c1)] = XR[len(r2):] @ np.linalg.solve(G, YL[:n2].T)
        w = pool.offer(F, "cross")
        if w is not None:
            return w
    return None


def _cross(W, lay, r, tol, rng, scale, pool):
    """Both ``X1`` and ``X2`` unknown: fill one block, then the other."""
    w = _glue(W, lay, r, tol, rng, pool)
    if w is not None:
        return w
    for transpose in (False, True):
        r1, r2, r3, c1, c2, c3 = lay
        Wt = W
        if transpose:
            Wt = W.T.copy()
            r1, r2, r3, c1, c2, c3 = c1, c2, c3, r1, r2, r3
        back = (lambda X: X.T) if transpose else (lambda X: X)
        views = [(r2, c2), (r2, c1 + c2), (r2 + r3, c2)]
        for ra, ca in views:
            fam = _two_block_family(Wt[np.ix_(ra, ca)], Wt[np.ix_(ra, c3)], Wt[np.ix_(r1, ca)],
                                    r, tol, rng, scale)
            for X1, _ in fam:
                F = Wt.copy()
                F[np.ix_(r1, c3)] = X1
                for G, _ in _fill_single(F, (r1, r2, r3, c1, c2, c3), r, tol, rng, scale):
                    w = pool.offer(back(G), "cross")
                    if w is not None:
                        return Witness(w.first, w.second, "cross")
    return None


# -- decision ----------------------------------------------------------------

def decide_and_complete(inst: SampledInstance, chain: StaircaseChain,
                        tol: Tolerances = DEFAULT_TOL, rng=None) -> CompletionVerdict:
    r = inst.r
    for k, b in enumerate(chain.bicliques):
        rk = numerical_rank(b.values(inst), tol)
        if rk > r:
            return Infeasible(reason=f"biclique {k + 1} has rank {rk} > {r}")
    ranks = tuple(numerical_rank(c.values, tol) for c in corner_blocks(chain, inst))
    if all(x == r for x in ranks):
        try:
            W = merge_chain(inst, chain.bicliques, tol)
        except RankExcess as exc:
            return Infeasible(ranks, f"merge failed: {exc}")
        rk = numerical_rank(W, tol)
        if rk > r:
            return Infeasible(ranks, f"recovered matrix has rank {rk} > {r}; samples are inconsistent with rank {r}")
        return Unique(ranks, W)
    rng = np.random.default_rng(0) if rng is None else rng
    deficient = [k for k, x in enumerate(ranks) if x < r]
    for k in deficient:
        w = witness_nonunique(inst, chain, k, tol, rng)
        if w is not None:
            return NonUnique(ranks, w.first, w.second, k, w.construction, w.plan)
    listed = ", ".join(str(k + 1) for k in deficient)
    return Undecided(ranks, f"corner(s) {listed} have rank < {r} but no verified witness pair was found")
