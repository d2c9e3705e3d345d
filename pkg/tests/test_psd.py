from fractions import Fraction

import numpy as np
import pytest

from lrmc_staircase.linalg import InputError, is_psd, numerical_rank
from lrmc_staircase.psd import (NoPsdCompletion, PsdInstance, RankExcess, psd_complete,
                                psd_counterexample)


def random_psd(rng, n, r, deficient_top=None):
    X = rng.standard_normal((n, r))
    if deficient_top is not None:
        k, a = deficient_top
        X[:k] = rng.standard_normal((k, a)) @ rng.standard_normal((a, r))
    return X @ X.T


def test_demo_root():
    rep = psd_counterexample()
    assert rep.coefficients == (Fraction(-1, 4), Fraction(-1), Fraction(-1))
    assert rep.discriminant == 0
    assert len(rep.roots) == 1 and abs(rep.roots[0] + 2) <= 1e-12
    assert rep.corner_rank == 1 and rep.assembled_ranks == [2]
    assert rep.assembled_psd == [True] and rep.unique


def test_quadratic_is_negative_square():
    # -(x/2 + 1)^2 expanded
    c2, c1, c0 = psd_counterexample().coefficients
    for x in range(-5, 6):
        assert c2 * x * x + c1 * x + c0 == -(Fraction(x, 2) + 1) ** 2


def test_demo_rank3():
    rep = psd_counterexample(rank=3)
    assert not rep.unique and "not unique at rank 3" in rep.message


def test_demo_perturbed_entry():
    rep = psd_counterexample(entries={(1, 1): 17})
    # grid-scan oracle: sign changes of det over x bracket the roots
    H = np.array([[5, 4, -2], [4, 17, -8], [-2, -8, 4]], dtype=float)
    xs = np.linspace(-20, 20, 40001)
    dets = []
    for x in xs:
        H[0, 2] = H[2, 0] = x
        dets.append(np.linalg.det(H))
    crossings = np.count_nonzero(np.diff(np.sign(dets)))
    assert rep.discriminant > 0 and len(rep.roots) == 2 == crossings
    assert rep.assembled_ranks == [2, 2] and not rep.unique


def test_demo_rejects_unknown_entry():
    with pytest.raises(InputError):
        psd_counterexample(entries={(0, 2): 1.0})


def test_report_serializes():
    rep = psd_counterexample()
    d = rep.as_dict()
    assert d["roots"] == [-2.0] and d["corner_rank"] == 1
    assert "x = -2" in rep.to_text()


@pytest.mark.parametrize("seed", range(20))
def test_round_trip_full_rank_corner(seed):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(1, 4))
    n, k = r + int(rng.integers(2, 6)), r + int(rng.integers(0, 3))
    M = random_psd(rng, n, r)
    res = psd_complete(PsdInstance(M[:k, :k], M[:k, k:], r))
    assert res.unique
    assert np.linalg.norm(res.completions[0] - M[k:, k:]) <= 1e-8 * max(1, np.linalg.norm(M))


@pytest.mark.parametrize("seed", range(20))
def test_deficient_corner_gives_two(seed):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(2, 4))
    k, n = r + 1, r + 1 + r
    M = random_psd(rng, n, r, deficient_top=(k, r - 1))
    inst = PsdInstance(M[:k, :k], M[:k, k:], r)
    res = psd_complete(inst, rng=np.random.default_rng(seed))
    assert not res.unique and len(res.completions) == 2
    C1, C2 = res.completions
    assert np.linalg.norm(C1 - C2) > 1e-3
    for C in res.completions:
        full = inst.assemble(C)
        assert is_psd(full) and numerical_rank(full) == r
        w = np.linalg.eigvalsh(full)
        assert w[0] >= -1e-9 * w[-1]


def test_psd_errors():
    with pytest.raises(NoPsdCompletion):
        psd_complete(PsdInstance([[1.0, 0], [0, -1]], [[1.0], [0]], 2))
    with pytest.raises(NoPsdCompletion):
        psd_complete(PsdInstance([[1.0, 0], [0, 0]], [[0.0], [1]], 2))
    with pytest.raises(RankExcess):
        psd_complete(PsdInstance(np.eye(3), np.ones((3, 1)), 2))
    with pytest.raises(InputError):
        PsdInstance([[1.0, 2], [0, 1]], [[1.0], [1]], 1)
