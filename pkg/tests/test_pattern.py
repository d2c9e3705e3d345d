import itertools

import numpy as np
import pytest

from lrmc_staircase.generate import generate
from lrmc_staircase.linalg import numerical_rank
from lrmc_staircase.pattern import (Biclique, ChainInvalid, NotStaircase, SampledInstance,
                                    corner_blocks, detect_chain, validate_chain)

Z_3X4 = np.array([[0, 6, 5, 3], [1, 2, 3, 2], [3, 4, 2, 0]], dtype=float)
MASK_3X4 = np.array([[0, 1, 1, 1], [1, 1, 1, 1], [1, 1, 1, 0]], dtype=bool)
CHAIN_3X4 = [Biclique((0, 1), (1, 2, 3)), Biclique((1, 2), (0, 1, 2))]


def example_3x4():
    return SampledInstance.from_matrix(Z_3X4, MASK_3X4, 2)


def test_example_chain_and_corner():
    inst = example_3x4()
    chain = validate_chain(inst, CHAIN_3X4)
    assert len(chain) == 2
    (c,) = corner_blocks(chain, inst)
    assert c.rows == (1,) and c.cols == (1, 2)
    assert np.array_equal(c.values, [[2.0, 3.0]])


def test_full_single_biclique():
    inst = SampledInstance.from_matrix(np.ones((3, 4)), np.ones((3, 4), bool), 1)
    chain = validate_chain(inst, [Biclique((0, 1, 2), (0, 1, 2, 3))])
    assert corner_blocks(chain, inst) == []
    assert len(detect_chain(inst)) == 1


def test_disjoint_bicliques_rejected():
    mask = np.zeros((4, 4), bool)
    mask[:2, :2] = mask[2:, 2:] = True
    inst = SampledInstance.from_matrix(np.ones((4, 4)), mask, 1)
    with pytest.raises(ChainInvalid):
        validate_chain(inst, [Biclique((0, 1), (0, 1)), Biclique((2, 3), (2, 3))])


def test_incomplete_biclique_rejected():
    with pytest.raises(ChainInvalid, match="not fully sampled"):
        validate_chain(example_3x4(), [Biclique((0, 1, 2), (1, 2, 3))])


def test_non_consecutive_overlap_rejected():
    inst = SampledInstance.from_matrix(np.ones((3, 3)), np.ones((3, 3), bool), 1)
    with pytest.raises(ChainInvalid):
        validate_chain(inst, [Biclique((0, 1, 2), (0, 1)), Biclique((0,), (0, 1, 2)),
                              Biclique((1, 2), (1, 2))])


def test_lenient_mode_accepts_what_strict_rejects():
    # three tall blocks stepping down: parity fails, overlaps are fine
    mask = np.zeros((4, 5), bool)
    blocks = [Biclique((0, 1), (0, 1)), Biclique((1, 2), (1, 2, 3)), Biclique((2, 3), (3, 4))]
    for b in blocks:
        mask[np.ix_(b.rows, b.cols)] = True
    inst = SampledInstance.from_matrix(np.ones((4, 5)), mask, 1)
    with pytest.raises(ChainInvalid):
        validate_chain(inst, blocks)
    assert validate_chain(inst, blocks, "lenient").bicliques == tuple(blocks)


def test_detect_example():
    chain = detect_chain(example_3x4())
    assert not isinstance(chain, NotStaircase)
    assert set(chain.bicliques) == set(CHAIN_3X4)


def test_three_chain_corners():
    g = generate(4, 6, 2, 3, seed=1)
    chain = validate_chain(g.instance, g.chain)
    cs = corner_blocks(chain, g.instance)
    assert len(cs) == 2
    assert all(numerical_rank(c.values) <= 2 for c in cs)


@pytest.mark.parametrize("seed", range(20))
def test_certification_round_trip(seed):
    rng = np.random.default_rng(seed)
    r, l = int(rng.integers(1, 4)), int(rng.integers(1, 6))
    g = generate(int(rng.integers(3 * r * 3, 40)), int(rng.integers(3 * r * 3, 40)), r, l, seed,
                 orientation=("wide", "tall")[seed % 2], shuffle=seed % 3 == 0)
    chain = validate_chain(g.instance, g.chain)
    assert chain.bicliques == g.chain
    for c, (b1, b2) in zip(corner_blocks(chain, g.instance), zip(g.chain, g.chain[1:])):
        assert set(itertools.product(c.rows, c.cols)) == b1.edges & b2.edges
    found = detect_chain(g.instance)
    assert not isinstance(found, NotStaircase)
    assert validate_chain(g.instance, found.bicliques).bicliques == found.bicliques


def closed_rectangles(mask):
    """All maximal all-ones rectangles, by brute force over row subsets."""
    m, n = mask.shape
    out = set()
    for k in range(1, m + 1):
        for S in itertools.combinations(range(m), k):
            T = tuple(j for j in range(n) if mask[list(S), j].all())
            if T and tuple(i for i in range(m) if mask[i, list(T)].all()) == S:
                out.add((S, T))
    return [Biclique(S, T) for S, T in out]


def oracle_has_chain(inst, mask, max_len=3):
    rects = closed_rectangles(mask)
    for l in range(1, max_len + 1):
        for seq in itertools.permutations(rects, l):
            try:
                validate_chain(inst, seq)
                return True
            except ChainInvalid:
                pass
    return False


@pytest.mark.parametrize("seed", range(15))
def test_random_mask_detection_matches_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    mask = rng.random((6, 6)) < 0.5
    if not mask.any():
        mask[0, 0] = True
    inst = SampledInstance.from_matrix(rng.standard_normal((6, 6)), mask, 1)
    got = detect_chain(inst)
    assert (not isinstance(got, NotStaircase)) == oracle_has_chain(inst, mask)


def test_not_staircase_is_falsy():
    assert not NotStaircase("x")


def test_wrap_around_chain_rejected():
    # the cyclic band passes the local conditions as a 5-chain, but row 3
    # sits in bicliques 1 and 5 only
    mask = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], bool)
    inst = SampledInstance.from_matrix(np.ones((3, 3)), mask, 1)
    chain = [Biclique((0, 2), (0,)), Biclique((0,), (0, 1)), Biclique((0, 1), (1,)),
             Biclique((1,), (1, 2)), Biclique((1, 2), (2,))]
    with pytest.raises(ChainInvalid, match="running intersection"):
        validate_chain(inst, chain)
    assert validate_chain(inst, chain, "lenient")
    assert isinstance(detect_chain(inst), NotStaircase)
