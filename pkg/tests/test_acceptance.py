"""Acceptance criteria, one test each.  Every test prints a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` (or ``python
tests/test_acceptance.py``) to see the summary lines.
"""
import io
import json
import sys
import time
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lrmc_staircase.cli import main as cli_main
from lrmc_staircase.completion import (NonUnique, Undecided, Unique, decide_and_complete,
                                       separated, witness_nonunique)
from lrmc_staircase.generate import generate, generate_cross
from lrmc_staircase.graph import (CliqueTree, Graph, chain_graph, chain_to_clique_tree, mcs_order,
                                  verify_induced_subtree)
from lrmc_staircase.linalg import BlockPartition, numerical_rank, schur_complement
from lrmc_staircase.pattern import NotStaircase, detect_chain, validate_chain
from lrmc_staircase.psd import PsdInstance, psd_complete

from test_completion import rank2_completions_3x4, shared_band_instance
from test_graph import brute_chordal, prufer_trees
from test_pattern import CHAIN_3X4, example_3x4
from test_psd import random_psd


def report(number, title, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}", file=sys.__stdout__)
    assert ok, detail


def test_criterion_1_example_3x4():
    t0 = time.perf_counter()
    sols = rank2_completions_3x4()
    inst = example_3x4()
    v = decide_and_complete(inst, validate_chain(inst, CHAIN_3X4))
    dt = time.perf_counter() - t0
    only = len(sols) == 1 and np.allclose(sols[0], [4, 1], atol=1e-6)
    ok = only and isinstance(v, Undecided) and dt < 1.0
    report(1, "3x4 example", ok,
           f"oracle completions {[tuple(float(x) for x in np.round(s, 9)) for s in sols]}, verdict {v.tag}, {dt:.3f}s")


def test_criterion_2_psd_demo():
    t0 = time.perf_counter()
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli_main(["psd-demo", "--json"])
    dt = time.perf_counter() - t0
    d = json.loads(buf.getvalue())
    H = np.array(d["matrix"], dtype=object)
    x = d["roots"][0]
    H[0, 2] = H[2, 0] = x
    rank_h = numerical_rank(H.astype(float))
    ok = (code == 0 and len(d["roots"]) == 1 and abs(x + 2) <= 1e-12
          and d["corner_rank"] == 1 and rank_h == 2 and dt < 1.0)
    report(2, "PSD demo", ok, f"x = {x!r}, corner rank {d['corner_rank']}, rank(H) {rank_h}, {dt:.3f}s")


def test_criterion_3_sufficiency_sweep():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst, bad = 0.0, 0
    for k in range(200):
        r, l = int(rng.integers(1, 4)), int(rng.integers(1, 6))
        bands = (l + 1) // 2 + 1
        m, n = (int(rng.integers(bands * r, 41)) for _ in range(2))
        shuffle = k % 2 == 1
        g = generate(m, n, r, l, seed=k, orientation=("wide", "tall")[k % 4 // 2], shuffle=shuffle)
        chain = detect_chain(g.instance) if shuffle else validate_chain(g.instance, g.chain)
        if isinstance(chain, NotStaircase):
            bad += 1
            continue
        v = decide_and_complete(g.instance, chain)
        if not isinstance(v, Unique):
            bad += 1
            continue
        err = np.linalg.norm(v.completion - g.truth) / np.linalg.norm(g.truth)
        worst = max(worst, err)
        bad += err > 1e-6
    dt = time.perf_counter() - t0
    report(3, "sufficiency sweep", bad == 0 and dt < 30,
           f"{200 - bad}/200 unique within 1e-6, worst error {worst:.2e}, {dt:.2f}s")


def _necessity_instances():
    out = []
    for k in range(34):
        out.append(("two-block", generate(int(10 + k % 20), int(12 + k % 17), 1 + k % 3, 2,
                                          seed=k, deficient_corner=0,
                                          orientation=("wide", "tall")[k % 2])))
    for k in range(33):
        l = 3 + k % 2
        out.append(("three-block", generate(24 + k % 10, 20 + k % 13, 1 + k % 3, l, seed=100 + k,
                                            deficient_corner=(0, l - 2)[k % 2],
                                            orientation=("wide", "tall")[k % 2], shuffle=k % 3 == 0)))
    for k in range(33):
        out.append(("cross", generate_cross(9 + k % 20, 9 + k % 15, 1 + k % 3, seed=200 + k)))
    return out


def test_criterion_4_necessity_sweep():
    cases = _necessity_instances()
    t0 = time.perf_counter()
    counts = {"nonunique": 0, "undecided": 0, "unique": 0, "other": 0}
    unverified = 0
    for _, g in cases:
        inst = g.instance
        v = decide_and_complete(inst, validate_chain(inst, g.chain))
        counts[v.tag if v.tag in counts else "other"] += 1
        if isinstance(v, NonUnique):
            good = all(inst.matches(M, 1e-8) and numerical_rank(M) == inst.r
                       for M in (v.first, v.second))
            gap = np.linalg.norm(v.first - v.second) >= 1e-3 * max(1.0, np.linalg.norm(v.first))
            unverified += not (good and gap)
    dt = time.perf_counter() - t0
    ok = (counts["nonunique"] - unverified >= 95 and counts["unique"] == 0
          and counts["other"] == 0 and unverified == 0 and dt < 30)
    report(4, "necessity sweep", ok, f"{counts}, unverified pairs {unverified}, {dt:.2f}s")


def test_criterion_5_schur_identity():
    rng = np.random.default_rng(5)
    trials = held = 0
    while trials < 1000:
        p, q = (int(v) for v in rng.integers(1, 8, 2))
        s, t = (int(v) for v in rng.integers(1, 8, 2))
        a = int(rng.integers(0, min(p, q) + 1))
        k = int(rng.integers(0, min(s, t) + 1))

        def factor(rows, cols, rank, cond):
            U, _ = np.linalg.qr(rng.standard_normal((rows, max(rank, 1))))
            V, _ = np.linalg.qr(rng.standard_normal((cols, max(rank, 1))))
            sv = np.geomspace(1.0, 1.0 / cond, rank)
            return (U[:, :rank] * sv) @ V[:, :rank].T

        A = factor(p, q, a, 10 ** rng.uniform(0, 3))
        S = factor(s, t, k, 10 ** rng.uniform(0, 3))
        R, L = rng.standard_normal((q, t)), rng.standard_normal((s, p))
        M = np.block([[A, A @ R], [L @ A, L @ A @ R + S]])
        sv = np.linalg.svd(M, compute_uv=False)
        if a + k and sv[0] / sv[a + k - 1] > 1e6:
            continue
        trials += 1
        Sm = schur_complement(M, BlockPartition(p, q))
        held += numerical_rank(M) == numerical_rank(A) + numerical_rank(Sm)
    report(5, "Schur rank identity", held >= 990, f"{held}/1000 trials")


def test_criterion_6_chordality():
    failures = []
    for k in range(100):
        l = 1 + k % 5
        g = generate(20, 20, 1 + k % 3, l, seed=k, orientation=("wide", "tall")[k % 2], shuffle=k % 3 == 0)
        chain = validate_chain(g.instance, g.chain)
        if not (mcs_order(chain_graph(chain, g.instance.m))[1]
                and verify_induced_subtree(chain_to_clique_tree(chain, g.instance.m))):
            failures.append(k)
    rng = np.random.default_rng(6)
    disagree = 0
    for _ in range(500):
        n = int(rng.integers(1, 9))
        pr = rng.uniform(0.2, 0.8)
        edges = frozenset(frozenset((u, v)) for u in range(n) for v in range(u + 1, n) if rng.random() < pr)
        g = Graph(n, edges)
        disagree += mcs_order(g)[1] != brute_chordal(g)
    non_unique_trees = []
    for l in range(1, 6):
        g = generate(20, 20, 2, l, seed=l)
        path = chain_to_clique_tree(validate_chain(g.instance, g.chain), g.instance.m)
        passing = [e for e in prufer_trees(l) if verify_induced_subtree(CliqueTree(path.nodes, e))]
        if len(passing) != 1 or {frozenset(x) for x in passing[0]} != {frozenset(x) for x in path.edges}:
            non_unique_trees.append(l)
    ok = not failures and disagree == 0 and not non_unique_trees
    report(6, "chordality and clique tree", ok,
           f"staircase failures {failures}, oracle disagreements {disagree}/500, "
           f"non-unique trees at l={non_unique_trees}")


def test_criterion_7_psd_completion():
    rng = np.random.default_rng(7)
    full_bad = def_bad = 0
    for k in range(100):
        r = int(rng.integers(1, 4))
        if k % 2 == 0:
            n, a = r + int(rng.integers(2, 6)), r + int(rng.integers(0, 3))
            M = random_psd(rng, n, r)
            res = psd_complete(PsdInstance(M[:a, :a], M[:a, a:], r))
            err = np.linalg.norm(res.completions[0] - M[a:, a:]) / max(1.0, np.linalg.norm(M))
            full_bad += not (res.unique and err <= 1e-8)
        else:
            r = max(r, 2)
            a = r + 1
            M = random_psd(rng, a + r, r, deficient_top=(a, r - 1))
            inst = PsdInstance(M[:a, :a], M[:a, a:], r)
            res = psd_complete(inst, rng=rng)
            good = not res.unique and len(res.completions) == 2
            for C in res.completions:
                F = inst.assemble(C)
                w = np.linalg.eigvalsh(F)
                good &= w[0] >= -1e-9 * w[-1] and numerical_rank(F) == r
            good &= separated(*res.completions)
            def_bad += not good
    report(7, "PSD completion", full_bad == 0 and def_bad == 0,
           f"rank(A)=r failures {full_bad}/50, rank(A)<r failures {def_bad}/50")


def test_criterion_8_eq3_identity():
    residuals = []
    for seed in range(20):
        inst, chain, Z = shared_band_instance(seed)
        for corner in range(len(chain) - 1):
            w = witness_nonunique(inst, chain, corner, reference=Z)
            if w is not None and w.plan is not None:
                residuals.append(w.plan.eq3_residual())
    worst = max(residuals) if residuals else float("nan")
    ok = len(residuals) >= 20 and worst <= 1e-6
    report(8, "Schur block identity in three-block plans", ok,
           f"{len(residuals)} plans, worst relative residual {worst:.2e}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
