"""Command-line entry point: ``lrmc-staircase {complete,analyze,psd-demo,generate}``."""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import completion as cmp
from .fileio import ResultFile, format_instance, format_matrix, read_instance
from .generate import generate
from .graph import chain_graph, chain_to_clique_tree, lift_pattern, mcs_order, verify_induced_subtree
from .linalg import InputError, Tolerances, numerical_rank
from .pattern import ChainInvalid, NotStaircase, corner_blocks, detect_chain, validate_chain
from .psd import psd_counterexample

EXIT = {"unique": 0, "nonunique": 2, "undecided": 3, "infeasible": 4}
EXIT_ERROR = 1


def _tolerances(args) -> Tolerances:
    return Tolerances(args.rank_tol, args.range_tol, args.match_tol)


def _add_tol_flags(p):
    p.add_argument("--rank-tol", type=float, default=None,
                   help="relative singular value cutoff (default 1e-9*max(m,n))")
    p.add_argument("--range-tol", type=float, default=1e-8, help="relative range residual cutoff")
    p.add_argument("--match-tol", type=float, default=1e-8, help="absolute sample match tolerance")
    p.add_argument("--lenient", action="store_true",
                   help="only require nonempty consecutive overlaps in chain validation")


def _load_chain(path, mode):
    f = read_instance(path)
    inst = f.instance
    if f.chain:
        return inst, validate_chain(inst, f.chain, mode)
    return inst, detect_chain(inst, mode)


def _corner_rows(chain, inst, tol):
    return [{"index": c.index, "rows": list(c.rows), "cols": list(c.cols),
             "rank": numerical_rank(c.values, tol)} for c in corner_blocks(chain, inst)]


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_complete(args) -> int:
    tol = _tolerances(args)
    start = time.perf_counter()
    inst, chain = _load_chain(args.path, "lenient" if args.lenient else "strict")
    res = ResultFile("", (inst.m, inst.n), inst.r)
    if isinstance(chain, NotStaircase):
        res.verdict = "undecided"
        res.fields["reason"] = "not a detected staircase: " + chain.reason
    else:
        verdict = cmp.decide_and_complete(inst, chain, tol, np.random.default_rng(args.seed))
        res.verdict = verdict.tag
        res.corners = _corner_rows(chain, inst, tol)
        res.tree_edges = list(chain_to_clique_tree(chain, inst.m).edges)
        res.fields["chain_length"] = len(chain)
        if isinstance(verdict, cmp.Unique):
            res.matrices["completion"] = verdict.completion
        elif isinstance(verdict, cmp.NonUnique):
            res.fields["deficient_corner"] = verdict.deficient_corner + 1
            res.fields["construction"] = verdict.construction
            res.matrices["witness_first"] = verdict.first
            res.matrices["witness_second"] = verdict.second
        else:
            res.fields["reason"] = verdict.reason
    res.timing = time.perf_counter() - start
    _emit(res.to_text(), args.out)
    if args.out:
        print(f"verdict: {res.verdict}", file=sys.stderr)
    return EXIT[res.verdict]


def cmd_analyze(args) -> int:
    tol = _tolerances(args)
    inst, chain = _load_chain(args.path, "lenient" if args.lenient else "strict")
    lift = lift_pattern(inst)
    _, lift_chordal = mcs_order(lift)
    lines = [f"dims {inst.m} {inst.n}", f"rank {inst.r}", f"samples {len(inst.samples)}",
             f"lift nodes {lift.node_count} nontrivial_edges {len(lift.nontrivial_edges)}",
             f"lift chordal {str(lift_chordal).lower()}"]
    if isinstance(chain, NotStaircase):
        lines.append(f"chain NotStaircase: {chain.reason}")
        sys.stdout.write("\n".join(lines) + "\n")
        return 0
    lines.append(f"chain length {len(chain)} mode {chain.mode} orientation {chain.orientation or '-'}")
    for k, b in enumerate(chain.bicliques):
        lines.append(f"biclique {k + 1} rows {','.join(str(i + 1) for i in b.rows)}"
                     f" cols {','.join(str(j + 1) for j in b.cols)}")
    if len(chain) == 1:
        lines.append("no corners")
    for c in _corner_rows(chain, inst, tol):
        lines.append(f"corner {c['index'] + 1} rank {c['rank']}"
                     f" rows {','.join(str(i + 1) for i in c['rows'])}"
                     f" cols {','.join(str(j + 1) for j in c['cols'])}")
    _, chordal = mcs_order(chain_graph(chain, inst.m))
    tree = chain_to_clique_tree(chain, inst.m)
    lines.append(f"chordal {str(chordal).lower()}")
    lines.append(f"induced_subtree {str(verify_induced_subtree(tree)).lower()}")
    lines.append("clique_tree path " + " -- ".join(str(k + 1) for k in range(len(tree.nodes))))
    sys.stdout.write("\n".join(lines) + "\n")
    if args.dot:
        Path(args.dot).write_text(tree.to_dot(m=inst.m), encoding="utf-8")
    return 0


def _parse_entry(text):
    try:
        pos, val = text.split("=")
        i, j = (int(t) for t in pos.split(","))
        return (i - 1, j - 1), float(val)
    except ValueError:
        raise InputError(f"bad --entry {text!r}; expected i,j=value") from None


def cmd_psd_demo(args) -> int:
    entries = dict(_parse_entry(e) for e in args.entry)
    for (i, j) in entries:
        if not (0 <= i < 3 and 0 <= j < 3):
            raise InputError(f"entry ({i + 1},{j + 1}) outside the 3x3 example")
    rep = psd_counterexample(_tolerances(args), rank=args.rank, entries=entries)
    if args.json:
        sys.stdout.write(json.dumps(rep.as_dict(), indent=2) + "\n")
    else:
        sys.stdout.write(rep.to_text())
    return 0 if all(rk == 2 for rk in rep.assembled_ranks) else EXIT_ERROR


def cmd_generate(args) -> int:
    dc = None if args.deficient_corner is None else args.deficient_corner - 1
    g = generate(args.m, args.n, args.r, args.l, args.seed, dc, args.orientation, args.shuffle)
    note = [f"generated m={args.m} n={args.n} r={args.r} l={args.l} seed={args.seed}"
            + (f" deficient_corner={args.deficient_corner}" if dc is not None else "")]
    _emit(format_instance(g.instance, g.chain, note), args.out)
    if args.truth_out:
        Path(args.truth_out).write_text("\n".join(format_matrix(g.truth)) + "\n", encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lrmc-staircase",
                                 description="Uniqueness of low-rank completion on staircase patterns")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("complete", help="decide uniqueness and complete")
    p.add_argument("path")
    p.add_argument("-o", "--out", help="result file (default stdout)")
    p.add_argument("--seed", type=int, default=0, help="seed for witness construction")
    _add_tol_flags(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("analyze", help="chain, corner ranks, chordality, clique tree")
    p.add_argument("path")
    p.add_argument("--dot", help="write the clique tree in DOT format")
    _add_tol_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("psd-demo", help="3x3 PSD example with a missing corner pair")
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--entry", action="append", default=[], help="override a known entry: i,j=value")
    p.add_argument("--json", action="store_true")
    _add_tol_flags(p)
    p.set_defaults(func=cmd_psd_demo)

    p = sub.add_parser("generate", help="random staircase instance with known truth")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deficient-corner", type=int, help="1-based corner forced to rank r-1")
    p.add_argument("--orientation", choices=("wide", "tall"), default="wide")
    p.add_argument("--shuffle", action="store_true", help="permute rows and columns")
    p.add_argument("-o", "--out")
    p.add_argument("--truth-out")
    p.set_defaults(func=cmd_generate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ChainInvalid, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
