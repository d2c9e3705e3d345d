"""Graph view of a sampling pattern: lift, clique tree, chordality via MCS.

Vertices ``0..m-1`` are rows and ``m..m+n-1`` are columns.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .pattern import SampledInstance, StaircaseChain


@dataclass(frozen=True)
class Graph:
    node_count: int
    edges: frozenset  # of frozenset({u, v})

    def adjacency(self) -> list[set[int]]:
        adj = [set() for _ in range(self.node_count)]
        for e in self.edges:
            u, v = tuple(e)
            adj[u].add(v)
            adj[v].add(u)
        return adj


@dataclass(frozen=True)
class BipartiteLift(Graph):
    m: int = 0
    n: int = 0
    nontrivial_edges: frozenset = frozenset()


def _edge(u, v):
    return frozenset((u, v))


def lift_pattern(inst: SampledInstance) -> BipartiteLift:
    m, n = inst.m, inst.n
    trivial = {_edge(u, v) for u, v in itertools.combinations(range(m), 2)}
    trivial |= {_edge(u, v) for u, v in itertools.combinations(range(m, m + n), 2)}
    cross = frozenset(_edge(i, m + j) for i, j in inst.samples)
    return BipartiteLift(m + n, frozenset(trivial | cross), m, n, cross)


def chain_graph(chain: StaircaseChain, m: int) -> Graph:
    """Union of the chain cliques ``U_i + (m + V_i)``.

    This is the graph whose clique tree is the chain path; unlike the full
    lift it carries no row-row or column-column edge outside a biclique.
    """
    edges = set()
    nodes = 0
    for C in clique_sets(chain, m):
        edges.update(_edge(u, v) for u, v in itertools.combinations(sorted(C), 2))
        nodes = max(nodes, max(C) + 1)
    return Graph(nodes, frozenset(edges))


def clique_sets(chain: StaircaseChain, m: int) -> list[frozenset]:
    return [frozenset(b.rows) | frozenset(m + j for j in b.cols) for b in chain.bicliques]


@dataclass(frozen=True)
class CliqueTree:
    nodes: tuple[frozenset, ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def separators(self):
        return {(a, b): self.nodes[a] & self.nodes[b] for a, b in self.edges}

    def to_dot(self, name: str = "clique_tree", m: int | None = None) -> str:
        def label(C):
            if m is None:
                return ",".join(str(v + 1) for v in sorted(C))
            rows = [str(v + 1) for v in sorted(C) if v < m]
            cols = [str(v - m + 1) for v in sorted(C) if v >= m]
            return f"R{{{','.join(rows)}}} C{{{','.join(cols)}}}"

        lines = [f"graph {name} {{"]
        for k, C in enumerate(self.nodes):
            lines.append(f'  n{k + 1} [label="{label(C)}"];')
        for a, b in self.edges:
            lines.append(f'  n{a + 1} -- n{b + 1} [label="{len(self.nodes[a] & self.nodes[b])}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def chain_to_clique_tree(chain: StaircaseChain, m: int) -> CliqueTree:
    nodes = tuple(clique_sets(chain, m))
    return CliqueTree(nodes, tuple((k, k + 1) for k in range(len(nodes) - 1)))


def mcs_order(g: Graph) -> tuple[list[int], bool]:
    """Maximum cardinality search; ties go to the lowest vertex index.

    Returns the visit order and whether its reverse is a perfect elimination
    ordering (i.e. the graph is chordal).
    """
    adj = g.adjacency()
    weight = [0] * g.node_count
    done = [False] * g.node_count
    order = []
    for _ in range(g.node_count):
        v = max((u for u in range(g.node_count) if not done[u]), key=lambda u: (weight[u], -u))
        done[v] = True
        order.append(v)
        for u in adj[v]:
            if not done[u]:
                weight[u] += 1
    return order, is_perfect_elimination(adj, order[::-1])


def is_perfect_elimination(adj: list[set[int]], peo: list[int]) -> bool:
    """Zero fill-in test: each vertex's later neighbours must form a clique.

    Checking the later neighbours against the earliest of them suffices.
    """
    pos = {v: k for k, v in enumerate(peo)}
    for v in peo:
        later = [u for u in adj[v] if pos[u] > pos[v]]
        if len(later) < 2:
            continue
        parent = min(later, key=pos.__getitem__)
        if any(u != parent and u not in adj[parent] for u in later):
            return False
    return True


def verify_induced_subtree(tree: CliqueTree) -> bool:
    k = len(tree.nodes)
    if len(tree.edges) != k - 1:
        return False
    tadj = {a: set() for a in range(k)}
    for a, b in tree.edges:
        tadj[a].add(b)
        tadj[b].add(a)
    if k and len(_component(0, tadj, set(range(k)))) != k:
        return False
    for v in frozenset().union(*tree.nodes) if tree.nodes else ():
        holding = {a for a in range(k) if v in tree.nodes[a]}
        start = next(iter(holding))
        if _component(start, tadj, holding) != holding:
            return False
    return True


def _component(start, adj, allowed):
    seen, stack = {start}, [start]
    while stack:
        a = stack.pop()
        for b in adj[a]:
            if b in allowed and b not in seen:
                seen.add(b)
                stack.append(b)
    return seen
