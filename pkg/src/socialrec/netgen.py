"""Watts-Strogatz small-world graphs for contagion studies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DomainError
from .model import SocialGraph, assign_weights


@dataclass(frozen=True)
class WattsStrogatzParams:
    n: int = 1000
    k: int = 10
    p: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.k % 2 != 0:
            raise DomainError(f"lattice degree k must be even, got {self.k}")
        if not 0 < self.k < self.n:
            raise DomainError(f"need 0 < k < n, got k={self.k}, n={self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"rewiring probability {self.p} outside [0, 1]")


def watts_strogatz_edges(n: int, k: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Ring lattice over 0..n-1 with each lattice edge's far end rewired w.p. ``p``.

    A rewiring target that would create a self-loop or a duplicate edge is
    redrawn, at most ``n`` times; after that the original edge is kept.
    Edge order is lattice order, so the edge count is always n*k/2.
    """
    adj = [set() for _ in range(n)]
    lattice = []
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            lattice.append([u, v])
            adj[u].add(v)
            adj[v].add(u)
    if p > 0:
        for edge in lattice:
            if rng.random() >= p:
                continue
            u, v = edge
            for _ in range(n):
                w = int(rng.integers(n))
                if w != u and w not in adj[u]:
                    adj[u].discard(v)
                    adj[v].discard(u)
                    adj[u].add(w)
                    adj[w].add(u)
                    edge[1] = w
                    break
    return [(u, v) for u, v in lattice]


def watts_strogatz(params: WattsStrogatzParams, weight_mode: str = "uniform") -> SocialGraph:
    """Generate a small-world graph with nodes "0".."n-1" and influence weights.

    Topology and weights use independent child streams of ``params.seed``.
    """
    topo_seed, weight_seed = np.random.SeedSequence(params.seed).spawn(2)
    edges = watts_strogatz_edges(params.n, params.k, params.p, np.random.default_rng(topo_seed))
    return _graph_from_int_edges(params.n, edges, weight_mode, weight_seed)


def _graph_from_int_edges(n, edges, weight_mode, seed) -> SocialGraph:
    nodes = [str(i) for i in range(n)]
    adjacency: dict[str, list[str]] = {v: [] for v in nodes}
    for u, v in edges:
        adjacency[nodes[u]].append(nodes[v])
        adjacency[nodes[v]].append(nodes[u])
    return SocialGraph(tuple(nodes), assign_weights(nodes, adjacency, weight_mode, seed))


def assign_influence(graph: SocialGraph, mode: str, seed=0) -> SocialGraph:
    if mode not in ("uniform", "random_partition"):
        raise ArgumentError(f"unknown influence mode {mode!r}")
    return graph.with_weights(mode, seed)
