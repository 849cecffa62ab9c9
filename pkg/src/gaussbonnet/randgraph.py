"""Seeded random weighted graphs and cochains for property checks."""
from __future__ import annotations

import numpy as np

from .cochains import Cochain0, Cochain1
from .graph import WeightedGraph


def log_uniform(rng: np.random.Generator, size, lo=0.1, hi=10.0) -> np.ndarray:
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


def random_connected_graph(rng: np.random.Generator, n: int, extra: float | None = None,
                           lo=0.1, hi=10.0) -> WeightedGraph:
    """Random spanning tree plus random chords, weights log-uniform in [lo, hi]."""
    ids = [f"v{k}" for k in range(n)]
    perm = rng.permutation(n)
    pairs = set()
    for j in range(1, n):
        a, b = perm[j], perm[int(rng.integers(0, j))]
        pairs.add((min(a, b), max(a, b)))
    if extra is None:
        extra = rng.uniform(0, 1.5)
    for _ in range(int(extra * n)):
        a, b = rng.integers(0, n, 2)
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    pairs = sorted(pairs)
    c = log_uniform(rng, n, lo, hi)
    r = log_uniform(rng, len(pairs), lo, hi)
    return WeightedGraph(zip(ids, c), [(ids[a], ids[b], w) for (a, b), w in zip(pairs, r)])


def random_cochain0(rng, graph: WeightedGraph) -> Cochain0:
    return Cochain0(graph, rng.standard_normal(graph.n_vertices))


def random_cochain1(rng, graph: WeightedGraph) -> Cochain1:
    return Cochain1(graph, rng.standard_normal(graph.n_edges))


def zero_mean_source(rng, graph: WeightedGraph, support: int | None = None) -> Cochain0:
    """Random current source with <i, 1> = 0 in the c-weighted sense."""
    vals = np.zeros(graph.n_vertices)
    k = graph.n_vertices if support is None else min(support, graph.n_vertices)
    idx = rng.choice(graph.n_vertices, size=k, replace=False)
    vals[idx] = rng.standard_normal(k)
    c = graph.c[idx]
    vals[idx] -= (c @ vals[idx]) / c.sum()
    return Cochain0(graph, vals)
