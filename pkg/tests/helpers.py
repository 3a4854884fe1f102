"""Shared construction and brute-force oracles for graph tests."""

import numpy as np

from galaxy_al.graphs import GraphSet, _edge


def graphset_from_rankings(rankings, ord=1, removed=(), trusted=False):
    """Build a GraphSet directly from explicit per-class rankings."""
    rankings = [np.asarray(r, dtype=np.int64) for r in rankings]
    positions = []
    for r in rankings:
        pos = np.empty(len(r), dtype=np.int64)
        pos[r] = np.arange(len(r))
        positions.append(pos)
    removed = {_edge(a, b) for a, b in removed}
    g = GraphSet(rankings=rankings, positions=positions, ord=ord, removed_cuts=removed)
    if trusted:
        g.trusted_cuts = len(removed)
    return g


def explicit_edges(g, k):
    """The class-k edge set, enumerated from the definition."""
    order = g.rankings[k]
    n = len(order)
    edges = set()
    for d in range(1, g.ord + 1):
        for i in range(n - d):
            e = _edge(int(order[i]), int(order[i + d]))
            if e not in g.removed_cuts:
                edges.add(e)
    return edges


def brute_force_straddling(g, k, labeled):
    """All-pairs shortest straddling path length in graph k by plain BFS
    over the explicit edge set; None when no opposite pair is connected."""
    edges = explicit_edges(g, k)
    adj = {x: set() for x in range(g.n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    sources = [x for x, v in labeled.entries.items() if v == k]
    targets = {x for x, v in labeled.entries.items() if v != k}
    best = None
    for s in sources:
        dist = {s: 0}
        frontier = [s]
        while frontier:
            nxt = []
            for x in frontier:
                for y in adj[x]:
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        nxt.append(y)
            frontier = nxt
        for t in targets:
            if t in dist and (best is None or dist[t] < best):
                best = dist[t]
    return best


def assert_valid_straddling(g, k, labeled, path):
    """Check the Path invariant: endpoints labeled k / non-k, unlabeled
    interior, consecutive nodes adjacent, at least two edges."""
    assert path.length >= 2
    assert labeled.label_of(path.nodes[0]) == k
    assert path.nodes[-1] in labeled
    assert labeled.label_of(path.nodes[-1]) != k
    edges = explicit_edges(g, k)
    for a, b in zip(path.nodes, path.nodes[1:]):
        assert _edge(a, b) in edges, f"({a},{b}) not an edge"
    for x in path.nodes[1:-1]:
        assert x not in labeled, f"interior node {x} is labeled"
