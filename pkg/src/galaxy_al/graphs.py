"""Order-``ord`` linear graphs over per-class rankings.

Each class k has an implicit graph on the pool: examples are placed on a
line by their class-k ranking, and every example is connected to the
examples within ``ord`` positions on each side.  Cut edges (edges whose
endpoints were labeled with different classes) are removed eagerly and
tracked in one global set shared by all class graphs: removal eligibility
depends only on labels, so an edge absent from a particular class graph is
simply never enumerated there.

The central query is the shortest "straddling" path in a class graph: the
shortest path from any labeled class-k example to any labeled example of a
different class.  Because cut removal is eager, such a path always has at
least 2 edges and an unlabeled interior.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import ContractViolationError, InputError, LabeledSet


def _edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass
class GraphSet:
    """K one-vs-all linear graphs sharing one pool and one removed-cut set.

    ``rankings[k][p]`` is the example id at rank p in class k's ordering;
    ``positions[k][x]`` is the rank of example x.  ``ord`` is the current
    maximum edge order (rank distance) and ``removed_cuts`` holds unordered
    id pairs whose edges have been deleted from every graph that had them.
    """

    rankings: list[np.ndarray]
    positions: list[np.ndarray]
    ord: int = 1
    removed_cuts: set[tuple[int, int]] = field(default_factory=set)
    # count of removals performed by remove_cut_edges / connect, which only
    # ever delete labeled-opposite edges; when it equals len(removed_cuts)
    # the expensive consistency scan in the path search can be skipped
    trusted_cuts: int = 0

    def note_cut(self, a: int, b: int) -> None:
        e = _edge(a, b)
        if e not in self.removed_cuts:
            self.removed_cuts.add(e)
            self.trusted_cuts += 1

    @property
    def n(self) -> int:
        return len(self.rankings[0])

    @property
    def k(self) -> int:
        return len(self.rankings)

    def _check_example(self, x: int) -> None:
        if not 0 <= x < self.n:
            raise InputError(f"unknown example id {x} for pool of size {self.n}")

    def _check_class(self, k: int) -> None:
        if not 0 <= k < self.k:
            raise InputError(f"unknown class id {k} ({self.k} classes)")


@dataclass
class Path:
    """A straddling path in one class graph.

    ``nodes[0]`` is labeled with ``cls``, ``nodes[-1]`` with a different
    class, and all interior nodes are unlabeled.
    """

    cls: int
    nodes: list[int]

    @property
    def length(self) -> int:
        return len(self.nodes) - 1


def neighbors(g: GraphSet, k: int, x: int) -> set[int]:
    """Adjacent example ids of x in class graph k at the current order."""
    g._check_class(k)
    g._check_example(x)
    order = g.rankings[k]
    p = int(g.positions[k][x])
    out: set[int] = set()
    for d in range(1, g.ord + 1):
        for q in (p - d, p + d):
            if 0 <= q < g.n:
                y = int(order[q])
                if _edge(x, y) not in g.removed_cuts:
                    out.add(y)
    return out


def remove_cut_edges(g: GraphSet, x: int, labeled: LabeledSet) -> GraphSet:
    """Delete every edge joining x to an oppositely labeled example.

    Scans the rank window of x in every class graph; pairs are recorded in
    the shared ``removed_cuts`` set.
    """
    if x not in labeled:
        raise InputError(f"example {x} is not labeled")
    lx = labeled.label_of(x)
    for k in range(g.k):
        order = g.rankings[k]
        p = int(g.positions[k][x])
        for d in range(1, g.ord + 1):
            for q in (p - d, p + d):
                if 0 <= q < g.n:
                    y = int(order[q])
                    if y in labeled and labeled.label_of(y) != lx:
                        g.note_cut(x, y)
    return g


def path_midpoint(p: Path, rng: np.random.Generator) -> int:
    """Midpoint node of a straddling path.

    For an even number of edges m the midpoint is exact; for odd m the two
    central interior nodes are chosen with equal probability.
    """
    m = p.length
    if m < 2:
        raise ContractViolationError(
            f"straddling path with {m} edge(s): a length-1 straddling path is a "
            "cut edge that should have been removed"
        )
    if m % 2 == 0:
        return p.nodes[m // 2]
    if rng.random() < 0.5:
        return p.nodes[(m - 1) // 2]
    return p.nodes[(m + 1) // 2]


def shortest_straddling_path(g: GraphSet, k: int, labeled: LabeledSet) -> Path | None:
    """Shortest path in graph k from a labeled class-k example to a labeled
    example of any other class, or None when no such pair is connected.

    Ties are broken by smaller terminal example id, then smaller source id.

    Implementation note: on a linear graph whose cut edges are removed
    eagerly, the minimum over all opposite-labeled pairs is attained at a
    pair that is *consecutive in rank among labeled examples* (a "flip
    pair"), because any closer labeled example would itself form a nearer
    pair.  For a flip pair with rank gap > ord, the geodesic hops through
    unlabeled interior ranks and has exactly ceil(gap/ord) edges; for a gap
    <= ord the direct edge is a removed cut and the distance is 2 whenever a
    shared unlabeled neighbor exists.  The rare remaining case (a blocked
    flip pair with no shared neighbor, with no other pair at distance <= 2)
    falls back to an exact breadth-first search.
    """
    g._check_class(k)
    if len(labeled) == 0:
        raise InputError("labeled set is empty")
    has_k = any(v == k for v in labeled.entries.values())
    has_other = any(v != k for v in labeled.entries.values())
    if not has_k or not has_other:
        return None

    # The flip-pair shortcut relies on every removed edge joining oppositely
    # labeled examples (guaranteed when removals come from remove_cut_edges
    # or connect, tracked by trusted_cuts).  Arbitrary removals can sever a
    # geodesic anywhere, so fall back to the exact search in that case.
    if g.trusted_cuts != len(g.removed_cuts) and any(
        a not in labeled or b not in labeled
        or labeled.label_of(a) == labeled.label_of(b)
        for a, b in g.removed_cuts
    ):
        return _bfs_straddling(g, k, labeled)

    order = g.rankings[k]
    pos = g.positions[k]
    ord_ = g.ord
    ranked = sorted((int(pos[x]), x, lbl) for x, lbl in labeled.entries.items())

    flips: list[tuple[int, int, int, int]] = []  # (src rank, src, dst rank, dst)
    for (ra, a, la), (rb, b, lb) in zip(ranked, ranked[1:]):
        a_is_k = la == k
        if a_is_k == (lb == k):
            continue
        if a_is_k:
            flips.append((ra, a, rb, b))
        else:
            flips.append((rb, b, ra, a))

    best: tuple[int, int, int] | None = None  # (length, terminal id, source id)
    best_path: list[int] | None = None
    blocked: list[tuple[int, int, int, int]] = []

    for src_rank, src, dst_rank, dst in flips:
        gap = abs(dst_rank - src_rank)
        if gap <= ord_:
            if _edge(src, dst) not in g.removed_cuts:
                raise ContractViolationError(
                    f"labeled opposite pair ({src}, {dst}) adjacent at order "
                    f"{ord_} but its cut edge was not removed"
                )
            blocked.append((src_rank, src, dst_rank, dst))
            continue
        # interior ranks between a rank-consecutive labeled pair are all
        # unlabeled, so the within-interval geodesic is exact
        m = math.ceil(gap / ord_)
        cand = (m, dst, src)
        if best is None or cand < best:
            step = ord_ if dst_rank > src_rank else -ord_
            ranks = [src_rank + i * step for i in range(m)] + [dst_rank]
            best, best_path = cand, [int(order[r]) for r in ranks]

    if blocked:
        free = np.setdiff1d(
            np.arange(g.n), np.fromiter((r for r, _, _ in ranked), dtype=np.int64)
        )
        for src_rank, src, dst_rank, dst in blocked:
            cap = None if best is None else best[0]
            ranks = _detour_ranks(free, src_rank, dst_rank, ord_, cap)
            if ranks is None:
                continue
            cand = (len(ranks) + 1, dst, src)
            if best is None or cand < best:
                best = cand
                best_path = [src] + [int(order[r]) for r in ranks] + [dst]

    if best_path is None:
        return None
    return Path(k, best_path)


def _detour_ranks(
    free: np.ndarray, rs: int, rd: int, ord_: int, cap: int | None
) -> list[int] | None:
    """Shortest hop sequence from rank rs to rank rd through unlabeled ranks.

    ``free`` is the sorted array of unlabeled ranks.  Hops cover at most
    ``ord_`` rank positions, so the set of free ranks reachable in t hops is
    a contiguous run of ``free``; the search expands that run until it meets
    rd's window.  Returns the interior ranks (length+1 = path edge count), or
    None when unreachable or when the path cannot beat ``cap`` edges.
    """
    if len(free) == 0:
        return None
    i = int(np.searchsorted(free, rs - ord_, side="left"))
    j = int(np.searchsorted(free, rs + ord_, side="right"))
    if i >= j:
        return None
    a = int(np.searchsorted(free, rd - ord_, side="left"))
    b = int(np.searchsorted(free, rd + ord_, side="right"))
    intervals = [(i, j)]
    while max(i, a) >= min(j, b):
        if cap is not None and len(intervals) >= cap - 1:
            return None
        ni = int(np.searchsorted(free, int(free[i]) - ord_, side="left"))
        nj = int(np.searchsorted(free, int(free[j - 1]) + ord_, side="right"))
        if (ni, nj) == (i, j):
            return None
        i, j = ni, nj
        intervals.append((i, j))
    if cap is not None and len(intervals) + 1 > cap:
        return None

    # backtrack: smallest free rank adjacent to rd, then the nearest member
    # of each earlier reachable run
    f = int(free[max(i, a)])
    ranks = [f]
    for pi, pj in reversed(intervals[:-1]):
        if f < free[pi]:
            f = int(free[pi])
        elif f > free[pj - 1]:
            f = int(free[pj - 1])
        else:
            raise ContractViolationError("detour backtrack revisited a run")
        ranks.append(f)
    ranks.reverse()
    return ranks


def _bfs_straddling(g: GraphSet, k: int, labeled: LabeledSet) -> Path | None:
    """Exact multi-source BFS from all class-k labeled examples.

    Stops at the first level containing a labeled non-k example; among those
    the smallest terminal id wins, and the path is reconstructed backwards
    choosing the smallest-id predecessor at each level.
    """
    sources = sorted(x for x, v in labeled.entries.items() if v == k)
    targets = {x for x, v in labeled.entries.items() if v != k}
    if not sources or not targets:
        return None

    dist = {x: 0 for x in sources}
    frontier = deque(sources)
    level = 0
    hit: list[int] = []
    while frontier and not hit:
        level += 1
        nxt: list[int] = []
        for x in frontier:
            for y in sorted(neighbors(g, k, x)):
                if y in dist:
                    continue
                dist[y] = level
                if y in targets:
                    hit.append(y)
                else:
                    nxt.append(y)
        frontier = deque(nxt)
    if not hit:
        return None

    terminal = min(hit)
    nodes = [terminal]
    cur = terminal
    for d in range(level - 1, -1, -1):
        cur = min(y for y in neighbors(g, k, cur) if dist.get(y) == d)
        nodes.append(cur)
    nodes.reverse()
    return Path(k, nodes)
