"""Selection algorithms: the per-batch bisection loop, the multi-round
driver with pluggable score providers, and shortest-shortest-path selection
on static graphs.

Within a batch the score matrix and rankings are fixed; only the graph
order, the removed-cut set and the labeled set change.  Every query depends
on the previous answer, so a selection session is strictly sequential; the
stepwise :class:`BatchSelection` object exposes that boundary explicitly so
a label may also arrive later (e.g. from a human annotator over HTTP).
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from . import builder, graphs
from .core import (
    InputError,
    LabeledSet,
    OrderExhaustedError,
    PoolExhaustedError,
    ProtocolError,
    PROV_BISECTION,
    PROV_FALLBACK_CONFIDENCE,
    PROV_FALLBACK_RANDOM,
    PROV_SEED_ROUND,
)

log = logging.getLogger("galaxy")

Oracle = Callable[[int], int]


@dataclass
class Batch:
    """Examples queried in one batch, with per-id provenance tags."""

    ids: list[int] = field(default_factory=list)
    provenance: list[str] = field(default_factory=list)

    def append(self, example_id: int, tag: str) -> None:
        self.ids.append(example_id)
        self.provenance.append(tag)

    def __len__(self) -> int:
        return len(self.ids)


class ScoreProvider(Protocol):
    """Stand-in for the between-batch model retraining step: maps the current
    labeled set to a fresh N x K softmax score matrix of fixed shape."""

    def scores(self, labeled: LabeledSet) -> np.ndarray: ...

    @property
    def shape(self) -> tuple[int, int]: ...


class StaticScoreProvider:
    """Returns the same score matrix every round."""

    def __init__(self, scores: np.ndarray):
        self._scores = builder.validate_score_matrix(scores)

    def scores(self, labeled: LabeledSet) -> np.ndarray:
        return self._scores

    @property
    def shape(self) -> tuple[int, int]:
        return self._scores.shape


class ExternalScoreProvider:
    """Re-reads a score file before every batch (external-trainer handoff)."""

    def __init__(self, path: str):
        from . import scorefile

        self._path = path
        self._shape = builder.validate_score_matrix(scorefile.read_scores(path)).shape

    def scores(self, labeled: LabeledSet) -> np.ndarray:
        from . import scorefile

        arr = builder.validate_score_matrix(scorefile.read_scores(self._path))
        if arr.shape != self._shape:
            raise ProtocolError(
                f"score file shape changed from {self._shape} to {arr.shape}"
            )
        return arr

    @property
    def shape(self) -> tuple[int, int]:
        return self._shape


class BatchSelection:
    """Stepwise within-batch selection.

    Builds fresh order-1 graphs from the batch's score matrix, removes cuts
    implied by the already-labeled examples, and then serves one query at a
    time: ``pending`` is the outstanding example id (or None when the batch
    is complete) and ``submit`` records its label and computes the next
    query.  ``labeled`` is mutated in place.
    """

    def __init__(
        self,
        scores: np.ndarray,
        labeled: LabeledSet,
        batch_size: int,
        rng: np.random.Generator,
    ):
        if batch_size < 0:
            raise InputError(f"batch size must be >= 0, got {batch_size}")
        self._scores = builder.validate_score_matrix(scores)
        self.labeled = labeled
        self.batch_size = batch_size
        self.rng = rng
        self.graphs = builder.build_graphs(self._scores)
        self.confidences = self._scores.max(axis=1)
        n = self.graphs.n
        for x in labeled.entries:
            if not 0 <= x < n:
                raise InputError(f"labeled id {x} outside pool of size {n}")
            graphs.remove_cut_edges(self.graphs, x, labeled)
        self.batch = Batch()
        self._pending: int | None = None
        self._pending_tag: str | None = None
        if batch_size > 0 and len(labeled) >= n:
            raise PoolExhaustedError("no unlabeled examples remain")
        self._advance()

    @property
    def pending(self) -> int | None:
        return self._pending

    @property
    def done(self) -> bool:
        return self._pending is None

    def submit(self, example_id: int, label: int) -> None:
        if self._pending is None:
            raise InputError("batch is complete; no outstanding query")
        if example_id != self._pending:
            raise InputError(
                f"label for {example_id} does not match outstanding query {self._pending}"
            )
        self.labeled.add(example_id, label, self._pending_tag)
        self.batch.append(example_id, self._pending_tag or PROV_BISECTION)
        graphs.remove_cut_edges(self.graphs, example_id, self.labeled)
        self._pending = None
        self._pending_tag = None
        self._advance()

    def _advance(self) -> None:
        if len(self.batch) >= self.batch_size:
            return
        if len(self.labeled) >= self.graphs.n:
            return
        self._pending, self._pending_tag = self._next_query()

    def _least_confident_unlabeled(self) -> int:
        q = self.confidences
        best = None
        for x in range(self.graphs.n):
            if x in self.labeled:
                continue
            if best is None or q[x] < q[best]:
                best = x
        assert best is not None
        return best

    def _next_query(self) -> tuple[int, str]:
        if len(self.labeled.distinct_labels()) < 2:
            return self._least_confident_unlabeled(), PROV_FALLBACK_CONFIDENCE
        while True:
            best_path: graphs.Path | None = None
            for k in range(self.graphs.k):
                p = graphs.shortest_straddling_path(self.graphs, k, self.labeled)
                if p is not None and (best_path is None or p.length < best_path.length):
                    best_path = p
            if best_path is not None:
                mid = graphs.path_midpoint(best_path, self.rng)
                return mid, PROV_BISECTION
            try:
                builder.connect(self.graphs, self.graphs.ord + 1, self.labeled)
            except OrderExhaustedError:
                return self._least_confident_unlabeled(), PROV_FALLBACK_CONFIDENCE


def galaxy_select_batch(
    scores: np.ndarray,
    labeled: LabeledSet,
    oracle: Oracle,
    batch_size: int,
    rng: np.random.Generator,
) -> tuple[Batch, LabeledSet]:
    """Run one batch of sequential bisection queries with a synchronous
    oracle.  Executes exactly min(batch_size, #unlabeled) queries; the
    oracle's answer to each query is recorded before the next is computed.
    """
    session = BatchSelection(scores, labeled, batch_size, rng)
    while not session.done:
        x = session.pending
        session.submit(x, oracle(x))
    return session.batch, labeled


@dataclass
class MetricsRow:
    """One per-round record of a selection run."""

    round: int
    labels_used: int
    acc_bal: float
    id_labels: int
    strategy: str


def galaxy_run(
    provider: ScoreProvider,
    oracle: Oracle,
    rounds: int,
    batch_size: int,
    rng: np.random.Generator,
    truths: np.ndarray | None = None,
    strategy_name: str = "galaxy",
) -> tuple[LabeledSet, list[MetricsRow]]:
    """Multi-round driver: a uniform seed round followed by rounds-1 batches
    of bisection queries, refreshing scores from the provider between
    batches.  Emits one MetricsRow per round; balanced accuracy is computed
    against ``truths`` when given, otherwise against the labeled subset.
    """
    n, k = provider.shape
    if rounds < 1 or batch_size < 1:
        raise InputError("rounds and batch size must be >= 1")
    if rounds * batch_size > n:
        raise InputError(
            f"budget T*B = {rounds * batch_size} exceeds pool size {n}"
        )
    from .simpool import balanced_accuracy, id_label_fraction  # cycle-free at runtime

    labeled = LabeledSet()
    metrics: list[MetricsRow] = []
    id_classes = set(range(k - 1))

    seed_ids = rng.choice(n, size=batch_size, replace=False)
    for x in seed_ids:
        labeled.add(int(x), oracle(int(x)), PROV_SEED_ROUND)
    metrics.append(
        _metrics_row(0, provider, labeled, truths, id_classes, strategy_name)
    )

    for t in range(1, rounds):
        s = provider.scores(labeled)
        if s.shape != (n, k):
            raise ProtocolError(f"provider returned shape {s.shape}, expected {(n, k)}")
        galaxy_select_batch(s, labeled, oracle, batch_size, rng)
        metrics.append(
            _metrics_row(t, provider, labeled, truths, id_classes, strategy_name)
        )
    return labeled, metrics


def _metrics_row(
    t: int,
    provider: ScoreProvider,
    labeled: LabeledSet,
    truths: np.ndarray | None,
    id_classes: set[int],
    strategy_name: str,
) -> MetricsRow:
    from .simpool import balanced_accuracy, id_label_fraction

    preds = np.argmax(provider.scores(labeled), axis=1)
    if truths is not None:
        acc = balanced_accuracy(preds, truths, provider.shape[1])
    else:
        ids = labeled.ids()
        acc = balanced_accuracy(
            preds[ids], [labeled.label_of(i) for i in ids], provider.shape[1]
        )
    id_count = sum(1 for v in labeled.entries.values() if v in id_classes)
    return MetricsRow(t, len(labeled), acc, id_count, strategy_name)


def s2_select(
    adjacency: dict[int, set[int]] | list[set[int]],
    oracle: Oracle,
    budget: int,
    rng: np.random.Generator,
) -> LabeledSet:
    """Shortest-shortest-path selection on a static undirected graph.

    Starts from two distinct uniform samples, then repeatedly bisects the
    shortest path joining any oppositely labeled pair, falling back to a
    uniform unlabeled query when no such pair is connected; identified cut
    edges are removed as labels arrive.  Stops after ``budget`` labels in
    total (the two initial samples included, keeping the budget <= N).
    """
    adj = {int(u): set(map(int, vs)) for u, vs in (
        adjacency.items() if isinstance(adjacency, dict) else enumerate(adjacency)
    )}
    nodes = sorted(adj)
    n = len(nodes)
    if not 2 <= budget <= n:
        raise InputError(f"budget must be in [2, {n}], got {budget}")

    labeled = LabeledSet()

    def observe(x: int, tag: str) -> None:
        labeled.add(x, oracle(x), tag)
        lx = labeled.label_of(x)
        for y in list(adj[x]):
            if y in labeled and labeled.label_of(y) != lx:
                adj[x].discard(y)
                adj[y].discard(x)

    first, second = rng.choice(nodes, size=2, replace=False)
    observe(int(first), PROV_FALLBACK_RANDOM)
    observe(int(second), PROV_FALLBACK_RANDOM)

    while len(labeled) < budget:
        path = _s2_shortest_straddling(adj, labeled)
        if path is None:
            unlabeled = [x for x in nodes if x not in labeled]
            observe(int(rng.choice(unlabeled)), PROV_FALLBACK_RANDOM)
        else:
            if len(path) - 1 == 1:
                # a straddling edge survives only until both labels arrive
                raise ProtocolError("unremoved cut edge in s2 graph")
            mid = path_midpoint_nodes(path, rng)
            observe(mid, PROV_BISECTION)
    return labeled


def path_midpoint_nodes(nodes: list[int], rng: np.random.Generator) -> int:
    """Midpoint of a node sequence, same even/odd convention as path_midpoint."""
    return graphs.path_midpoint(graphs.Path(0, nodes), rng)


def _s2_shortest_straddling(
    adj: dict[int, set[int]], labeled: LabeledSet
) -> list[int] | None:
    """Shortest path between any oppositely labeled pair, None if disconnected.

    Runs one multi-source BFS per observed label value; ties broken by
    smaller terminal id then smaller predecessor ids.
    """
    best: list[int] | None = None
    for lbl in sorted(labeled.distinct_labels()):
        sources = sorted(x for x, v in labeled.entries.items() if v == lbl)
        targets = {x for x, v in labeled.entries.items() if v != lbl}
        if not targets:
            continue
        dist = {x: 0 for x in sources}
        frontier = deque(sources)
        level = 0
        hit: list[int] = []
        while frontier and not hit:
            level += 1
            if best is not None and level >= len(best) - 1:
                break
            nxt: list[int] = []
            for x in frontier:
                for y in sorted(adj[x]):
                    if y in dist:
                        continue
                    dist[y] = level
                    if y in targets:
                        hit.append(y)
                    else:
                        nxt.append(y)
            frontier = deque(nxt)
        if not hit:
            continue
        terminal = min(hit)
        nodes = [terminal]
        cur = terminal
        for d in range(level - 1, -1, -1):
            cur = min(y for y in adj[cur] if dist.get(y) == d)
            nodes.append(cur)
        nodes.reverse()
        if best is None or len(nodes) < len(best):
            best = nodes
    return best
