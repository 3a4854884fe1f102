"""Construction of the K one-vs-all linear graphs from softmax scores.

Examples are ranked per class by the confidence margin
``margin[i] = scores[i, k] - max_c scores[i, c]`` (a value in [-1, 0] that is
0 exactly when class k attains the row maximum), ascending, with ties broken
by ascending confidence and finally by ascending example id so the ordering
is total and runs are reproducible.
"""

from __future__ import annotations

import numpy as np

from .core import FormatError, InputError, LabeledSet
from .graphs import GraphSet

ROW_SUM_TOLERANCE = 1e-4


def validate_score_matrix(scores: np.ndarray) -> np.ndarray:
    """Validate and normalize an N x K score matrix.

    Entries must lie in [0, 1] and rows must sum to 1 within 1e-4; rows
    within tolerance are renormalized, anything else is rejected.
    Returns a float64 copy.
    """
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 2:
        raise FormatError(f"score matrix must be 2-D, got shape {arr.shape}")
    n, k = arr.shape
    if n < 1 or k < 2:
        raise FormatError(f"score matrix needs N >= 1 and K >= 2, got {n} x {k}")
    if not np.all(np.isfinite(arr)):
        raise FormatError("score matrix contains non-finite entries")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise FormatError("score matrix entries must lie in [0, 1]")
    sums = arr.sum(axis=1)
    bad = np.abs(sums - 1.0) > ROW_SUM_TOLERANCE
    if np.any(bad):
        i = int(np.argmax(bad))
        raise FormatError(f"row {i} sums to {sums[i]:.6f}, outside 1 +- 1e-4")
    if np.all(np.abs(sums - 1.0) < 1e-12):
        # already normalized; dividing again would perturb exact ties
        return arr.copy()
    return arr / sums[:, None]


def compute_confidences(scores: np.ndarray) -> np.ndarray:
    """Per-example confidence: the row maximum of the softmax scores."""
    arr = validate_score_matrix(scores)
    return arr.max(axis=1)


def compute_margins(scores: np.ndarray, confidences: np.ndarray, k: int) -> np.ndarray:
    """Class-k margins: scores[:, k] - confidences (<= 0, 0 iff k is argmax)."""
    arr = np.asarray(scores, dtype=np.float64)
    if not 0 <= k < arr.shape[1]:
        raise InputError(f"class {k} out of range for {arr.shape[1]} classes")
    return arr[:, k] - np.asarray(confidences, dtype=np.float64)


def build_graphs(scores: np.ndarray) -> GraphSet:
    """Build the order-1 linear graphs: one per-class ranking, consecutive
    ranks connected.

    Sort keys per class: ascending margin, then ascending confidence, then
    ascending example id.  Comparisons use the raw stored floats with no
    epsilon so the ordering is stable and deterministic.
    """
    arr = validate_score_matrix(scores)
    n, k = arr.shape
    q = arr.max(axis=1)
    ids = np.arange(n)
    rankings: list[np.ndarray] = []
    positions: list[np.ndarray] = []
    for c in range(k):
        margins = arr[:, c] - q
        order = np.lexsort((ids, q, margins))
        pos = np.empty(n, dtype=np.int64)
        pos[order] = ids
        rankings.append(order.astype(np.int64))
        positions.append(pos)
    return GraphSet(rankings=rankings, positions=positions, ord=1)


def connect(g: GraphSet, new_ord: int, labeled: LabeledSet) -> GraphSet:
    """Raise the graph order by one, adding edges between ranks ``new_ord``
    apart in every class graph.

    Newly reachable edges whose endpoints carry different labels are purged
    immediately, preserving the invariant that no class graph contains an
    edge joining oppositely labeled examples.
    """
    if new_ord != g.ord + 1:
        raise InputError(f"order must grow by 1 (current {g.ord}, requested {new_ord})")
    from .core import OrderExhaustedError

    if new_ord > g.n - 1:
        raise OrderExhaustedError(
            f"order {new_ord} exceeds the maximum N-1 = {g.n - 1}"
        )
    for k in range(g.k):
        order = g.rankings[k]
        pos = g.positions[k]
        for x, lx in labeled.entries.items():
            p = int(pos[x])
            for qr in (p - new_ord, p + new_ord):
                if 0 <= qr < g.n:
                    y = int(order[qr])
                    if y in labeled and labeled.label_of(y) != lx:
                        g.note_cut(x, y)
    g.ord = new_ord
    return g
