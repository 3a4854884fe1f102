"""Baseline batch-selection strategies: least-confidence, most-likely-positive
and uniform random.  All return distinct unlabeled ids; when the requested
batch exceeds the unlabeled pool it is clipped with a warning.
"""

from __future__ import annotations

import heapq
import warnings

import numpy as np

from .builder import validate_score_matrix
from .core import InputError, LabeledSet
from .engine import Batch

PROV_CONFIDENCE = "fallback-confidence"


def _clip_batch(b: int, available: int) -> int:
    if b > available:
        warnings.warn(
            f"batch size {b} exceeds {available} unlabeled examples; clipping",
            stacklevel=3,
        )
        return available
    return b


def _top_b(keys, ids, b: int) -> list[int]:
    """Smallest-key b ids via a bounded heap (O(N log B)); ties by id."""
    return [i for _, i in heapq.nsmallest(b, zip(keys, ids))]


def confidence_sampling_batch(scores: np.ndarray, labeled: LabeledSet, b: int) -> Batch:
    """The b unlabeled examples with the smallest maximum softmax score."""
    arr = validate_score_matrix(scores)
    q = arr.max(axis=1)
    unlabeled = [x for x in range(arr.shape[0]) if x not in labeled]
    b = _clip_batch(b, len(unlabeled))
    ids = _top_b((q[x] for x in unlabeled), unlabeled, b)
    return Batch(ids, ["confidence"] * len(ids))


def most_likely_positive_batch(
    scores: np.ndarray, labeled: LabeledSet, b: int, id_classes: set[int]
) -> Batch:
    """The b unlabeled examples with the largest in-distribution probability."""
    arr = validate_score_matrix(scores)
    k = arr.shape[1]
    if not id_classes:
        raise InputError("id_classes must be nonempty")
    if (k - 1) in id_classes:
        raise InputError(f"id_classes must exclude the OOD class {k - 1}")
    if any(not 0 <= c < k for c in id_classes):
        raise InputError(f"id_classes out of range for {k} classes")
    p_id = arr[:, sorted(id_classes)].max(axis=1)
    unlabeled = [x for x in range(arr.shape[0]) if x not in labeled]
    b = _clip_batch(b, len(unlabeled))
    ids = _top_b((-p_id[x] for x in unlabeled), unlabeled, b)
    return Batch(ids, ["most-likely-positive"] * len(ids))


def random_batch(
    labeled: LabeledSet, n: int, b: int, rng: np.random.Generator
) -> Batch:
    """Uniform without replacement over unlabeled ids."""
    unlabeled = [x for x in range(n) if x not in labeled]
    b = _clip_batch(b, len(unlabeled))
    ids = [int(x) for x in rng.choice(unlabeled, size=b, replace=False)]
    return Batch(ids, ["random"] * len(ids))
