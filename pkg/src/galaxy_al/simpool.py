"""Synthetic pools with controlled class imbalance, a synthetic score
provider that sharpens with labeled counts (the simulation stand-in for
between-batch retraining; no image data or trained models are involved),
and evaluation metrics.
"""

from __future__ import annotations

import math
import warnings
import zlib
from dataclasses import dataclass, field

import numpy as np

from .core import InputError, LabeledSet
from .engine import MetricsRow, galaxy_run
from . import strategies


@dataclass
class QualityModel:
    """Model-fidelity knobs for the synthetic score provider.

    ``strength`` is the mean logit boost of an example's true class;
    ``ood_bias`` shifts every OOD logit, skewing the decision boundary;
    ``noise0`` scales per-example logit noise, which shrinks with the number
    of labels collected in the example's class at rate ``gain``;
    ``label_noise`` is the probability that an example's boost lands on a
    wrong class; ``reweight_classes`` mimics per-class loss reweighting by
    normalizing the gain by the class's labeled share; ``skew`` is the
    fraction of OOD examples whose boost is shrunk so they sit right at the
    model's decision boundary, pushing the least-confident band inside OOD.
    """

    strength: float = 4.0
    ood_bias: float = 1.0
    noise0: float = 1.0
    gain: float = 1.0
    label_noise: float = 0.0
    reweight_classes: bool = False
    skew: float = 0.0


@dataclass
class SimPool:
    """A synthetic pool: sizes, ground-truth labels, imbalance factor and
    the quality parameters its provider was built with.  Class k-1 is the
    majority OOD class."""

    n: int
    k: int
    true_labels: np.ndarray
    epsilon: float
    quality: QualityModel = field(default_factory=QualityModel)

    def oracle(self, x: int) -> int:
        return int(self.true_labels[x])

    @property
    def id_classes(self) -> set[int]:
        return set(range(self.k - 1))


# (k, per-ID-class sizes, OOD size, imbalance factor) for each preset.
# cifar100-10's published per-class counts only reconcile with its totals and
# imbalance factor as 19 in-distribution classes of 500.
IMBALANCE_PRESETS: dict[str, tuple[int, list[int], int, float]] = {
    "cifar10-2": (2, [5000], 45000, 0.1111),
    "cifar10-3": (3, [5000, 5000], 40000, 0.1250),
    "cifar100-2": (2, [500], 49500, 0.0101),
    "cifar100-3": (3, [500, 500], 49000, 0.0102),
    "cifar100-10": (20, [500] * 19, 40500, 0.0123),
    "svhn-2": (2, [4948], 68309, 0.0724),
    "svhn-3": (3, [13862, 4947], 54448, 0.2546),
    "pathmnist-2": (2, [9401], 80595, 0.1166),
}


def _labels_from_sizes(id_sizes: list[int], n_od: int) -> np.ndarray:
    parts = [np.full(s, c, dtype=np.int64) for c, s in enumerate(id_sizes)]
    parts.append(np.full(n_od, len(id_sizes), dtype=np.int64))
    return np.concatenate(parts)


def make_separable_pool(
    n_id: int, n_od: int, skew: float, seed: int
) -> tuple[SimPool, np.ndarray]:
    """Binary pool whose OOD-confidence ranking places every ID example
    strictly before every OOD example, with the true threshold shifted to
    0.5 - skew so the model-uncertain band lies inside OOD.

    Returns the pool and a static score matrix (columns: ID, OOD).
    """
    if n_id < 1 or n_od < 1:
        raise InputError("need n_id >= 1 and n_od >= 1")
    if not 0.0 <= skew < 0.5:
        raise InputError(f"skew must be in [0, 0.5), got {skew}")
    rng = np.random.default_rng(seed)
    cut = 0.5 - skew
    p_id = np.sort(rng.uniform(0.01, cut - 0.02, size=n_id))
    p_od = np.sort(rng.uniform(cut + 0.02, 0.99, size=n_od))
    p = np.concatenate([p_id, p_od])
    scores = np.stack([1.0 - p, p], axis=1)
    labels = _labels_from_sizes([n_id], n_od)
    eps = n_id / n_od
    pool = SimPool(n_id + n_od, 2, labels, eps, QualityModel(skew=skew))
    return pool, scores


class SyntheticScoreProvider:
    """Score provider whose predictions sharpen as labels accumulate.

    Each example's logits are its true-class boost plus an OOD bias plus
    Gaussian noise whose scale decays with the labeled count of the
    example's class.  Deterministic given (seed, labeled-count vector).
    """

    def __init__(self, pool: SimPool, quality: QualityModel, seed: int):
        self.pool = pool
        self.quality = quality
        self.seed = seed
        self._boost_class = pool.true_labels.copy()
        if quality.label_noise > 0.0:
            rng = np.random.default_rng([seed, 0xBADBEEF])
            flip = rng.random(pool.n) < quality.label_noise
            self._boost_class[flip] = rng.integers(0, pool.k, size=int(flip.sum()))
        self._boost_scale = np.ones(pool.n)
        if quality.skew > 0.0:
            rng = np.random.default_rng([seed, 0xF00D])
            ood = pool.true_labels == pool.k - 1
            band = ood & (rng.random(pool.n) < quality.skew)
            self._boost_scale[band] = rng.uniform(0.05, 0.25, size=int(band.sum()))

    @property
    def shape(self) -> tuple[int, int]:
        return self.pool.n, self.pool.k

    def scores(self, labeled: LabeledSet) -> np.ndarray:
        q = self.quality
        counts = np.zeros(self.pool.k, dtype=np.int64)
        for lbl in labeled.entries.values():
            counts[lbl] += 1
        rng = np.random.default_rng([self.seed, *counts.tolist()])
        gain = np.full(self.pool.k, q.gain)
        if q.reweight_classes and len(labeled) > 0:
            share = np.maximum(counts, 1) / len(labeled)
            gain = gain / (self.pool.k * share)
        sigma = q.noise0 * q.strength / (1.0 + gain * counts)
        logits = rng.standard_normal((self.pool.n, self.pool.k))
        logits *= sigma[self._boost_class][:, None]
        boost = q.strength * self._boost_scale
        logits[np.arange(self.pool.n), self._boost_class] += boost
        logits[:, self.pool.k - 1] += q.ood_bias
        logits -= logits.max(axis=1, keepdims=True)
        e = np.exp(logits)
        return e / e.sum(axis=1, keepdims=True)


def make_imbalanced_pool(
    n: int, k: int, epsilon: float, quality: QualityModel, seed: int
) -> tuple[SimPool, SyntheticScoreProvider]:
    """Multiclass pool honoring N_c/N_ood <= epsilon for every ID class c,
    with a synthetic provider modeling retraining between batches."""
    if k < 2:
        raise InputError("need k >= 2")
    if not 0.0 < epsilon <= 1.0:
        raise InputError(f"epsilon must be in (0, 1], got {epsilon}")
    n_od = math.ceil(n / (1.0 + (k - 1) * epsilon))
    id_total = n - n_od
    while id_total > 0 and math.ceil(id_total / (k - 1)) > epsilon * n_od:
        n_od += 1
        id_total = n - n_od
    if id_total < k - 1:
        raise InputError(
            f"cannot realize {k - 1} nonempty ID classes with n={n}, eps={epsilon}"
        )
    base, extra = divmod(id_total, k - 1)
    id_sizes = [base + (1 if c < extra else 0) for c in range(k - 1)]
    if max(id_sizes) > epsilon * n_od:
        raise InputError("unrealizable sizes: ID class would exceed epsilon * N_ood")
    labels = _labels_from_sizes(id_sizes, n_od)
    pool = SimPool(n, k, labels, epsilon, quality)
    return pool, SyntheticScoreProvider(pool, quality, seed)


def make_preset_pool(
    name: str, quality: QualityModel, seed: int
) -> tuple[SimPool, SyntheticScoreProvider]:
    """Pool with the class sizes of a named imbalance preset (sizes only;
    scores are always synthetic)."""
    if name not in IMBALANCE_PRESETS:
        raise InputError(
            f"unknown preset {name!r}; known: {sorted(IMBALANCE_PRESETS)}"
        )
    k, id_sizes, n_od, eps = IMBALANCE_PRESETS[name]
    labels = _labels_from_sizes(id_sizes, n_od)
    pool = SimPool(len(labels), k, labels, eps, quality)
    return pool, SyntheticScoreProvider(pool, quality, seed)


def balanced_accuracy(predictions, truths, k: int) -> float:
    """Unweighted mean over classes of within-class accuracy.

    Classes with zero examples are excluded from the mean (a diagnostic
    warning is emitted), since a per-class accuracy divides by the class
    size.
    """
    preds = np.asarray(predictions, dtype=np.int64)
    tr = np.asarray(truths, dtype=np.int64)
    if preds.size == 0 or tr.size == 0:
        raise InputError("balanced accuracy needs at least one example")
    if preds.shape != tr.shape:
        raise InputError("predictions and truths must have equal length")
    if tr.min() < 0 or tr.max() >= k or preds.min() < 0 or preds.max() >= k:
        raise InputError(f"labels must lie in [0, {k})")
    accs = []
    empty = []
    for c in range(k):
        mask = tr == c
        if not mask.any():
            empty.append(c)
            continue
        accs.append(float((preds[mask] == c).mean()))
    if empty:
        warnings.warn(f"classes {empty} have no examples; excluded from ACC_bal")
    return float(np.mean(accs))


def id_label_fraction(labeled: LabeledSet, id_classes: set[int]) -> float:
    """Fraction of collected labels that belong to an in-distribution class."""
    if len(labeled) == 0:
        raise InputError("labeled set is empty")
    hits = sum(1 for v in labeled.entries.values() if v in id_classes)
    return hits / len(labeled)


def run_strategy(
    pool: SimPool,
    provider,
    strategy: str,
    rounds: int,
    batch_size: int,
    seed: int,
) -> list[MetricsRow]:
    """One full selection run of a named strategy on a synthetic pool.

    Round 0 is a uniform seed batch for every strategy; later rounds refresh
    scores from the provider and select with the strategy.  Returns one
    MetricsRow per round.
    """
    rng = np.random.default_rng([seed, zlib.crc32(strategy.encode())])
    if strategy == "galaxy":
        _, metrics = galaxy_run(
            provider, pool.oracle, rounds, batch_size, rng,
            truths=pool.true_labels, strategy_name="galaxy",
        )
        return metrics

    n, k = provider.shape
    if rounds * batch_size > n:
        raise InputError(f"budget T*B = {rounds * batch_size} exceeds pool size {n}")
    labeled = LabeledSet()
    seed_ids = rng.choice(n, size=batch_size, replace=False)
    for x in seed_ids:
        labeled.add(int(x), pool.oracle(int(x)), "seed-round")
    metrics = [_row(0, provider, labeled, pool, strategy)]
    for t in range(1, rounds):
        s = provider.scores(labeled)
        if strategy == "confidence":
            batch = strategies.confidence_sampling_batch(s, labeled, batch_size)
        elif strategy == "mlp":
            batch = strategies.most_likely_positive_batch(
                s, labeled, batch_size, pool.id_classes
            )
        elif strategy == "random":
            batch = strategies.random_batch(labeled, n, batch_size, rng)
        else:
            raise InputError(f"unknown strategy {strategy!r}")
        for x in batch.ids:
            labeled.add(x, pool.oracle(x), strategy)
        metrics.append(_row(t, provider, labeled, pool, strategy))
    return metrics


def _row(t, provider, labeled, pool, strategy) -> MetricsRow:
    preds = np.argmax(provider.scores(labeled), axis=1)
    acc = balanced_accuracy(preds, pool.true_labels, pool.k)
    id_count = sum(1 for v in labeled.entries.values() if v in pool.id_classes)
    return MetricsRow(t, len(labeled), acc, id_count, strategy)
