"""Executable model of the bisection analysis on a sorted region of
uncertainty: the midpoint-query recursion, closed-form balancedness bounds,
Monte-Carlo estimators of the expected ID/OOD query ratio, noise corruption
and the uncertainty-sampling worst case.

Ranks are 0-based internally; the midpoint coin chooses between the two
central ranks of an even-sized region (equivalent to the 1-based
floor(m/2)+1 / ceil(m/2) convention, verified by exhaustive traces).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import InputError


@dataclass
class RegionTrace:
    """A sorted region of uncertainty with ground-truth layout.

    ``layout[r]`` is True when the example at rank r is in-distribution;
    a separable layout has all ID ranks strictly before all OOD ranks (the
    ID side has the lower OOD-confidence).  ``corrupted`` flips the observed
    label at a rank while the ground truth is retained.
    """

    n_id: int
    n_od: int
    layout: np.ndarray
    corrupted: np.ndarray

    @staticmethod
    def separable(n_id: int, n_od: int) -> "RegionTrace":
        if n_id < 0 or n_od < 0 or n_id + n_od < 1:
            raise InputError("region needs n_id + n_od >= 1 and nonnegative counts")
        n = n_id + n_od
        layout = np.zeros(n, dtype=bool)
        layout[:n_id] = True
        return RegionTrace(n_id, n_od, layout, np.zeros(n, dtype=bool))

    @property
    def n(self) -> int:
        return self.n_id + self.n_od

    def observed(self) -> np.ndarray:
        return self.layout ^ self.corrupted


@dataclass
class BalanceTally:
    """Query counts per class plus the recovered cut rank (if any)."""

    m_id: int
    m_od: int
    cut_found: int | None = None


def simulate_bisection(
    trace: RegionTrace,
    rng: np.random.Generator,
    queried: list[int] | None = None,
) -> BalanceTally:
    """Run the midpoint-query recursion on the (possibly corrupted) observed
    labels until the region of uncertainty is empty.

    Observing ID discards everything up to and including the query; observing
    OOD discards everything from the query on.  The recovered threshold is
    the final empty-region boundary: the number of ranks believed ID.
    When ``queried`` is a list, the 1-based queried ranks are appended to it.
    """
    observed = trace.observed()
    lo, hi = 1, trace.n  # 1-based inclusive region bounds
    m_id = m_od = 0
    while lo <= hi:
        m = hi - lo + 1
        if m % 2 == 1:
            i = (m + 1) // 2
        elif rng.random() < 0.5:
            i = m // 2 + 1
        else:
            i = m // 2
        a = lo + i - 1
        if queried is not None:
            queried.append(a)
        if observed[a - 1]:
            m_id += 1
            lo = a + 1
        else:
            m_od += 1
            hi = a - 1
    return BalanceTally(m_id, m_od, cut_found=lo - 1)


@lru_cache(maxsize=None)
def _exact_region(lo: int, hi: int, n_id: int) -> tuple[float, float]:
    """Exact (E[m_id], E[m_od]) on a separable region {lo..hi} with true cut
    n_id, averaging over the midpoint coin.  Independent oracle for the
    Monte-Carlo estimators."""
    if lo > hi:
        return 0.0, 0.0
    m = hi - lo + 1
    choices = [(m + 1) // 2] if m % 2 == 1 else [m // 2 + 1, m // 2]
    e_id = e_od = 0.0
    for i in choices:
        a = lo + i - 1
        if a <= n_id:
            sub = _exact_region(a + 1, hi, n_id)
            e_id += (1 + sub[0]) / len(choices)
            e_od += sub[1] / len(choices)
        else:
            sub = _exact_region(lo, a - 1, n_id)
            e_id += sub[0] / len(choices)
            e_od += (1 + sub[1]) / len(choices)
    return e_id, e_od


def exact_expected_tallies(n_id: int, n: int) -> tuple[float, float]:
    """Exact expected (m_id, m_od) of the bisection recursion on a separable
    region of size n with n_id ID examples (enumeration over coin flips)."""
    if not 0 <= n_id <= n:
        raise InputError("need 0 <= n_id <= n")
    return _exact_region(1, n, n_id)


def bisection_balance_bound(z: int, n_prime: int) -> float:
    """Lower bound on E[m_id]/E[m_od] for bisection after z forced OOD steps
    with n_prime examples remaining: (log2(n')/2) / (z + log2(n')/2)."""
    if z < 1 or n_prime < 3:
        raise InputError(f"need z >= 1 and n' >= 3, got z={z}, n'={n_prime}")
    half_log = 0.5 * math.log2(n_prime)
    return half_log / (z + half_log)


def galaxy_balance_bound(b_prime: int, z: int, n_prime: int) -> tuple[float, float]:
    """Lower bound for the batched variant taking b_prime extra queries after
    bisection terminates: y/(z + 5y + 3) with y = max(floor(B'/4), log2(n')/2).
    Returns (bound, y)."""
    if b_prime < 0:
        raise InputError(f"B' must be >= 0, got {b_prime}")
    if b_prime >= n_prime:
        raise InputError(f"need B' < n', got B'={b_prime}, n'={n_prime}")
    if z < 1 or n_prime < 3:
        raise InputError(f"need z >= 1 and n' >= 3, got z={z}, n'={n_prime}")
    y = max(b_prime // 4, 0.5 * math.log2(n_prime))
    return y / (z + 5 * y + 3), y


def _bisect_separable_many(
    n_ids: np.ndarray, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized bisection over many separable regions of common size n.

    Returns (m_id, m_od, recovered) arrays.  Matches simulate_bisection on
    separable uncorrupted traces (property-tested against the exact
    enumeration oracle).
    """
    t = len(n_ids)
    lo = np.ones(t, dtype=np.int64)
    hi = np.full(t, n, dtype=np.int64)
    m_id = np.zeros(t, dtype=np.int64)
    m_od = np.zeros(t, dtype=np.int64)
    active = lo <= hi
    while np.any(active):
        m = hi - lo + 1
        coin = rng.random(t) < 0.5
        i = np.where(m % 2 == 1, (m + 1) // 2, np.where(coin, m // 2 + 1, m // 2))
        a = lo + i - 1
        is_id = a <= n_ids
        upd_id = active & is_id
        upd_od = active & ~is_id
        m_id[upd_id] += 1
        lo[upd_id] = a[upd_id] + 1
        m_od[upd_od] += 1
        hi[upd_od] = a[upd_od] - 1
        active = lo <= hi
    return m_id, m_od, lo - 1


@dataclass
class RatioEstimate:
    """Monte-Carlo estimate of E[m_id]/E[m_od] (ratio of means) with a
    bootstrap standard error (NaN when undefined, e.g. a single trial)."""

    ratio: float
    se: float
    mean_m_id: float
    mean_m_od: float
    trials: int


def _bootstrap_ratio_se(
    m_id: np.ndarray, m_od: np.ndarray, rng: np.random.Generator, resamples: int = 1000
) -> float:
    """Bootstrap SE of the ratio of means via multinomial resampling over the
    distinct (m_id, m_od) outcomes (equivalent to index resampling)."""
    t = len(m_id)
    if t < 2:
        return float("nan")
    pairs = np.stack([m_id, m_od], axis=1)
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    draws = rng.multinomial(t, counts / t, size=resamples)
    sums_id = draws @ uniq[:, 0]
    sums_od = draws @ uniq[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = sums_id / sums_od
    ratios = ratios[np.isfinite(ratios)]
    if len(ratios) < 2:
        return float("nan")
    return float(np.std(ratios, ddof=1))


def estimate_balance_ratio_mc(
    z: int, n_prime: int, trials: int, rng: np.random.Generator
) -> RatioEstimate:
    """Estimate E[m_id]/E[m_od] for bisection preceded by z forced OOD steps.

    Each trial draws n_id uniformly from {1..n'-1}, bisects the separable
    region of size n', and adds the z forced steps to the OOD tally.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    bisection_balance_bound(z, n_prime)  # validates z, n'
    n_ids = rng.integers(1, n_prime, size=trials)
    m_id, m_od, _ = _bisect_separable_many(n_ids, n_prime, rng)
    m_od = m_od + z
    ratio = float(m_id.mean() / m_od.mean())
    se = _bootstrap_ratio_se(m_id, m_od, rng)
    return RatioEstimate(ratio, se, float(m_id.mean()), float(m_od.mean()), trials)


def estimate_batched_balance_mc(
    b_prime: int, z: int, n_prime: int, trials: int, rng: np.random.Generator
) -> RatioEstimate:
    """Estimate the batched variant's ratio: bisection (with z forced OOD
    steps) followed by b_prime queries alternating around the recovered cut,
    each side capped by the examples remaining on it.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    galaxy_balance_bound(b_prime, z, n_prime)  # validates
    n_ids = rng.integers(1, n_prime, size=trials)
    m_id, m_od, _ = _bisect_separable_many(n_ids, n_prime, rng)
    avail_id = n_ids - m_id
    avail_od = (n_prime - n_ids) - m_od
    add_id = np.minimum(avail_id, math.ceil(b_prime / 2))
    add_od = np.minimum(avail_od, b_prime - add_id)
    add_id = add_id + np.minimum(avail_id - add_id, b_prime - add_id - add_od)
    m_id = m_id + add_id
    m_od = m_od + add_od + z
    ratio = float(m_id.mean() / m_od.mean())
    se = _bootstrap_ratio_se(m_id, m_od, rng)
    return RatioEstimate(ratio, se, float(m_id.mean()), float(m_od.mean()), trials)


def simulate_noisy_bisection(
    n_id: int, n_od: int, delta: float, rng: np.random.Generator
) -> tuple[bool, BalanceTally]:
    """Bisection on a separable region whose observed labels are each flipped
    independently with probability delta/ceil(log2 n).  Success means the
    recovered threshold equals the true cut.
    """
    if not 0.0 <= delta <= 1.0:
        raise InputError(f"delta must be in [0, 1], got {delta}")
    trace = RegionTrace.separable(n_id, n_od)
    n = trace.n
    rate = delta / max(1, math.ceil(math.log2(n))) if n > 1 else delta
    trace.corrupted = rng.random(n) < rate
    tally = simulate_bisection(trace, rng)
    return tally.cut_found == n_id, tally


def skewed_region_scores(n_prime: int, b: int) -> tuple[RegionTrace, np.ndarray]:
    """Adversarial construction for the uncertainty-sampling worst case: a
    separable region whose true confidence threshold sits far from 0.5 so
    that every example within model-uncertainty distance of 0.5 is OOD.

    Returns the trace and the per-rank OOD-confidence scores.
    """
    if b >= n_prime:
        raise InputError(f"need B < n', got B={b}, n'={n_prime}")
    if b < 1:
        raise InputError("B must be >= 1")
    n_od = max(b, n_prime // 2)
    n_id = n_prime - n_od
    trace = RegionTrace.separable(n_id, n_od)
    scores = np.empty(n_prime)
    scores[:n_id] = np.linspace(0.02, 0.10, n_id)
    scores[n_id:] = np.linspace(0.30, 0.85, n_od)
    return trace, scores


def uncertainty_worst_case(n_prime: int, b: int) -> BalanceTally:
    """Top-B least-confidence selection on the skewed construction: all B
    queries land in OOD, so the ID tally is exactly zero."""
    trace, scores = skewed_region_scores(n_prime, b)
    order = np.argsort(np.abs(scores - 0.5), kind="stable")
    chosen = order[:b]
    m_id = int(trace.layout[chosen].sum())
    return BalanceTally(m_id=m_id, m_od=b - m_id, cut_found=None)
