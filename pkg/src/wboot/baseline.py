"""Classic bootstrap by data resampling.

Every replicate materialises its resampled dataset, applies the statistic's
transforms to it and averages them (uniform weights). This is deliberately
naive: it is the correctness reference for the vectorised engine and its
benchmark opponent. Only the O(1) combiner step is batched per block.
"""

from __future__ import annotations

import numpy as np

from .core import (
    AnySample,
    MomentStatistic,
    ReplicationVector,
    UndefinedStatisticError,
)
from .engine import BootstrapConfig, block_spans
from .sampling import CountMatrix, RngSpec, expand_unchecked


def resample_indices(n: int, gen: np.random.Generator) -> np.ndarray:
    """N indices drawn uniformly with replacement as floor(u * N)."""
    return np.minimum((gen.random(n) * n).astype(np.intp), n - 1)


def resample_moments(stat: MomentStatistic, resample: AnySample) -> np.ndarray:
    """Plug-in moments of a materialised resample: mean of each transform."""
    cols = resample.columns
    rows = np.array([f(*cols) for f in stat.transforms], dtype=np.float64)
    return np.add.reduce(rows, axis=1) / resample.N


def _finish(stat: MomentStatistic, moments: np.ndarray, start: int, policy: str) -> np.ndarray:
    vals = np.broadcast_to(stat.combine(moments), (moments.shape[1],))
    if policy == "fail":
        bad = np.flatnonzero(~np.isfinite(vals))
        if bad.size:
            raise UndefinedStatisticError(f"{stat.name} undefined at replicate {start + int(bad[0])}")
    return vals


def bootstrap_resample_loop(
    stat: MomentStatistic, sample: AnySample, cfg: BootstrapConfig
) -> ReplicationVector:
    if cfg.method != "multinomial":
        raise ValueError("the resampling baseline only covers the multinomial bootstrap")
    # fails fast on a statistic/sample kind mismatch
    stat.transform_matrix(sample)
    n = sample.N
    out = np.empty(cfg.B, dtype=np.float64)
    for c, start, stop in block_spans(cfg.B):
        gen = RngSpec(cfg.master_seed, c).generator()
        moments = np.empty((stat.k, stop - start))
        for b in range(stop - start):
            resample = sample.take(resample_indices(n, gen))
            moments[:, b] = resample_moments(stat, resample)
        out[start:stop] = _finish(stat, moments, start, cfg.nan_policy)
    return ReplicationVector(out)


def bootstrap_resample_from_counts(
    stat: MomentStatistic, sample: AnySample, counts: CountMatrix, nan_policy: str = "record"
) -> ReplicationVector:
    """Replicates from the expanded resample of each count column."""
    if counts.N != sample.N:
        raise ValueError(f"count matrix has N={counts.N}, sample has N={sample.N}")
    stat.transform_matrix(sample)
    index = np.arange(sample.N)
    # CountMatrix guarantees nonnegative columns summing to N
    cols = counts.counts.T
    moments = np.empty((stat.k, counts.B))
    for b in range(counts.B):
        resample = expand_unchecked(sample, cols[b], index)
        moments[:, b] = resample_moments(stat, resample)
    return ReplicationVector(_finish(stat, moments, 0, nan_policy))
