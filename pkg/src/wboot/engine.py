"""Vectorised bootstrap driver.

Replicates are produced in logical blocks of ``BLOCK_COLUMNS`` columns; block
``c`` always draws from stream ``RngSpec(master_seed, c)``. ``chunk_columns``
only decides how many columns go through one matrix product, so results do
not depend on it. The transforms are applied to the data once, giving a
``(k, N)`` matrix ``F``; each chunk of weights ``W`` yields moments ``F @ W``
and the combiner turns those into replicates. No resampled dataset is ever
built on this path.

The product uses ``einsum`` rather than BLAS ``@``: its summation order per
output entry does not depend on the chunk width, which keeps results
bit-identical across ``chunk_columns`` (BLAS re-blocks with the width).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Union

import numpy as np

from .core import (
    AnySample,
    MomentStatistic,
    PairedSample,
    ReplicationVector,
    UndefinedStatisticError,
    correlation_from_moments,
    correlation_rows,
)
from .sampling import (
    DEFAULT_MAX_BYTES,
    CountMatrix,
    RngSpec,
    WeightMatrix,
    check_capacity,
    dirichlet_weights,
    multinomial_counts,
)

BLOCK_COLUMNS = 10_000
DEFAULT_CHUNK = 10_000
METHODS = ("multinomial", "dirichlet")
NAN_POLICIES = ("record", "fail")


class EmptyDistributionError(ValueError):
    """No finite replicate to summarise."""


@dataclass(frozen=True)
class BootstrapConfig:
    B: int
    method: str = "multinomial"
    master_seed: int = 0
    chunk_columns: int = DEFAULT_CHUNK
    nan_policy: str = "record"
    max_bytes: int = DEFAULT_MAX_BYTES

    def __post_init__(self):
        if self.B < 1:
            raise ValueError("B must be at least 1")
        if self.chunk_columns < 1:
            raise ValueError("chunk_columns must be at least 1")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.nan_policy not in NAN_POLICIES:
            raise ValueError(f"nan_policy must be one of {NAN_POLICIES}")
        RngSpec(self.master_seed, 0)


def block_spans(B: int) -> Iterator[tuple[int, int, int]]:
    """Yield ``(block_index, start, stop)`` for the logical blocks covering B."""
    for c, start in enumerate(range(0, B, BLOCK_COLUMNS)):
        yield c, start, min(start + BLOCK_COLUMNS, B)


def block_matrix(n: int, width: int, method: str, rng: RngSpec) -> tuple[np.ndarray, float]:
    """Raw replicate matrix for one block and the divisor turning it into weights.

    Multinomial blocks stay as integer counts (stored as float64) with divisor
    N, so the moment sums are formed from exact integer multiples.
    """
    gen = rng.generator()
    if method == "multinomial":
        return multinomial_counts(n, width, gen).astype(np.float64), float(n)
    return dirichlet_weights(n, width, gen), 1.0


def iter_weight_chunks(n: int, cfg: BootstrapConfig) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(start_column, M)`` with ``M`` at most ``chunk_columns`` wide.

    ``M`` holds counts or weights depending on ``cfg.method``; see ``block_matrix``.
    """
    check_capacity(n, max(cfg.chunk_columns, min(BLOCK_COLUMNS, cfg.B)), cfg.max_bytes)
    chunk = cfg.chunk_columns
    pending = None
    emitted = 0
    for c, start, stop in block_spans(cfg.B):
        blk, _ = block_matrix(n, stop - start, cfg.method, RngSpec(cfg.master_seed, c))
        buf = blk if pending is None else np.concatenate([pending, blk], axis=1)
        last = stop == cfg.B
        offset = 0
        while buf.shape[1] - offset >= chunk or (last and offset < buf.shape[1]):
            width = min(chunk, buf.shape[1] - offset)
            yield emitted, buf[:, offset : offset + width]
            emitted += width
            offset += width
        pending = buf[:, offset:] if offset < buf.shape[1] else None


def _apply_nan_policy(values: np.ndarray, start: int, policy: str, name: str) -> None:
    if policy == "fail":
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise UndefinedStatisticError(
                f"{name} undefined at replicate {start + int(bad[0])}"
            )


def _drive(
    F: np.ndarray,
    combine: Callable[[np.ndarray], np.ndarray],
    chunks,
    B: int,
    divisor: float,
    nan_policy: str,
    name: str,
) -> ReplicationVector:
    out = np.empty(B, dtype=np.float64)
    for start, W in chunks:
        moments = np.einsum("kn,nb->kb", F, W)
        if divisor != 1.0:
            moments /= divisor
        vals = np.broadcast_to(combine(moments), (W.shape[1],))
        _apply_nan_policy(vals, start, nan_policy, name)
        out[start : start + W.shape[1]] = vals
    return ReplicationVector(out)


def bootstrap_vectorized(
    stat: MomentStatistic, sample: AnySample, cfg: BootstrapConfig
) -> ReplicationVector:
    F = stat.transform_matrix(sample)
    return _drive(
        F,
        stat.combine,
        iter_weight_chunks(sample.N, cfg),
        cfg.B,
        _divisor(sample.N, cfg.method),
        cfg.nan_policy,
        stat.name,
    )


def _divisor(n: int, method: str) -> float:
    return float(n) if method == "multinomial" else 1.0


def _combine_correlation(moments: np.ndarray) -> np.ndarray:
    return correlation_from_moments(*moments)


def bootstrap_correlation_vectorized(
    pair: PairedSample, cfg: BootstrapConfig
) -> ReplicationVector:
    """Pearson correlation replicates from the five moment rows per chunk."""
    return _drive(
        correlation_rows(pair),
        _combine_correlation,
        iter_weight_chunks(pair.N, cfg),
        cfg.B,
        _divisor(pair.N, cfg.method),
        cfg.nan_policy,
        "correlation",
    )


def _fixed_chunks(W: np.ndarray, chunk: int):
    for start in range(0, W.shape[1], chunk):
        yield start, W[:, start : start + chunk]


def _as_matrix(
    weights: Union[CountMatrix, WeightMatrix, np.ndarray], n: int
) -> tuple[np.ndarray, float]:
    if isinstance(weights, CountMatrix):
        W, divisor = weights.counts.astype(np.float64), float(weights.N)
    elif isinstance(weights, WeightMatrix):
        W, divisor = weights.weights, 1.0
    else:
        W, divisor = np.asarray(weights, dtype=np.float64), 1.0
    if W.ndim != 2 or W.shape[0] != n:
        raise ValueError(f"weight matrix has shape {W.shape}, sample has N={n}")
    return W, divisor


def bootstrap_from_weights(
    stat: MomentStatistic,
    sample: AnySample,
    weights,
    nan_policy: str = "record",
    chunk_columns: int = DEFAULT_CHUNK,
) -> ReplicationVector:
    """Vectorised replicates for an explicit count or weight matrix."""
    W, divisor = _as_matrix(weights, sample.N)
    F = stat.transform_matrix(sample)
    return _drive(
        F, stat.combine, _fixed_chunks(W, chunk_columns), W.shape[1], divisor, nan_policy, stat.name
    )


def correlation_from_weights(
    pair: PairedSample, weights, nan_policy: str = "record", chunk_columns: int = DEFAULT_CHUNK
) -> ReplicationVector:
    W, divisor = _as_matrix(weights, pair.N)
    return _drive(
        correlation_rows(pair),
        _combine_correlation,
        _fixed_chunks(W, chunk_columns),
        W.shape[1],
        divisor,
        nan_policy,
        "correlation",
    )


PERCENTILES = (2.5, 25.0, 50.0, 75.0, 97.5)
HIST_BINS = 30


@dataclass
class BootstrapSummary:
    count: int
    nan_count: int
    mean: float
    sd: float
    percentiles: dict[float, float]
    hist_counts: np.ndarray = field(repr=False)
    hist_edges: np.ndarray = field(repr=False)

    def line(self) -> str:
        p = self.percentiles
        return (
            f"count={self.count} nan_count={self.nan_count} mean={self.mean!r} "
            f"sd={self.sd!r} p2.5={p[2.5]!r} p50={p[50.0]!r} p97.5={p[97.5]!r}"
        )


def bootstrap_summary(reps: ReplicationVector) -> BootstrapSummary:
    finite = reps.values[np.isfinite(reps.values)]
    if finite.size == 0:
        raise EmptyDistributionError("no finite bootstrap replicates")
    sd = float(np.std(finite, ddof=1)) if finite.size > 1 else float("nan")
    pct = np.percentile(finite, PERCENTILES)
    counts, edges = np.histogram(finite, bins=HIST_BINS, range=(finite.min(), finite.max()))
    return BootstrapSummary(
        count=reps.B,
        nan_count=reps.nan_count,
        mean=float(np.mean(finite)),
        sd=sd,
        percentiles={q: float(v) for q, v in zip(PERCENTILES, pct)},
        hist_counts=counts,
        hist_edges=edges,
    )
