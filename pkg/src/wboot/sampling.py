"""Bootstrap weight generation: multinomial counts and Dirichlet(1, ..., 1) weights.

Randomness comes from numpy's counter-based Philox generator keyed by
``(master_seed, stream_index)`` through a ``SeedSequence`` spawn key, so a
stream can be rebuilt anywhere without touching global state.

Matrices are ``(N, B)``: one row per data point, one column per replicate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AnySample

# Largest single N x B float64/int64 matrix we are willing to allocate.
DEFAULT_MAX_BYTES = 1 << 30
MAX_SEED = (1 << 64) - 1


class CapacityError(MemoryError):
    """Requested matrix would exceed the memory budget."""


class CountConsistencyError(ValueError):
    """Count vector does not describe a size-N resample."""


@dataclass(frozen=True)
class RngSpec:
    master_seed: int = 0
    stream_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= MAX_SEED:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.stream_index < 0:
            raise ValueError("stream_index must be nonnegative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True, eq=False)
class CountMatrix:
    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 2 or not np.issubdtype(c.dtype, np.integer):
            raise ValueError("counts must be a 2-d integer array")
        if np.any(c < 0):
            raise ValueError("counts must be nonnegative")
        if np.any(c.sum(axis=0) != c.shape[0]):
            raise CountConsistencyError("every column of a count matrix must sum to N")
        object.__setattr__(self, "counts", c)

    @property
    def N(self) -> int:
        return self.counts.shape[0]

    @property
    def B(self) -> int:
        return self.counts.shape[1]


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    weights: np.ndarray
    source: str = "multinomial"

    @property
    def N(self) -> int:
        return self.weights.shape[0]

    @property
    def B(self) -> int:
        return self.weights.shape[1]


def check_capacity(n: int, b: int, max_bytes: int = DEFAULT_MAX_BYTES) -> None:
    need = 8 * n * b
    if need > max_bytes:
        raise CapacityError(
            f"an {n} x {b} matrix needs {need} bytes (budget {max_bytes}); "
            "use the chunked engine with a smaller chunk"
        )


def _check_dims(n: int, b: int) -> None:
    if n < 1 or b < 1:
        raise ValueError(f"N and B must be positive, got N={n}, B={b}")


def multinomial_counts(n: int, b: int, gen: np.random.Generator) -> np.ndarray:
    """Draw ``b`` uniform Multinomial(n, 1/n) count vectors as an (n, b) array.

    Conditional binomial decomposition: category i receives
    Binomial(remaining, 1/(n - i)) of the trials not yet assigned, and the
    last category takes whatever is left.
    """
    out = np.empty((n, b), dtype=np.int64)
    remaining = np.full(b, n, dtype=np.int64)
    for i in range(n - 1):
        out[i] = gen.binomial(remaining, 1.0 / (n - i))
        remaining -= out[i]
    out[n - 1] = remaining
    return out


def sample_multinomial_counts(
    n: int, b: int, rng: RngSpec, max_bytes: int = DEFAULT_MAX_BYTES
) -> CountMatrix:
    _check_dims(n, b)
    check_capacity(n, b, max_bytes)
    return CountMatrix(multinomial_counts(n, b, rng.generator()))


def counts_to_weights(counts: CountMatrix) -> WeightMatrix:
    return WeightMatrix(counts.counts / counts.N, source="multinomial")


def dirichlet_weights(n: int, b: int, gen: np.random.Generator) -> np.ndarray:
    e = gen.standard_exponential((n, b))
    return e / e.sum(axis=0)


def sample_dirichlet_weights(
    n: int, b: int, rng: RngSpec, max_bytes: int = DEFAULT_MAX_BYTES
) -> WeightMatrix:
    _check_dims(n, b)
    check_capacity(n, b, max_bytes)
    return WeightMatrix(dirichlet_weights(n, b, rng.generator()), source="dirichlet")


def expand_counts_to_resample(sample: AnySample, counts_column) -> AnySample:
    """Materialise the resample in which point i appears ``counts_column[i]`` times."""
    c = np.asarray(counts_column)
    if c.shape != (sample.N,):
        raise CountConsistencyError(
            f"count vector has shape {c.shape}, sample has N={sample.N}"
        )
    if np.any(c < 0) or int(c.sum()) != sample.N:
        raise CountConsistencyError(f"counts must be nonnegative and sum to {sample.N}")
    return expand_unchecked(sample, c)


def expand_unchecked(sample: AnySample, counts_column: np.ndarray, index=None) -> AnySample:
    """``expand_counts_to_resample`` for columns of an already validated CountMatrix."""
    if index is None:
        index = np.arange(sample.N)
    return sample.take(np.repeat(index, counts_column))
