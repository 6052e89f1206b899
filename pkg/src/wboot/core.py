"""Domain types and weighted evaluation of moment-based statistics.

A moment statistic is a combiner ``g`` applied to weighted transform sums
``m_j = sum_i w_i f_j(x_i)``. Transforms are *not* pre-divided by N; the
weight vector carries the normalisation (uniform weights give 1/N).

Transforms receive the sample's columns as separate arrays (``f(x)`` for a
univariate sample, ``f(z, y)`` for a paired one) and must return an array of
length N. Combiners receive the k moments as positional arguments and must
work element-wise on arrays so that the engine can evaluate a whole chunk of
replicates at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

# Absolute floor below which a weighted variance counts as zero.
VARIANCE_FLOOR = 1e-300
# Relative floor: a variance smaller than this fraction of the raw second
# moment is indistinguishable from rounding noise in ``m2 - m1**2``.
RELATIVE_VARIANCE_FLOOR = 1e-12
WEIGHT_SUM_TOL = 1e-12


class DimensionError(ValueError):
    """Array lengths do not agree."""


class UndefinedStatisticError(ArithmeticError):
    """The combiner has no finite value for the given weights."""


def _as_finite_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Sample:
    """Univariate observed data ``x = (x_1, ..., x_N)``."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_finite_vector(self.values, "values")
        if arr.size < 1:
            raise ValueError("a sample needs at least one observation")
        object.__setattr__(self, "values", arr)

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def columns(self) -> tuple[np.ndarray, ...]:
        return (self.values,)

    def take(self, index: np.ndarray) -> "Sample":
        """Sub/resample by index; entries are already validated."""
        out = object.__new__(Sample)
        object.__setattr__(out, "values", _frozen(self.values[index]))
        return out


@dataclass(frozen=True, eq=False)
class PairedSample:
    """Paired observations ``(z_i, y_i)``."""

    z: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        z = _as_finite_vector(self.z, "z")
        y = _as_finite_vector(self.y, "y")
        if z.size != y.size:
            raise DimensionError(f"z has length {z.size} but y has length {y.size}")
        if z.size < 2:
            raise ValueError("a paired sample needs at least two observations")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "y", y)

    @property
    def N(self) -> int:
        return self.z.size

    @property
    def columns(self) -> tuple[np.ndarray, ...]:
        return (self.z, self.y)

    def take(self, index: np.ndarray) -> "PairedSample":
        out = object.__new__(PairedSample)
        object.__setattr__(out, "z", _frozen(self.z[index]))
        object.__setattr__(out, "y", _frozen(self.y[index]))
        return out


AnySample = Union[Sample, PairedSample]


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Nonnegative weights summing to one."""

    w: np.ndarray

    def __post_init__(self):
        w = _as_finite_vector(self.w, "w")
        if w.size < 1:
            raise ValueError("weight vector is empty")
        if np.any(w < 0) or np.any(w > 1):
            raise ValueError("weights must lie in [0, 1]")
        total = float(np.sum(w))
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "w", w)

    @property
    def N(self) -> int:
        return self.w.size

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def from_counts(cls, counts) -> "WeightVector":
        counts = np.asarray(counts)
        return cls(counts / counts.sum())


Transform = Callable[..., np.ndarray]
Combiner = Callable[..., np.ndarray]


@dataclass(frozen=True)
class MomentStatistic:
    transforms: tuple[Transform, ...]
    combiner: Combiner
    name: str = "statistic"
    paired: bool = field(default=False)

    def __post_init__(self):
        object.__setattr__(self, "transforms", tuple(self.transforms))
        if len(self.transforms) < 1:
            raise ValueError("a moment statistic needs at least one transform")

    @property
    def k(self) -> int:
        return len(self.transforms)

    def transform_matrix(self, sample: AnySample) -> np.ndarray:
        """Apply every transform to the data once; returns a (k, N) array."""
        if self.paired != isinstance(sample, PairedSample):
            kind = "paired" if self.paired else "univariate"
            raise TypeError(f"{self.name} expects a {kind} sample")
        cols = sample.columns
        rows = []
        for f in self.transforms:
            row = np.asarray(f(*cols), dtype=np.float64)
            if row.shape != (sample.N,):
                raise DimensionError(
                    f"transform returned shape {row.shape}, expected ({sample.N},)"
                )
            rows.append(row)
        return np.vstack(rows)

    def combine(self, moments: np.ndarray) -> np.ndarray:
        """Apply the combiner column-wise to a (k, B) moment array."""
        return np.asarray(self.combiner(*moments), dtype=np.float64)


@dataclass
class ReplicationVector:
    values: np.ndarray
    nan_count: int = -1

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        bad = int(np.count_nonzero(~np.isfinite(self.values)))
        if self.nan_count < 0:
            self.nan_count = bad
        elif self.nan_count != bad:
            raise ValueError(f"nan_count={self.nan_count} but {bad} non-finite values")

    @property
    def B(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size


def _weights_array(w, n: int) -> np.ndarray:
    arr = w.w if isinstance(w, WeightVector) else np.asarray(w, dtype=np.float64)
    if arr.shape != (n,):
        raise DimensionError(f"weights have shape {arr.shape}, sample has N={n}")
    return arr


def weighted_transform_sum(sample: AnySample, w, f: Transform = None) -> float:
    """``sum_i w_i f(x_i)``; the identity transform gives the weighted mean."""
    wa = _weights_array(w, sample.N)
    if f is None:
        if isinstance(sample, PairedSample):
            raise TypeError("paired samples need an explicit transform")
        row = sample.values
    else:
        row = np.asarray(f(*sample.columns), dtype=np.float64)
    return float(row @ wa)


def evaluate_statistic(stat: MomentStatistic, sample: AnySample, w) -> float:
    wa = _weights_array(w, sample.N)
    moments = stat.transform_matrix(sample) @ wa
    value = float(stat.combine(moments[:, None])[0])
    if not np.isfinite(value):
        raise UndefinedStatisticError(f"{stat.name} is undefined for these weights")
    return value


def plug_in_estimate(stat: MomentStatistic, sample: AnySample) -> float:
    return evaluate_statistic(stat, sample, WeightVector.uniform(sample.N))


def clamped_variance(m1, m2):
    """``m2 - m1**2`` clamped at 0, with rounding-level residue flushed to 0."""
    m1 = np.asarray(m1, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    var = np.maximum(m2 - m1 * m1, 0.0)
    noise = (var <= VARIANCE_FLOOR) | (var <= RELATIVE_VARIANCE_FLOOR * np.abs(m2))
    return np.where(noise, 0.0, var)


def correlation_from_moments(mz, my, mzz, myy, mzy):
    """Pearson correlation from weighted moments, element-wise.

    Entries whose weighted variance (in either coordinate) is zero come back
    as NaN. Finite results are clipped into [-1, 1].
    """
    vz = clamped_variance(mz, mzz)
    vy = clamped_variance(my, myy)
    cov = np.asarray(mzy, dtype=np.float64) - np.asarray(mz) * np.asarray(my)
    ok = (vz > 0.0) & (vy > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = cov / np.sqrt(vz * vy)
    return np.where(ok, np.clip(r, -1.0, 1.0), np.nan)


def central_shift(v: np.ndarray) -> np.ndarray:
    """Subtract the observation nearest the mean.

    Correlation is shift invariant; a central shift keeps the raw second
    moments close to the variances, limiting cancellation in ``m2 - m1**2``.
    Shifting by an actual observation maps constant data to exact zeros.
    """
    return v - v[np.argmin(np.abs(v - v.mean()))]


def correlation_rows(pair: PairedSample) -> np.ndarray:
    """The five transform rows (z, y, z^2, y^2, zy) of the shifted pair."""
    z = central_shift(pair.z)
    y = central_shift(pair.y)
    return np.vstack([z, y, z * z, y * y, z * y])


def weighted_correlation(pair: PairedSample, w) -> float:
    wa = _weights_array(w, pair.N)
    moments = correlation_rows(pair) @ wa
    r = float(correlation_from_moments(*moments))
    if np.isnan(r):
        raise UndefinedStatisticError("weighted variance is zero")
    return r


# --- stock statistics -------------------------------------------------------


def mean_statistic() -> MomentStatistic:
    return MomentStatistic((lambda x: x,), lambda m: m, name="mean")


def raw_moment_statistic(order: int) -> MomentStatistic:
    if order < 1:
        raise ValueError("moment order must be positive")
    return MomentStatistic(
        (lambda x: x**order,), lambda m: m, name=f"raw_moment_{order}"
    )


def variance_statistic() -> MomentStatistic:
    """Plug-in (divisor N) variance."""
    return MomentStatistic(
        (lambda x: x, lambda x: x * x), clamped_variance, name="variance"
    )


def correlation_statistic() -> MomentStatistic:
    return MomentStatistic(
        (
            lambda z, y: z,
            lambda z, y: y,
            lambda z, y: z * z,
            lambda z, y: y * y,
            lambda z, y: z * y,
        ),
        correlation_from_moments,
        name="correlation",
        paired=True,
    )


STATISTICS: dict[str, Callable[[], MomentStatistic]] = {
    "mean": mean_statistic,
    "variance": variance_statistic,
    "correlation": correlation_statistic,
}


def get_statistic(name: str) -> MomentStatistic:
    try:
        return STATISTICS[name]()
    except KeyError:
        raise ValueError(
            f"unknown statistic {name!r}; choose from {sorted(STATISTICS)}"
        ) from None

