"""Timing harness: sweeps over sample size N and replicate count B.

Each cell times replicate generation only (data is simulated beforehand and
no summary is computed inside the timed region). A cell runs ``warmups``
discarded runs followed by ``repeats`` timed runs and reports the median.
"""

from __future__ import annotations

import logging
import math
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .baseline import bootstrap_resample_loop
from .core import PairedSample, Sample, correlation_statistic, mean_statistic
from .engine import BootstrapConfig, bootstrap_correlation_vectorized, bootstrap_vectorized
from .sampling import RngSpec

log = logging.getLogger(__name__)

VECTORIZED = "vectorized"
BASELINE = "baseline-loop"
DIRICHLET = "dirichlet"
TIMING_METHODS = (VECTORIZED, BASELINE, DIRICHLET)

DEFAULT_NS = tuple(range(15, 916, 100))
DEFAULT_BS = (10_000, 100_000, 1_000_000)

# Stream reserved for simulated data so it never collides with a replicate block.
SIMULATION_STREAM = 1 << 32

# Speedups of vectorised over loop resampling published for an R
# implementation on the law school data; informational, never asserted.
REFERENCE_SPEEDUPS = {15: 50.0, 82: 8.0}


def simulate_pairs(n: int, rng: RngSpec) -> PairedSample:
    """z ~ N(0, 1), y = z + N(0, 1) noise; population correlation 1/sqrt(2)."""
    if n < 2:
        raise ValueError("need N >= 2")
    gen = rng.generator()
    z = gen.standard_normal(n)
    y = z + gen.standard_normal(n)
    return PairedSample(z, y)


@dataclass
class TimingRecord:
    method: str
    N: int
    B: int
    seconds: float
    repeats: int
    seconds_all: list[float] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class SweepSpec:
    Ns: list[int]
    Bs: list[int]
    statistic: str = "correlation"
    repeats: int = 5
    warmups: int = 1
    master_seed: int = 0
    methods: tuple[str, ...] = (VECTORIZED, BASELINE)
    chunk_columns: int = 10_000

    def __post_init__(self):
        if not self.Ns or not self.Bs:
            raise ValueError("Ns and Bs must be nonempty")
        if min(self.Ns) < 2 or min(self.Bs) < 1:
            raise ValueError("Ns must be >= 2 and Bs >= 1")
        if self.repeats < 1 or self.warmups < 0:
            raise ValueError("repeats >= 1 and warmups >= 0 required")
        if self.statistic not in ("mean", "correlation"):
            raise ValueError(f"unsupported statistic {self.statistic!r}")
        for m in self.methods:
            if m not in TIMING_METHODS:
                raise ValueError(f"unknown timing method {m!r}")


def make_runner(method: str, statistic: str, data: PairedSample, cfg: BootstrapConfig) -> Callable[[], object]:
    """Zero-argument callable that generates one replicate vector."""
    if statistic == "correlation":
        sample, stat = data, correlation_statistic()
    else:
        sample, stat = Sample(data.z), mean_statistic()
    if method == BASELINE:
        return lambda: bootstrap_resample_loop(stat, sample, cfg)
    if method == DIRICHLET:
        cfg = BootstrapConfig(cfg.B, "dirichlet", cfg.master_seed, cfg.chunk_columns)
    if statistic == "correlation":
        return lambda: bootstrap_correlation_vectorized(sample, cfg)
    return lambda: bootstrap_vectorized(stat, sample, cfg)


def time_call(
    fn: Callable[[], object],
    repeats: int,
    warmups: int,
    timer: Callable[[], float] = time.perf_counter,
) -> list[float]:
    for _ in range(warmups):
        fn()
    out = []
    for _ in range(repeats):
        t0 = timer()
        fn()
        out.append(timer() - t0)
    return out


def run_sweep(
    spec: SweepSpec,
    timer: Callable[[], float] = time.perf_counter,
    runner_factory: Callable = make_runner,
) -> list[TimingRecord]:
    """Time every (N, B, method) cell in order; cells run strictly sequentially."""
    records = []
    for n in spec.Ns:
        data = simulate_pairs(n, RngSpec(spec.master_seed, SIMULATION_STREAM))
        for b in spec.Bs:
            cfg = BootstrapConfig(b, master_seed=spec.master_seed, chunk_columns=spec.chunk_columns)
            for method in spec.methods:
                try:
                    fn = runner_factory(method, spec.statistic, data, cfg)
                    times = time_call(fn, spec.repeats, spec.warmups, timer)
                except (MemoryError, ValueError, ArithmeticError) as exc:
                    log.warning("cell %s N=%d B=%d failed: %s", method, n, b, exc)
                    records.append(
                        TimingRecord(method, n, b, math.nan, spec.repeats, [], error=str(exc))
                    )
                    continue
                rec = TimingRecord(method, n, b, statistics.median(times), spec.repeats, times)
                log.info("%s N=%d B=%d median %.4fs", method, n, b, rec.seconds)
                records.append(rec)
    return records


@dataclass
class RatioRow:
    N: int
    B: int
    baseline_seconds: float
    vectorized_seconds: float
    ratio: float
    log_ratio: float
    flagged: bool = False
    reference: Optional[float] = None


def ratio_table(records: list[TimingRecord]) -> list[RatioRow]:
    """Baseline over vectorised time per (N, B) cell, in first-seen cell order."""
    cells: dict[tuple[int, int], dict[str, TimingRecord]] = {}
    for r in records:
        cells.setdefault((r.N, r.B), {})[r.method] = r
    rows = []
    for (n, b), by_method in cells.items():
        base = by_method.get(BASELINE)
        vec = by_method.get(VECTORIZED)
        ref = REFERENCE_SPEEDUPS.get(n)
        if base is None or vec is None or base.failed or vec.failed or vec.seconds <= 0:
            rows.append(
                RatioRow(
                    n, b,
                    base.seconds if base and not base.failed else math.nan,
                    vec.seconds if vec and not vec.failed else math.nan,
                    math.nan, math.nan, flagged=True, reference=ref,
                )
            )
            continue
        ratio = base.seconds / vec.seconds
        rows.append(RatioRow(n, b, base.seconds, vec.seconds, ratio, math.log(ratio), reference=ref))
    return rows


def linear_fit_r2(x, y) -> tuple[float, float, float]:
    """Least-squares line through (x, y); returns slope, intercept, R^2."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2
