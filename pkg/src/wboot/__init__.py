"""Vectorised non-parametric bootstrap for statistics built from sample moments.

Bootstrap replicates are computed by weighting the observed data with
multinomial counts (or Dirichlet weights) and taking matrix products, rather
than by evaluating the statistic on materialised resamples.
"""

from .baseline import bootstrap_resample_from_counts, bootstrap_resample_loop
from .core import (
    DimensionError,
    MomentStatistic,
    PairedSample,
    ReplicationVector,
    Sample,
    UndefinedStatisticError,
    WeightVector,
    correlation_statistic,
    evaluate_statistic,
    get_statistic,
    mean_statistic,
    plug_in_estimate,
    raw_moment_statistic,
    variance_statistic,
    weighted_correlation,
    weighted_transform_sum,
)
from .engine import (
    BootstrapConfig,
    EmptyDistributionError,
    bootstrap_correlation_vectorized,
    bootstrap_from_weights,
    bootstrap_summary,
    bootstrap_vectorized,
    correlation_from_weights,
)
from .sampling import (
    CapacityError,
    CountMatrix,
    RngSpec,
    WeightMatrix,
    counts_to_weights,
    expand_counts_to_resample,
    sample_dirichlet_weights,
    sample_multinomial_counts,
)

__version__ = "0.1.0"
