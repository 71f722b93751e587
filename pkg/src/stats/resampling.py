from typing import Callable, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.stats import bootstrap

from src.config import settings
from src.exceptions import InvalidInputError, UndefinedStatisticError


class MetricSummary(BaseModel):
    """Point estimate with a percentile bootstrap confidence interval."""

    model_config = ConfigDict(frozen=True)

    estimate: float
    ci_low: float
    ci_high: float
    replicates: int
    level: float
    n: int

    @model_validator(mode="after")
    def _ordered(self) -> "MetricSummary":
        if self.ci_low > self.ci_high:
            raise ValueError("ci_low must not exceed ci_high")
        return self


def bootstrap_ci(values, statistic: Callable[[np.ndarray], float] = np.mean,
                 B: int = settings.BOOTSTRAP_REPLICATES, level: float = settings.CONFIDENCE_LEVEL,
                 seed: int = settings.DEFAULT_SEED) -> MetricSummary:
    """
    Percentile bootstrap CI of a statistic.

    values is resampled with replacement along its first axis, so rows may
    carry several columns (e.g. score and label). Resampling runs through
    scipy.stats.bootstrap on case indices; replicates on which the statistic
    is undefined are dropped before the percentiles are taken.

    Args:
        values: Per-case values, shape (n,) or (n, k)
        statistic: Function of a resampled array
        B: Number of bootstrap replicates
        level: Confidence level in (0, 1)
        seed: Seed of the resampling stream

    Returns:
        MetricSummary: Estimate on the full sample and the CI bounds
    """
    values = np.asarray(values)
    if values.shape[0] == 0:
        raise InvalidInputError("bootstrap needs at least one value")
    if B < 1 or not 0.0 < level < 1.0:
        raise InvalidInputError(f"need B >= 1 and 0 < level < 1, got B={B}, level={level}")

    n = values.shape[0]
    estimate = float(statistic(values))
    if n == 1:
        # Every resample of a single case is the case itself
        return MetricSummary(estimate=estimate, ci_low=estimate, ci_high=estimate, replicates=B, level=level, n=n)

    def on_indices(indices: np.ndarray) -> float:
        try:
            return float(statistic(values[np.asarray(indices, dtype=np.intp)]))
        except UndefinedStatisticError:
            return np.nan

    result = bootstrap((np.arange(n),), on_indices, n_resamples=B, confidence_level=level,
                       method="percentile", vectorized=False, random_state=np.random.default_rng(seed))
    distribution = np.asarray(result.bootstrap_distribution, dtype=np.float64)
    replicates = distribution[np.isfinite(distribution)]
    if replicates.size == 0:
        raise UndefinedStatisticError("statistic undefined on every bootstrap replicate")

    tail = (1.0 - level) / 2.0
    low, high = np.quantile(replicates, [tail, 1.0 - tail])
    return MetricSummary(estimate=estimate, ci_low=float(low), ci_high=float(high),
                         replicates=int(replicates.size), level=level, n=n)


def kfold_splits(n_cases: int, k: int = 5, seed: Optional[int] = None) -> List[np.ndarray]:
    """k disjoint test folds over range(n_cases), sizes differing by at most one."""
    if k < 1 or n_cases < k:
        raise InvalidInputError(f"need 1 <= k <= n_cases, got k={k}, n_cases={n_cases}")
    order = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed).permutation(n_cases)
    return [np.sort(fold) for fold in np.array_split(order, k)]
