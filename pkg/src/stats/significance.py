from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.stats import norm, permutation_test, rankdata

from src.config import settings
from src.exceptions import InvalidInputError, UndefinedStatisticError

# Largest n for the exact signed-rank null distribution
EXACT_WILCOXON_MAX_N = 20

# Largest n whose 2^n sign patterns are enumerated
EXACT_PERMUTATION_MAX_N = 20

# Sign patterns evaluated per call of the test statistic
PERMUTATION_BATCH = 2 ** 16

_TOLERANCE = 1e-12


@dataclass
class PairedScores:
    """Per-case scores of two models, model A first."""

    a: np.ndarray
    b: np.ndarray
    case_ids: Optional[List[str]] = field(default=None)

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.a.ndim != 1 or self.a.shape != self.b.shape:
            raise InvalidInputError("paired scores must be 1-D and of equal length")
        if self.a.size == 0:
            raise InvalidInputError("paired scores are empty")
        if not (np.isfinite(self.a).all() and np.isfinite(self.b).all()):
            raise InvalidInputError("paired scores must be finite")
        if self.case_ids is not None and len(self.case_ids) != self.a.size:
            raise InvalidInputError("case ids must match the number of pairs")

    @property
    def differences(self) -> np.ndarray:
        return self.a - self.b


def _exact_upper_tail(doubled_ranks: np.ndarray, observed: int) -> float:
    # Null distribution of the doubled positive-rank sum over all 2^n sign patterns
    counts = np.zeros(int(doubled_ranks.sum()) + 1, dtype=np.float64)
    counts[0] = 1.0
    for rank in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[rank:] = counts[:len(counts) - rank]
        counts = counts + shifted
    return float(counts[observed:].sum() / counts.sum())


def wilcoxon_one_sided(paired: PairedScores, exact: Optional[bool] = None) -> float:
    """
    One-sided Wilcoxon signed-rank test of A > B.

    Zero differences are dropped. Tied |d| share mid-ranks. Up to
    EXACT_WILCOXON_MAX_N pairs the p-value is P(W+ >= observed) under the
    exact sign-flip null; beyond that a normal approximation with tie and
    continuity correction is used.

    Args:
        paired: Per-case scores of the two models
        exact: Force the exact (True) or approximate (False) path

    Returns:
        float: One-sided p-value

    Raises:
        UndefinedStatisticError: All differences are zero
    """
    d = paired.differences
    d = d[d != 0]
    n = d.size
    if n == 0:
        raise UndefinedStatisticError("Wilcoxon test undefined: all differences are zero")

    ranks = rankdata(np.abs(d), method="average")
    w_plus = float(ranks[d > 0].sum())
    if exact is None:
        exact = n <= EXACT_WILCOXON_MAX_N

    if exact:
        # Mid-ranks are multiples of 1/2, so doubled ranks are integers
        doubled = np.rint(2 * ranks).astype(np.int64)
        return _exact_upper_tail(doubled, int(round(2 * w_plus)))

    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    mean = n * (n + 1) / 4.0
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_counts ** 3 - tie_counts) / 48.0
    z = (w_plus - mean - 0.5) / np.sqrt(variance)
    return float(norm.sf(z))


def _mean_difference(x: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.mean(x, axis=axis)


def _sign_flip_test(d: np.ndarray, n_resamples: int, rng: np.random.Generator):
    return permutation_test((d,), _mean_difference, permutation_type="samples", alternative="greater",
                            n_resamples=n_resamples, vectorized=True,
                            batch=min(n_resamples, PERMUTATION_BATCH), random_state=rng)


def paired_permutation_one_sided(paired: PairedScores, N: int = settings.PERMUTATIONS,
                                 seed: int = settings.DEFAULT_SEED,
                                 exhaustive: Optional[bool] = None) -> float:
    """
    One-sided sign-flip permutation test of A > B on the mean difference.

    With n <= EXACT_PERMUTATION_MAX_N and 2^n <= N every sign pattern is
    enumerated in batches (the observed one included) and p is the fraction
    at or above the observed mean. Otherwise N random sign patterns are
    drawn and p = (1 + count) / (N + 1).

    Raises:
        InvalidInputError: N < 1, or exhaustive enumeration forced beyond
            EXACT_PERMUTATION_MAX_N pairs
    """
    d = paired.differences
    n = d.size
    if N < 1:
        raise InvalidInputError("need at least one permutation")
    if exhaustive is None:
        exhaustive = n <= EXACT_PERMUTATION_MAX_N and 2 ** n <= N
    if exhaustive and n > EXACT_PERMUTATION_MAX_N:
        raise InvalidInputError(f"exhaustive enumeration is limited to {EXACT_PERMUTATION_MAX_N} pairs, got {n}")

    rng = np.random.default_rng(seed)
    if exhaustive:
        return float(_sign_flip_test(d, 2 ** n, rng).pvalue)
    if N < 2 ** n:
        return float(_sign_flip_test(d, N, rng).pvalue)

    # scipy switches to enumeration once N covers every pattern; keep N independent draws instead
    observed = d.mean()
    if n <= EXACT_PERMUTATION_MAX_N:
        null = _sign_flip_test(d, 2 ** n, rng).null_distribution
        draws = null[rng.integers(0, null.size, size=N)]
    else:
        chunks, remaining = [], N
        while remaining:
            size = min(remaining, 2 ** n - 1)
            chunks.append(_sign_flip_test(d, size, rng).null_distribution)
            remaining -= size
        draws = np.concatenate(chunks)
    count = int(np.sum(draws >= observed - _TOLERANCE * max(1.0, abs(observed))))
    return (1 + count) / (N + 1)
