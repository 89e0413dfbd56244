"""Empirical distributions, Wasserstein-1 distance and tail diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_K_FRAC = 0.025


class EmpiricalDistribution:
    """Sorted sample with the usual empirical summaries."""

    def __init__(self, samples):
        x = np.sort(np.asarray(samples, dtype=float).ravel())
        if x.size == 0:
            raise ValueError("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(x)):
            raise ValueError("samples must be finite")
        x.setflags(write=False)
        self.sorted_samples = x

    @property
    def count(self) -> int:
        return self.sorted_samples.size

    def __len__(self):
        return self.count

    def __repr__(self):
        return f"EmpiricalDistribution(count={self.count}, mean={self.mean():.6g})"

    def mean(self) -> float:
        return float(self.sorted_samples.mean())

    def std_error(self) -> float:
        if self.count < 2:
            return math.inf
        return float(self.sorted_samples.std(ddof=1) / math.sqrt(self.count))

    def cdf(self, x) -> np.ndarray:
        return np.searchsorted(self.sorted_samples, x, side="right") / self.count

    def survival(self, x) -> np.ndarray:
        """Empirical ``P(X > x)``."""
        return (self.count - np.searchsorted(self.sorted_samples, x, side="right")) / self.count

    def quantile(self, p) -> np.ndarray:
        """Left-continuous inverse of the empirical CDF."""
        return np.quantile(self.sorted_samples, p, method="inverted_cdf")

    def shifted(self, t: float) -> "EmpiricalDistribution":
        return EmpiricalDistribution(self.sorted_samples + t)

    def scaled(self, s: float) -> "EmpiricalDistribution":
        return EmpiricalDistribution(self.sorted_samples * s)


def as_distribution(x) -> EmpiricalDistribution:
    return x if isinstance(x, EmpiricalDistribution) else EmpiricalDistribution(x)


def wasserstein1(a, b) -> float:
    """Exact ``int |F_a - F_b| dx`` for two empirical distributions."""
    a, b = as_distribution(a), as_distribution(b)
    xa, xb = a.sorted_samples, b.sorted_samples
    if a.count == b.count:
        return float(np.mean(np.abs(xa - xb)))
    grid = np.union1d(xa, xb)
    if grid.size < 2:
        return 0.0
    fa = np.searchsorted(xa, grid[:-1], side="right") / a.count
    fb = np.searchsorted(xb, grid[:-1], side="right") / b.count
    return float(np.sum(np.abs(fa - fb) * np.diff(grid)))


@dataclass
class TailReport:
    hill_index: float
    k_used: int
    ratio_curve: list[tuple[float, float]] = field(default_factory=list)


def default_k(count: int, k_frac: float = DEFAULT_K_FRAC) -> int:
    return min(max(1, math.ceil(k_frac * count)), count - 1)


def hill_index(d, k: int | None = None) -> TailReport:
    """Hill estimator of the tail index from the ``k`` largest order statistics.

    ``alpha_hat = k / sum_{i=1..k} log(x_(n-i+1) / x_(n-k))``
    """
    d = as_distribution(d)
    n = d.count
    if k is None:
        k = default_k(n)
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < count ({n}), got {k}")
    x = d.sorted_samples
    top = x[n - k :]
    threshold = x[n - k - 1]
    if threshold <= 0:
        raise ValueError("Hill estimator needs strictly positive samples in the top-k window")
    spacing = np.sum(np.log(top / threshold))
    if spacing <= 0:
        raise ValueError("top-k samples are all equal to the threshold; tail index undefined")
    return TailReport(float(k / spacing), int(k))


def tail_ratio(sample, reference, quantile_grid) -> list[tuple[float, float]]:
    """For each ``p``: ``x`` = reference ``(1-p)``-quantile and ``P(sample > x) / p``."""
    sample, reference = as_distribution(sample), as_distribution(reference)
    curve = []
    for p in quantile_grid:
        if not 0 < p < 0.5:
            raise ValueError(f"grid probabilities must lie in (0, 0.5), got {p}")
        x = float(reference.quantile(1 - p))
        curve.append((x, float(sample.survival(x)) / p))
    return curve


def tail_report(sample, reference=None, quantile_grid=(0.1, 0.01, 0.001), k: int | None = None) -> TailReport:
    report = hill_index(sample, k)
    if reference is not None:
        report.ratio_curve = tail_ratio(sample, reference, quantile_grid)
    return report
