"""Walker/Vose alias table for O(1) draws from a finite discrete law."""

from __future__ import annotations

import numpy as np


class AliasTable:
    """Sample indices ``0..m-1`` with probability proportional to ``weights``."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        total = w.sum()
        if total <= 0:
            raise ValueError("weights must not all be zero")
        m = w.size
        scaled = (w / total) * m
        prob = np.ones(m)
        alias = np.arange(m)
        small = [i for i in range(m) if scaled[i] < 1.0]
        large = [i for i in range(m) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            (small if scaled[g] < 1.0 else large).append(g)
        # leftovers are 1 up to round-off
        self.prob = prob
        self.alias = alias
        self.probabilities = w / total

    def __len__(self):
        return self.prob.size

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        cols = rng.integers(0, self.prob.size, size=size)
        keep = rng.random(size) < self.prob[cols]
        return np.where(keep, cols, self.alias[cols])

    def implied_probabilities(self) -> np.ndarray:
        """Exact law encoded by the table (for checking)."""
        m = self.prob.size
        p = self.prob / m
        np.add.at(p, self.alias, (1.0 - self.prob) / m)
        return p
