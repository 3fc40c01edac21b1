"""Running per-feature mean/variance accumulators (Welford / Chan batch merge)."""

import numpy as np


class RunningMoments:
    """Per-feature count, mean, sum of squared deviations, min and max.

    ``update`` merges a whole batch at once using the pairwise formula of Chan et
    al., which gives the same moments as sample-by-sample Welford updates up to
    rounding.
    """

    __slots__ = ("count", "mean", "m2", "min", "max")

    def __init__(self, n_features):
        self.count = 0
        self.mean = np.zeros(n_features)
        self.m2 = np.zeros(n_features)
        self.min = np.full(n_features, np.inf)
        self.max = np.full(n_features, -np.inf)

    def update(self, X):
        n_b = X.shape[0]
        if n_b == 0:
            return self
        mean_b = X.mean(axis=0)
        m2_b = ((X - mean_b) ** 2).sum(axis=0)
        n = self.count + n_b
        delta = mean_b - self.mean
        self.mean = self.mean + delta * (n_b / n)
        self.m2 = self.m2 + m2_b + delta**2 * (self.count * n_b / n)
        self.count = n
        self.min = np.minimum(self.min, X.min(axis=0))
        self.max = np.maximum(self.max, X.max(axis=0))
        return self

    @property
    def var(self):
        """Population variance (``m2 / count``); zeros before the first sample."""
        if self.count == 0:
            return np.zeros_like(self.m2)
        return self.m2 / self.count

    def copy(self):
        other = RunningMoments.__new__(RunningMoments)
        other.count = self.count
        other.mean = self.mean.copy()
        other.m2 = self.m2.copy()
        other.min = self.min.copy()
        other.max = self.max.copy()
        return other
