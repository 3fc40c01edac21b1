import numpy as np
from scipy.special import expit

from ..moments import RunningMoments
from .base import IncrementalClassifier


def gaussian_log_likelihood(X, mean, var):
    """Sum over features of the Gaussian log-density, one value per row."""
    return -0.5 * (np.log(2.0 * np.pi * var).sum() + (((X - mean) ** 2) / var).sum(axis=1))


def naive_bayes_score(X, counts, means, variances):
    """P(y=1 | x) for a two-class Gaussian naive Bayes with the given moments.

    A class with zero count gets zero prior; with only one class seen the score
    is constant.
    """
    if counts[0] == 0 or counts[1] == 0:
        return np.full(len(X), 1.0 if counts[1] > 0 else 0.0)
    total = counts[0] + counts[1]
    jll0 = np.log(counts[0] / total) + gaussian_log_likelihood(X, means[0], variances[0])
    jll1 = np.log(counts[1] / total) + gaussian_log_likelihood(X, means[1], variances[1])
    return expit(jll1 - jll0)


class GaussianNB(IncrementalClassifier):
    """Gaussian naive Bayes with exact incremental class-conditional moments."""

    kind = "GNB"

    def __init__(self, var_smoothing=1e-9, seed=0):
        self.var_smoothing = var_smoothing
        super().__init__(seed=seed)

    def get_params(self):
        return {"var_smoothing": self.var_smoothing, "seed": self.seed}

    def _init_state(self):
        self._class_moments = None
        self._overall = None

    def _fit(self, X, y, epochs):
        if self._class_moments is None:
            self._class_moments = [RunningMoments(X.shape[1]) for _ in range(2)]
            self._overall = RunningMoments(X.shape[1])
        for c in (0, 1):
            self._class_moments[c].update(X[y == c])
        self._overall.update(X)

    @property
    def class_count_(self):
        return np.array([m.count for m in self._class_moments])

    @property
    def class_prior_(self):
        counts = self.class_count_
        return counts / counts.sum()

    @property
    def theta_(self):
        """Per-class feature means, shape (2, n_features)."""
        return np.stack([m.mean for m in self._class_moments])

    @property
    def raw_var_(self):
        """Per-class population variances before flooring."""
        return np.stack([m.var for m in self._class_moments])

    @property
    def variance_floor_(self):
        return self.var_smoothing * float(np.max(self._overall.var))

    @property
    def var_(self):
        return np.maximum(self.raw_var_, self.variance_floor_)

    def _score(self, X):
        var = self.var_
        if not np.all(var > 0):
            # all features constant so far
            var = np.where(var > 0, var, 1e-300)
        return naive_bayes_score(X, self.class_count_, self.theta_, var)
