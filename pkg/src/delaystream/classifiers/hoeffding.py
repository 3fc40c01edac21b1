"""Hoeffding tree (VFDT) for numeric features with naive Bayes leaves."""

import math

import numpy as np
from scipy.special import ndtr

from ..moments import RunningMoments
from .base import IncrementalClassifier
from .naive_bayes import naive_bayes_score

# Range of the information-gain criterion for two classes: log2(2).
GAIN_RANGE = 1.0


def hoeffding_bound(value_range, confidence, n):
    """Deviation ``sqrt(R^2 ln(1/delta) / (2n))`` of an n-sample mean of a range-R variable."""
    return math.sqrt(value_range * value_range * math.log(1.0 / confidence) / (2.0 * n))


def entropy(counts, axis=0):
    """Base-2 entropy of class counts along ``axis``; empty distributions give 0."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum(axis=axis, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / total, 0.0)
        terms = np.where(p > 0, -p * np.log2(p), 0.0)
    return terms.sum(axis=axis)


class _ClassStats:
    """Per-class Gaussian summaries of the samples that reached one leaf."""

    __slots__ = ("moments",)

    def __init__(self, n_features):
        self.moments = (RunningMoments(n_features), RunningMoments(n_features))

    def update(self, X, y):
        for c in (0, 1):
            self.moments[c].update(X[y == c])

    @property
    def counts(self):
        return np.array([m.count for m in self.moments], dtype=float)

    @property
    def n_seen(self):
        return self.moments[0].count + self.moments[1].count

    def is_pure(self):
        return self.moments[0].count == 0 or self.moments[1].count == 0

    def score(self, X):
        means = [m.mean for m in self.moments]
        var = np.stack([m.var for m in self.moments])
        floor = max(1e-9 * float(var.max()), 1e-12)
        return naive_bayes_score(X, self.counts, means, np.maximum(var, floor))


class _Node:
    __slots__ = ("stats", "feature", "threshold", "left", "right", "last_eval", "fallback")

    def __init__(self, n_features, fallback=None):
        self.stats = _ClassStats(n_features)
        self.feature = None
        self.threshold = None
        self.left = None
        self.right = None
        self.last_eval = 0
        # statistics used for prediction while this leaf has seen nothing
        self.fallback = fallback

    @property
    def is_leaf(self):
        return self.feature is None


class HoeffdingTree(IncrementalClassifier):
    """Very Fast Decision Tree with Gaussian split estimators.

    Every ``grace_period`` samples a leaf scores ``n_split_points`` candidate
    thresholds per feature by information gain, estimated from per-class
    Gaussian summaries. It splits on the best feature when the gain gap to the
    runner-up (or to not splitting) exceeds the Hoeffding bound, or when the
    bound itself drops below ``tie_threshold``. The tree never restructures.
    Leaves predict with naive Bayes over their own statistics.
    """

    kind = "HT"

    def __init__(self, grace_period=200, split_confidence=1e-7, tie_threshold=0.05,
                 n_split_points=10, min_branch_fraction=0.01, seed=0):
        self.grace_period = grace_period
        self.split_confidence = split_confidence
        self.tie_threshold = tie_threshold
        self.n_split_points = n_split_points
        self.min_branch_fraction = min_branch_fraction
        super().__init__(seed=seed)

    def get_params(self):
        return {
            "grace_period": self.grace_period, "split_confidence": self.split_confidence,
            "tie_threshold": self.tie_threshold, "n_split_points": self.n_split_points,
            "min_branch_fraction": self.min_branch_fraction, "seed": self.seed,
        }

    def _init_state(self):
        self.root_ = None
        self.n_split_attempts_ = 0
        self.n_splits_ = 0

    @property
    def n_leaves(self):
        return sum(1 for _ in self._leaves())

    def _leaves(self):
        stack = [self.root_] if self.root_ is not None else []
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.extend((node.left, node.right))

    def _route(self, X, idx, node):
        """Yield (leaf, row indices) pairs; indices keep their original order."""
        stack = [(node, idx)]
        while stack:
            node, idx = stack.pop()
            if node.is_leaf:
                yield node, idx
                continue
            go_left = X[idx, node.feature] <= node.threshold
            stack.append((node.right, idx[~go_left]))
            stack.append((node.left, idx[go_left]))

    def _fit(self, X, y, epochs):
        if self.root_ is None:
            self.root_ = _Node(X.shape[1])
        work = [(self.root_, np.arange(len(X)))]
        while work:
            node, idx = work.pop()
            for leaf, leaf_idx in self._route(X, idx, node):
                rest = self._learn_leaf(leaf, X, y, leaf_idx)
                if rest is not None:
                    work.append((leaf, rest))

    def _learn_leaf(self, leaf, X, y, idx):
        """Absorb samples in grace-period segments; return leftovers if the leaf split."""
        pos = 0
        while pos < len(idx):
            need = self.grace_period - (leaf.stats.n_seen - leaf.last_eval)
            take = idx[pos:pos + max(need, 1)]
            leaf.stats.update(X[take], y[take])
            pos += len(take)
            if leaf.stats.n_seen - leaf.last_eval >= self.grace_period:
                leaf.last_eval = leaf.stats.n_seen
                if not leaf.stats.is_pure() and self._attempt_split(leaf):
                    return idx[pos:]
        return None

    def split_merits(self, stats):
        """Best information gain and threshold per feature for a leaf.

        Returns:
            (merits, thresholds), each of shape (n_features,). Features with no
            admissible split get merit ``-inf``.
        """
        counts = stats.counts
        present = [c for c in (0, 1) if counts[c] > 0]
        lo = np.min([stats.moments[c].min for c in present], axis=0)
        hi = np.max([stats.moments[c].max for c in present], axis=0)
        fractions = np.arange(1, self.n_split_points + 1) / (self.n_split_points + 1)
        thresholds = lo[:, None] + (hi - lo)[:, None] * fractions  # (F, T)

        left = np.zeros((2,) + thresholds.shape)
        for c in present:
            m = stats.moments[c]
            sd = np.sqrt(m.var)[:, None]
            mean = m.mean[:, None]
            with np.errstate(divide="ignore", invalid="ignore"):
                cdf = np.where(sd > 0, ndtr((thresholds - mean) / sd), (thresholds >= mean).astype(float))
            w = counts[c] * cdf
            w = np.where(thresholds < m.min[:, None], 0.0, w)
            w = np.where(thresholds >= m.max[:, None], counts[c], w)
            left[c] = w
        right = counts[:, None, None] - left
        total = counts.sum()
        n_left = left.sum(axis=0)
        n_right = right.sum(axis=0)
        gain = entropy(counts) - (n_left * entropy(left) + n_right * entropy(right)) / total
        admissible = np.minimum(n_left, n_right) >= self.min_branch_fraction * total
        gain = np.where(admissible, gain, -np.inf)
        best = np.argmax(gain, axis=1)
        rows = np.arange(len(best))
        return gain[rows, best], thresholds[rows, best]

    def _attempt_split(self, leaf):
        self.n_split_attempts_ += 1
        stats = leaf.stats
        merits, thresholds = self.split_merits(stats)
        # Not splitting is always a candidate with zero gain.
        order = np.argsort(-merits, kind="stable")
        best_feature = int(order[0])
        best = merits[best_feature]
        second = max(merits[order[1]] if len(order) > 1 else -np.inf, 0.0)
        if not best > 0.0:
            return False
        eps = hoeffding_bound(GAIN_RANGE, self.split_confidence, stats.n_seen)
        if not (best - second > eps or eps < self.tie_threshold):
            return False
        assert stats.n_seen >= self.grace_period
        assert best - second > eps or eps < self.tie_threshold
        n_features = len(merits)
        leaf.feature = best_feature
        leaf.threshold = float(thresholds[best_feature])
        leaf.left = _Node(n_features, fallback=stats)
        leaf.right = _Node(n_features, fallback=stats)
        self.n_splits_ += 1
        return True

    def _score(self, X):
        scores = np.empty(len(X))
        for leaf, idx in self._route(X, np.arange(len(X)), self.root_):
            if len(idx) == 0:
                continue
            stats = leaf.stats if leaf.stats.n_seen > 0 else leaf.fallback
            scores[idx] = stats.score(X[idx])
        return scores
