"""Incremental binary base learners."""

from ..errors import ConfigurationError
from .base import IncrementalClassifier
from .hoeffding import HoeffdingTree, hoeffding_bound
from .mlp import MLP
from .naive_bayes import GaussianNB

CLASSIFIERS = {"GNB": GaussianNB, "MLP": MLP, "HT": HoeffdingTree}


def make_classifier(kind, seed=0, **params):
    """Build a fresh classifier of ``kind`` ("GNB", "MLP" or "HT")."""
    try:
        cls = CLASSIFIERS[kind]
    except KeyError:
        raise ConfigurationError(f"unknown classifier {kind!r}; expected one of {sorted(CLASSIFIERS)}") from None
    try:
        return cls(seed=seed, **params)
    except TypeError as exc:
        raise ConfigurationError(f"bad hyperparameters for {kind}: {exc}") from None


__all__ = [
    "CLASSIFIERS", "GaussianNB", "HoeffdingTree", "IncrementalClassifier", "MLP",
    "hoeffding_bound", "make_classifier",
]
