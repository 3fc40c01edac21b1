"""Synthetic chunked binary-classification streams with known drift moments.

Each concept is a pair of Gaussian blobs in an informative subspace. The
informative block is rotated by a per-concept orthogonal matrix, stretched by a
per-concept permutation of fixed axis scales, and padded with pure-noise
features. A drift swaps in a freshly drawn concept, so the ground truth of every
drift is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError

DRIFT_DYNAMICS = ("sudden", "gradual")

#: Distance between the two class centroids of every concept.
CENTROID_SEPARATION = 2.0

#: Range of the per-axis scales applied after rotation. Every concept uses a
#: permutation of the same log-spaced set, so a drift always changes feature
#: scales without a net contraction of the informative block.
AXIS_SCALE_RANGE = (0.5, 2.0)

# ln(19): logistic argument where the mixing probability reaches 95%.
_LOGIT_95 = float(np.log(19.0))


@dataclass(frozen=True)
class StreamConfig:
    """Parameters of a synthetic stream. Defaults give the 500-chunk reference stream."""

    n_chunks: int = 500
    chunk_size: int = 250
    n_features: int = 20
    n_informative: int = 15
    n_drifts: int = 5
    drift_dynamic: str = "sudden"
    gradual_width: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("n_chunks", "chunk_size", "n_features", "n_informative"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.n_drifts, (int, np.integer)) or self.n_drifts < 0:
            raise ConfigurationError(f"n_drifts must be a non-negative integer, got {self.n_drifts!r}")
        if self.n_informative > self.n_features:
            raise ConfigurationError(
                f"n_informative ({self.n_informative}) exceeds n_features ({self.n_features})"
            )
        if self.n_drifts >= self.n_chunks:
            raise ConfigurationError(
                f"n_drifts ({self.n_drifts}) must be smaller than n_chunks ({self.n_chunks})"
            )
        if self.drift_dynamic not in DRIFT_DYNAMICS:
            raise ConfigurationError(
                f"drift_dynamic must be one of {DRIFT_DYNAMICS}, got {self.drift_dynamic!r}"
            )
        if self.gradual_width < 0:
            raise ConfigurationError(f"gradual_width must be >= 0, got {self.gradual_width!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError(f"seed must fit in 64 unsigned bits, got {self.seed!r}")

    def to_dict(self) -> dict:
        return {
            "n_chunks": int(self.n_chunks),
            "chunk_size": int(self.chunk_size),
            "n_features": int(self.n_features),
            "n_informative": int(self.n_informative),
            "n_drifts": int(self.n_drifts),
            "drift_dynamic": self.drift_dynamic,
            "gradual_width": float(self.gradual_width),
            "seed": int(self.seed),
        }


@dataclass(frozen=True)
class Concept:
    class_centroids: np.ndarray  # (2, n_informative)
    dispersion: np.ndarray  # (2,)
    projection: np.ndarray  # (n_informative, n_informative): rotation times axis scales
    noise_scale: float = 1.0

    def sample(self, rng: np.random.Generator, y: np.ndarray, n_features: int) -> np.ndarray:
        """Draw one feature row per label in ``y``."""
        k = self.class_centroids.shape[1]
        z = self.class_centroids[y] + self.dispersion[y, None] * rng.standard_normal((len(y), k))
        noise = self.noise_scale * rng.standard_normal((len(y), n_features - k))
        return np.hstack([z @ self.projection, noise])


@dataclass(frozen=True, eq=False)
class Chunk:
    index: int
    X: np.ndarray
    y: np.ndarray
    concept_id: int
    # Per-sample concept assignment; differs from concept_id only inside gradual windows.
    sample_concepts: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True, eq=False)
class Stream:
    config: StreamConfig
    chunks: tuple
    drift_chunks: tuple
    concepts: tuple = field(repr=False, default=())

    def __len__(self):
        return len(self.chunks)

    def __getitem__(self, i):
        return chunk_at(self, i)

    def __iter__(self):
        return iter(self.chunks)


def drift_points(config: StreamConfig) -> list[int]:
    """Chunk indices at which a new concept starts.

    Drifts sit in the middle of ``n_drifts`` equal segments:
    ``round((2k + 1) * n_chunks / (2 * n_drifts))``.

    >>> drift_points(StreamConfig(n_chunks=500, n_drifts=5))
    [50, 150, 250, 350, 450]
    """
    n, k = int(config.n_chunks), int(config.n_drifts)
    points = []
    for j in range(k):
        # round-half-even on exact integers
        q, r = divmod((2 * j + 1) * n, 2 * k)
        if 2 * r > 2 * k or (2 * r == 2 * k and q % 2):
            q += 1
        points.append(q)
    return points


def _make_concept(rng: np.random.Generator, n_informative: int) -> Concept:
    a, b = rng.uniform(-1.0, 1.0, size=(2, n_informative))
    mid = 0.5 * (a + b)
    direction = b - a
    direction /= np.linalg.norm(direction)
    half = 0.5 * CENTROID_SEPARATION * direction
    q, r = np.linalg.qr(rng.standard_normal((n_informative, n_informative)))
    q *= np.sign(np.diag(r))
    scales = rng.permutation(np.geomspace(*AXIS_SCALE_RANGE, n_informative))
    return Concept(
        class_centroids=np.stack([mid - half, mid + half]),
        dispersion=np.ones(2),
        projection=q * scales,
    )


def _new_concept_probability(config: StreamConfig, drifts: Sequence[int], i: int) -> np.ndarray:
    """Probability that a sample of chunk ``i`` already follows concept k+1, per drift k."""
    d = np.asarray(drifts, dtype=float)
    step = (i >= d).astype(float)
    width = float(config.gradual_width)
    if config.drift_dynamic == "sudden" or width == 0:
        return step
    slope = width / (2.0 * _LOGIT_95)
    p = 1.0 / (1.0 + np.exp(-(i - d) / slope))
    inside = np.abs(i - d) <= width / 2.0
    return np.where(inside, p, step)


def _seed_sequence(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=key)


def generate_stream(config: StreamConfig) -> Stream:
    """Synthesize the whole stream described by ``config``.

    Generation is a pure function of the config: concepts come from one seeded
    substream and every chunk from its own, so equal configs give bit-identical
    streams.
    """
    drifts = drift_points(config)
    concept_rng = np.random.default_rng(_seed_sequence(config.seed, 0))
    concepts = tuple(_make_concept(concept_rng, config.n_informative) for _ in range(len(drifts) + 1))

    n = int(config.chunk_size)
    base_labels = np.zeros(n, dtype=np.int64)
    base_labels[n // 2 :] = 1

    chunks = []
    for i in range(config.n_chunks):
        rng = np.random.default_rng(_seed_sequence(config.seed, 1, i))
        y = rng.permutation(base_labels)
        p_new = _new_concept_probability(config, drifts, i)
        if config.drift_dynamic == "gradual" and np.any((p_new > 0) & (p_new < 1)):
            # p_new decreases with k, so one uniform per sample gives nested assignments.
            u = rng.random(n)
            sample_concepts = (u[:, None] < p_new[None, :]).sum(axis=1)
        else:
            sample_concepts = np.full(n, int(p_new.sum()), dtype=np.int64)
        X = np.empty((n, config.n_features))
        for c in np.unique(sample_concepts):
            mask = sample_concepts == c
            X[mask] = concepts[c].sample(rng, y[mask], config.n_features)
        concept_id = sum(1 for d in drifts if d <= i)
        X.setflags(write=False)
        y.setflags(write=False)
        chunks.append(Chunk(i, X, y, concept_id, sample_concepts))
    return Stream(config, tuple(chunks), tuple(drifts), concepts)


def chunk_at(stream: Stream, i: int) -> Chunk:
    if not 0 <= i < len(stream.chunks):
        raise IndexError(f"chunk index {i} out of range [0, {len(stream.chunks)})")
    return stream.chunks[i]
