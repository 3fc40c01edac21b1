"""Drift detectors grouped by the labels they need.

* supervised (:class:`DDM`) compares delivered labels with stored predictions;
* unsupervised (:class:`OCDD`) looks at features only;
* partially unsupervised (:class:`MD3`) looks at features, but after each
  detection it must be recalibrated with labels before it can detect again;
* :class:`Oracle` knows the ground-truth drift chunks of a synthetic stream and
  can stand in for any of the three.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolation


class Decision(enum.IntEnum):
    STABLE = 0
    WARNING = 1
    DRIFT = 2


SUPERVISED = "supervised"
UNSUPERVISED = "unsupervised"
PARTIAL = "partial"
ORACLE = "oracle"


# --------------------------------------------------------------------------- DDM


@dataclass
class DdmState:
    n: int = 0
    errors: int = 0
    p_min: float = math.inf
    s_min: float = math.inf

    @property
    def p(self):
        return self.errors / self.n if self.n else 0.0

    @property
    def s(self):
        p = self.p
        return math.sqrt(p * (1.0 - p) / self.n) if self.n else 0.0


def ddm_step(state: DdmState, error_bit: int, min_samples: int = 30,
             warning_level: float = 2.0, drift_level: float = 3.0):
    """Feed one prediction error bit to DDM.

    Returns the updated state and the decision for this sample. After a drift the
    state starts over from scratch.
    """
    n = state.n + 1
    errors = state.errors + int(error_bit)
    new = DdmState(n, errors, state.p_min, state.s_min)
    if n < min_samples:
        return new, Decision.STABLE
    p, s = new.p, new.s
    if p + s < new.p_min + new.s_min:
        new.p_min, new.s_min = p, s
    if p + s > new.p_min + drift_level * new.s_min:
        return DdmState(), Decision.DRIFT
    if p + s > new.p_min + warning_level * new.s_min:
        return new, Decision.WARNING
    return new, Decision.STABLE


class DDM:
    """Drift Detection Method on the stream of per-sample prediction errors.

    The error rate ``p`` and its deviation ``s = sqrt(p(1-p)/n)`` are tracked
    together with the point where ``p + s`` was smallest. Drift is signalled
    when ``p + s`` exceeds ``p_min + 3 s_min`` (warning at 2), after at least
    ``min_samples`` samples.
    """

    taxonomy = SUPERVISED
    name = "DDM"

    def __init__(self, min_samples=30, warning_level=2.0, drift_level=3.0):
        self.min_samples = min_samples
        self.warning_level = warning_level
        self.drift_level = drift_level
        self.state = DdmState()
        self.n_detections = 0

    def update(self, error_bit):
        self.state, decision = ddm_step(
            self.state, error_bit, self.min_samples, self.warning_level, self.drift_level
        )
        if decision is Decision.DRIFT:
            self.n_detections += 1
        return decision

    def update_many(self, error_bits):
        """Fold a sequence of error bits; return the strongest decision seen.

        Vectorised between resets, and equivalent to calling :meth:`update` on
        every bit in turn.
        """
        bits = np.asarray(error_bits, dtype=np.int64)
        strongest = Decision.STABLE
        while len(bits):
            st = self.state
            n = st.n + np.arange(1, len(bits) + 1)
            errors = st.errors + np.cumsum(bits)
            p = errors / n
            s = np.sqrt(p * (1.0 - p) / n)
            valid = n >= self.min_samples
            level = np.where(valid, p + s, np.inf)
            prev_best = np.minimum.accumulate(np.concatenate(([st.p_min + st.s_min], level[:-1])))
            improved = valid & (level < prev_best)
            last = np.maximum.accumulate(np.where(improved, np.arange(len(bits)), -1))
            has_new = last >= 0
            safe = np.maximum(last, 0)
            p_min = np.where(has_new, p[safe], st.p_min)
            s_min = np.where(has_new, s[safe], st.s_min)
            drift = valid & (level > p_min + self.drift_level * s_min)
            warn = valid & (level > p_min + self.warning_level * s_min)
            hits = np.flatnonzero(drift)
            if len(hits) == 0:
                if warn.any():
                    strongest = max(strongest, Decision.WARNING)
                k = len(bits) - 1
                self.state = DdmState(int(n[k]), int(errors[k]), float(p_min[k]), float(s_min[k]))
                break
            t = int(hits[0])
            if warn[:t].any():
                strongest = max(strongest, Decision.WARNING)
            strongest = Decision.DRIFT
            self.n_detections += 1
            self.state = DdmState()
            bits = bits[t + 1:]
        return strongest

    def detect_supervised(self, X, y, y_pred, chunk_index=None):
        y = np.asarray(y)
        y_pred = np.asarray(y_pred)
        if len(y) != len(y_pred) or len(y) != len(X):
            raise ValueError(
                f"misaligned inputs: X has {len(X)} rows, y {len(y)}, y_pred {len(y_pred)}"
            )
        return self.update_many(y != y_pred)


# -------------------------------------------------------------------------- OCDD


class QuantileEnvelope:
    """One-class model: standardized Euclidean distance to the reference mean.

    A sample is an outlier when its distance exceeds the empirical ``1 - nu``
    quantile of the reference distances.
    """

    def __init__(self, nu=0.1):
        self.nu = nu
        self.mean_ = self.scale_ = self.threshold_ = None

    def fit(self, X):
        X = np.asarray(X, dtype=float)
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.scale_ = np.where(std > 0, std, 1.0)
        self.threshold_ = float(np.quantile(self.distance(X), 1.0 - self.nu))
        return self

    def distance(self, X):
        return np.sqrt((((np.asarray(X, dtype=float) - self.mean_) / self.scale_) ** 2).sum(axis=1))

    def is_outlier(self, X):
        return self.distance(X) > self.threshold_


class OCDD:
    """One-class drift detection over whole chunks.

    The novelty model is fitted on a reference chunk. A chunk whose outlier
    fraction exceeds ``rho`` signals drift and becomes the new reference, so the
    detector recalibrates without labels. The first chunk seen only sets the
    reference.

    Args:
        nu: expected outlier fraction of the reference under its own model.
        rho: outlier fraction that signals drift.
        novelty_factory: callable ``nu -> model`` with ``fit`` and
            ``is_outlier``; defaults to :class:`QuantileEnvelope`.
    """

    taxonomy = UNSUPERVISED
    name = "OCDD"

    def __init__(self, nu=0.1, rho=0.3, novelty_factory=None):
        if not 0 < nu < 1 or not 0 < rho < 1:
            raise ConfigurationError(f"OCDD needs nu, rho in (0, 1), got nu={nu}, rho={rho}")
        self.nu = nu
        self.rho = rho
        self.novelty_factory = novelty_factory or QuantileEnvelope
        self.model = None
        self.reference = None
        self.last_outlier_fraction = None
        self.n_detections = 0

    def set_reference(self, X):
        self.reference = np.asarray(X, dtype=float)
        self.model = self.novelty_factory(self.nu).fit(self.reference)

    def outlier_fraction(self, X):
        return float(np.mean(self.model.is_outlier(X)))

    def detect_unsupervised(self, X, chunk_index=None):
        if self.model is None:
            self.set_reference(X)
            return Decision.STABLE
        self.last_outlier_fraction = self.outlier_fraction(X)
        if self.last_outlier_fraction > self.rho:
            self.set_reference(X)
            self.n_detections += 1
            return Decision.DRIFT
        return Decision.STABLE


# --------------------------------------------------------------------------- MD3


def train_hinge(X, y, epochs=50, learning_rate=0.1, l2=0.01):
    """Linear soft-margin model by full-batch subgradient descent on the hinge loss.

    Args:
        X: standardized features.
        y: labels in {0, 1}.

    Returns:
        (w, b) of the decision function ``X @ w + b``.
    """
    t = np.where(np.asarray(y) > 0, 1.0, -1.0)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    for _ in range(epochs):
        active = t * (X @ w + b) < 1.0
        grad_w = l2 * w - (t[active, None] * X[active]).sum(axis=0) / n
        grad_b = -t[active].sum() / n
        w -= learning_rate * grad_w
        b -= learning_rate * grad_b
    return w, b


@dataclass
class Md3State:
    mean: np.ndarray = None
    scale: np.ndarray = None
    w: np.ndarray = None
    b: float = 0.0
    md_ref: float = None
    sigma_ref: float = None
    awaiting_labels: bool = True


class MD3:
    """Margin density drift detection with a linear hinge-loss model.

    Margin density is the fraction of samples with ``|w.x + b| <= 1`` after the
    standardization learned at calibration. Calibration on labelled data fits
    the model and sets ``MD_ref`` (the density of the calibration batch) and
    ``sigma_ref`` (the spread of densities over ``n_windows`` sub-windows).
    Unsupervised detection signals drift when
    ``|MD - MD_ref| > sensitivity * sigma_ref``. It then waits for labels and
    refuses to detect until recalibrated.

    A new detector starts in the waiting state, so its first call must be
    :meth:`calibrate`.
    """

    taxonomy = PARTIAL
    name = "MD3"

    def __init__(self, sensitivity=3.0, n_windows=5, epochs=50, learning_rate=0.1, l2=0.01):
        self.sensitivity = sensitivity
        self.n_windows = n_windows
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.l2 = l2
        self.state = Md3State()
        self.last_margin_density = None
        self.n_detections = 0

    @property
    def awaiting_labels(self):
        return self.state.awaiting_labels

    def margin_density(self, X):
        st = self.state
        Z = (np.asarray(X, dtype=float) - st.mean) / st.scale
        return float(np.mean(np.abs(Z @ st.w + st.b) <= 1.0))

    def calibrate(self, X, y, chunk_index=None):
        """Refit on delivered labels and reset the reference density.

        Returns:
            DRIFT if the refitted margin model cannot separate the labelled batch
            better than chance (balanced accuracy below 0.5); otherwise STABLE.
        """
        if not self.state.awaiting_labels:
            raise ContractViolation("MD3.calibrate called while not awaiting labels")
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        if len(X) != len(y):
            raise ValueError(f"misaligned inputs: X has {len(X)} rows, y has {len(y)}")
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        scale = np.where(std > 0, std, 1.0)
        w, b = train_hinge((X - mean) / scale, y, self.epochs, self.learning_rate, self.l2)
        self.state = Md3State(mean, scale, w, b, awaiting_labels=False)

        windows = np.array_split(np.arange(len(X)), self.n_windows)
        densities = [self.margin_density(X[idx]) for idx in windows if len(idx)]
        self.state.md_ref = self.margin_density(X)
        self.state.sigma_ref = float(np.std(densities, ddof=1)) if len(densities) > 1 else 0.0

        pred = ((X - mean) / scale @ w + b) > 0
        recalls = [np.mean(pred[y == c] == c) for c in (0, 1) if np.any(y == c)]
        if np.mean(recalls) < 0.5:
            self.state.awaiting_labels = True
            self.n_detections += 1
            return Decision.DRIFT
        return Decision.STABLE

    def detect_unsupervised(self, X, chunk_index=None):
        st = self.state
        if st.awaiting_labels:
            raise ContractViolation("MD3 cannot detect while awaiting labels")
        self.last_margin_density = self.margin_density(X)
        if abs(self.last_margin_density - st.md_ref) > self.sensitivity * st.sigma_ref:
            st.awaiting_labels = True
            self.n_detections += 1
            return Decision.DRIFT
        return Decision.STABLE


# ------------------------------------------------------------------------ Oracle


@dataclass
class OracleState:
    drift_chunks: frozenset
    last_concept: int = 0


class Oracle:
    """Detector that fires exactly at the ground-truth drift chunks.

    It answers about whichever chunk index it is asked about: the current chunk
    for feature-only detection, the delivered (past) chunk for label-based
    detection. Calibration is a no-op.
    """

    taxonomy = ORACLE
    name = "ORACLE"

    def __init__(self, drift_chunks):
        points = [int(d) for d in drift_chunks]
        if len(set(points)) != len(points):
            raise ConfigurationError(f"duplicate drift chunks in {points}")
        self.state = OracleState(frozenset(points))
        self.n_detections = 0

    def _answer(self, chunk_index):
        if chunk_index is None:
            raise ValueError("Oracle needs the chunk index")
        if chunk_index in self.state.drift_chunks:
            self.state.last_concept = sum(1 for d in self.state.drift_chunks if d <= chunk_index)
            self.n_detections += 1
            return Decision.DRIFT
        return Decision.STABLE

    def detect_supervised(self, X, y, y_pred, chunk_index=None):
        return self._answer(chunk_index)

    def detect_unsupervised(self, X, chunk_index=None):
        return self._answer(chunk_index)

    def calibrate(self, X, y, chunk_index=None):
        return Decision.STABLE

    @property
    def awaiting_labels(self):
        return False


def oracle_make(drift_points):
    return Oracle(drift_points)


DETECTORS = {"DDM": DDM, "OCDD": OCDD, "MD3": MD3}


def make_detector(kind, drift_chunks=(), **params):
    """Build a fresh detector; ``drift_chunks`` is only used by the Oracle."""
    if kind == "ORACLE":
        return Oracle(drift_chunks)
    try:
        cls = DETECTORS[kind]
    except KeyError:
        raise ConfigurationError(
            f"unknown detector {kind!r}; expected one of {sorted(DETECTORS) + ['ORACLE']}"
        ) from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad hyperparameters for {kind}: {exc}") from None
