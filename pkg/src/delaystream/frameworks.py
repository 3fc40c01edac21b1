"""Chunk-processing frameworks under delayed labels.

Four state machines share one delayed-label queue:

``CR``    continuous rebuild: request labels every chunk and train on every
          delivery.
``TR_S``  triggered rebuild, supervised detector: request every chunk, run the
          detector on each delivered chunk against the predictions stored for
          it, and train only on a detection.
``TR_U``  triggered rebuild, unsupervised detector: detect on the current
          features and request labels only on a detection; train on delivery.
``TR_P``  triggered rebuild, partially unsupervised detector: like TR_U, but
          while a request is pending the detector is blind. On delivery the
          classifier is trained and the detector recalibrated.

Every chunk is predicted. Chunk 0 is always trained on its own labels. This
bootstrap counts as a label request except under TR_P.

Training and detection read labels only through :class:`LabelSource`, after
the queue has delivered them. Evaluation reads ``chunk.y`` directly and never
feeds it back.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifiers import IncrementalClassifier, make_classifier
from .detectors import ORACLE, PARTIAL, SUPERVISED, UNSUPERVISED, Decision, make_detector
from .errors import ConfigurationError, ContractViolation
from .metrics import balanced_accuracy
from .streams import Chunk, Stream

FRAMEWORKS = ("CR", "TR_S", "TR_U", "TR_P")

#: Detector taxonomy branches each framework accepts; CR takes no detector.
COMPATIBLE_DETECTORS = {
    "CR": frozenset(),
    "TR_S": frozenset({SUPERVISED, ORACLE}),
    "TR_U": frozenset({UNSUPERVISED, ORACLE}),
    "TR_P": frozenset({PARTIAL, ORACLE}),
}

DETECTOR_TAXONOMY = {"DDM": SUPERVISED, "OCDD": UNSUPERVISED, "MD3": PARTIAL, "ORACLE": ORACLE}

#: Epochs per classifier fit. The MLP honours them; GNB and HT are single-pass.
DEFAULT_EPOCHS = {"CR": 1, "TR_S": 50, "TR_U": 50, "TR_P": 50}


def is_compatible(framework, detector):
    """Whether ``detector`` (a name or None) may drive ``framework``."""
    if framework not in COMPATIBLE_DETECTORS:
        return False
    if detector in (None, "none"):
        return framework == "CR"
    return DETECTOR_TAXONOMY.get(detector) in COMPATIBLE_DETECTORS[framework]


def check_pairing(framework, detector):
    if framework not in COMPATIBLE_DETECTORS:
        raise ConfigurationError(f"unknown framework {framework!r}; expected one of {FRAMEWORKS}")
    if detector not in (None, "none") and detector not in DETECTOR_TAXONOMY:
        raise ConfigurationError(f"unknown detector {detector!r}")
    if not is_compatible(framework, detector):
        raise ConfigurationError(f"detector {detector!r} cannot drive framework {framework!r}")


# ----------------------------------------------------------------- delay queue


@dataclass(frozen=True)
class DelayPolicy:
    """How many chunks pass between a label request and its delivery.

    ``constant`` delays by exactly ``delta``; ``uniform`` draws an integer delay
    from ``[low, high]`` per request.
    """

    kind: str = "constant"
    delta: int = 1
    low: int | None = None
    high: int | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "uniform"):
            raise ConfigurationError(f"delay kind must be 'constant' or 'uniform', got {self.kind!r}")
        if int(self.delta) < 0:
            raise ConfigurationError(f"delta must be non-negative, got {self.delta}")
        if self.kind == "uniform":
            if self.low is None or self.high is None or not 0 <= self.low <= self.high:
                raise ConfigurationError(
                    f"uniform delay needs 0 <= low <= high, got low={self.low}, high={self.high}"
                )

    @property
    def min_delay(self):
        return int(self.delta) if self.kind == "constant" else int(self.low)

    def draw(self, rng=None):
        if self.kind == "constant":
            return int(self.delta)
        return int(rng.integers(self.low, self.high + 1))


@dataclass(frozen=True)
class LabelRequest:
    chunk_index: int
    issued_at: int
    due_at: int


class DelayQueue:
    """Pending label requests, kept in issue order."""

    def __init__(self):
        self.pending: list[LabelRequest] = []
        self.requested: set[int] = set()

    def __len__(self):
        return len(self.pending)

    def request(self, chunk_index, policy: DelayPolicy, rng=None, issued_at=None):
        if chunk_index in self.requested:
            raise ContractViolation(f"labels for chunk {chunk_index} were already requested")
        issued_at = chunk_index if issued_at is None else issued_at
        req = LabelRequest(chunk_index, issued_at, issued_at + policy.draw(rng))
        self.requested.add(chunk_index)
        self.pending.append(req)
        return req

    def due(self, now):
        """Remove and return every request with ``due_at <= now``, in issue order."""
        delivered = [r for r in self.pending if r.due_at <= now]
        if delivered:
            self.pending = [r for r in self.pending if r.due_at > now]
        return delivered


def request_labels(queue: DelayQueue, i, policy: DelayPolicy, rng=None):
    queue.request(i, policy, rng)
    return queue


def due_labels(queue: DelayQueue, now):
    return queue.due(now), queue


class LabelSource:
    """The only path from the stream's labels to training and detection.

    Every read is logged as ``(chunk_index, now, purpose)`` so a run can be
    audited for label causality.
    """

    def __init__(self, stream: Stream):
        self._stream = stream
        self.accesses: list[tuple[int, int, str]] = []

    def fetch(self, chunk_index, now, purpose):
        self.accesses.append((chunk_index, now, purpose))
        return self._stream.chunks[chunk_index].y


# ----------------------------------------------------------------- run state


@dataclass(frozen=True)
class ChunkLog:
    chunk_index: int
    bac: float
    label_requested: bool
    trained: bool
    drift_detected: bool
    cold_start: bool
    pending_requests: int
    warning: bool = False


@dataclass
class FrameworkState:
    framework: str
    stream: Stream
    classifier: IncrementalClassifier
    detector: object = None
    policy: DelayPolicy = field(default_factory=DelayPolicy)
    epochs: int = 1
    rng: np.random.Generator = None
    queue: DelayQueue = field(default_factory=DelayQueue)
    labels: LabelSource = None
    predictions: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.labels is None:
            self.labels = LabelSource(self.stream)

    def request(self, i):
        self.queue.request(i, self.policy, self.rng)

    def fit(self, j, now, purpose="fit"):
        y = self.labels.fetch(j, now, purpose)
        X = self.stream.chunks[j].X
        self.classifier.fit_incremental(X, y, epochs=self.epochs)
        return X, y


def _finish(state: FrameworkState, chunk: Chunk, requested, trained, drift, warning=False):
    cold = not state.classifier.is_fitted
    y_pred = state.classifier.predict(chunk.X)
    log = ChunkLog(
        chunk_index=chunk.index,
        bac=balanced_accuracy(chunk.y, y_pred),
        label_requested=requested,
        trained=trained,
        drift_detected=drift,
        cold_start=cold,
        pending_requests=len(state.queue),
        warning=warning,
    )
    return y_pred, log


def process_chunk_cr(state: FrameworkState, chunk: Chunk):
    """Continuous rebuild step. Returns ``(predictions, ChunkLog)``; state is updated in place."""
    i = chunk.index
    state.request(i)
    trained = False
    if i == 0:
        state.fit(0, 0, "bootstrap")
        trained = True
    for req in state.queue.due(i):
        state.fit(req.chunk_index, i)
        trained = True
    return _finish(state, chunk, True, trained, False)


def process_chunk_tr_s(state: FrameworkState, chunk: Chunk):
    """Triggered rebuild with a supervised detector, consulted once per delivered chunk."""
    i = chunk.index
    state.request(i)
    trained = drift = warning = False
    if i == 0:
        state.fit(0, 0, "bootstrap")
        trained = True
    for req in state.queue.due(i):
        j = req.chunk_index
        try:
            y_stored = state.predictions.pop(j)
        except KeyError:
            raise ContractViolation(f"no stored predictions for delivered chunk {j}") from None
        X_j = state.stream.chunks[j].X
        y_j = state.labels.fetch(j, i, "detect")
        decision = state.detector.detect_supervised(X_j, y_j, y_stored, chunk_index=j)
        warning |= decision is Decision.WARNING
        if decision is Decision.DRIFT:
            drift = True
            state.classifier.fit_incremental(X_j, y_j, epochs=state.epochs)
            trained = True
    y_pred, log = _finish(state, chunk, True, trained, drift, warning)
    state.predictions[i] = y_pred
    return y_pred, log


def process_chunk_tr_u(state: FrameworkState, chunk: Chunk):
    """Triggered rebuild with an unsupervised detector run on every chunk's features."""
    i = chunk.index
    requested = trained = False
    if i == 0:
        # bootstrap labels are handed over at once, not queued
        state.queue.requested.add(0)
        state.fit(0, 0, "bootstrap")
        requested = trained = True
    drift = state.detector.detect_unsupervised(chunk.X, chunk_index=i) is Decision.DRIFT
    if drift and not requested:
        state.request(i)
        requested = True
    for req in state.queue.due(i):
        state.fit(req.chunk_index, i)
        trained = True
    return _finish(state, chunk, requested, trained, drift)


def process_chunk_tr_p(state: FrameworkState, chunk: Chunk):
    """Triggered rebuild with a partially unsupervised detector.

    While a request is pending the detector does not run at all. On delivery the
    classifier is trained first, then the detector is recalibrated with the
    same labels. If recalibration still reports drift, labels for the current
    chunk are requested.
    """
    i = chunk.index
    requested = trained = drift = False
    if i == 0:
        _, y0 = state.fit(0, 0, "bootstrap")
        state.detector.calibrate(chunk.X, y0, chunk_index=0)
        trained = True
    elif len(state.queue):
        for req in state.queue.due(i):
            X_j, y_j = state.fit(req.chunk_index, i)
            trained = True
            if state.detector.calibrate(X_j, y_j, chunk_index=req.chunk_index) is Decision.DRIFT:
                drift = True
                if not requested:
                    state.request(i)
                    requested = True
    elif state.detector.detect_unsupervised(chunk.X, chunk_index=i) is Decision.DRIFT:
        drift = True
        state.request(i)
        requested = True
    return _finish(state, chunk, requested, trained, drift)


PROCESSORS = {
    "CR": process_chunk_cr,
    "TR_S": process_chunk_tr_s,
    "TR_U": process_chunk_tr_u,
    "TR_P": process_chunk_tr_p,
}


def make_state(framework, stream, classifier="GNB", detector=None, policy=None, seed=0,
               classifier_params=None, detector_params=None, epochs=None):
    """Validate a framework/detector pairing and build the initial run state."""
    detector_name = detector if isinstance(detector, (str, type(None))) else detector.name
    check_pairing(framework, detector_name)
    policy = policy or DelayPolicy()
    if framework == "TR_S" and policy.min_delay < 1:
        raise ConfigurationError("TR_S needs a delay of at least one chunk to compare stored predictions")
    if isinstance(classifier, str):
        classifier = make_classifier(classifier, seed=seed, **(classifier_params or {}))
    if isinstance(detector, str) and detector != "none":
        detector = make_detector(detector, drift_chunks=stream.drift_chunks, **(detector_params or {}))
    elif detector == "none":
        detector = None
    if epochs is None:
        n_epochs = DEFAULT_EPOCHS[framework]
    elif isinstance(epochs, dict):
        n_epochs = int(epochs.get(framework, DEFAULT_EPOCHS[framework]))
    else:
        n_epochs = int(epochs)
    delay_rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(2,)))
    return FrameworkState(
        framework=framework,
        stream=stream,
        classifier=classifier,
        detector=detector,
        policy=policy,
        epochs=n_epochs,
        rng=delay_rng,
    )


def run(framework, stream, classifier="GNB", detector=None, policy=None, seed=0,
        classifier_params=None, detector_params=None, epochs=None, state=None):
    """Process a whole stream and return one :class:`ChunkLog` per chunk.

    Args:
        framework: one of ``FRAMEWORKS``.
        stream: the stream to process.
        classifier: "GNB", "MLP", "HT" or a fresh classifier instance.
        detector: "DDM", "OCDD", "MD3", "ORACLE", None, or a detector instance.
        policy: label delay policy; defaults to a constant delay of 1.
        seed: seeds the classifier and any random delay draws.
        epochs: override the per-framework epoch rule (int or dict).
        state: a prepared :class:`FrameworkState` (e.g. to inspect the label
            audit afterwards); other arguments are then ignored.
    """
    if state is None:
        state = make_state(framework, stream, classifier, detector, policy, seed,
                           classifier_params, detector_params, epochs)
    step = PROCESSORS[state.framework]
    return [step(state, chunk)[1] for chunk in state.stream.chunks]
