import numpy as np
import pytest

from delaystream.detectors import Decision
from delaystream.errors import ConfigurationError, ContractViolation
from delaystream.frameworks import (
    PROCESSORS, DelayPolicy, DelayQueue, due_labels, is_compatible, make_state, request_labels, run,
)
from delaystream.streams import StreamConfig, generate_stream


def idx(logs, attr):
    return [log.chunk_index for log in logs if getattr(log, attr)]


@pytest.fixture(scope="module")
def drift_free():
    return generate_stream(StreamConfig(n_chunks=200, n_drifts=0, seed=4))


# ------------------------------------------------------------------ queue


def test_request_due_arithmetic():
    q = request_labels(DelayQueue(), 5, DelayPolicy(delta=10))
    assert [(r.chunk_index, r.issued_at, r.due_at) for r in q.pending] == [(5, 5, 15)]
    q1 = request_labels(DelayQueue(), 5, DelayPolicy(delta=1))
    assert q1.pending[0].due_at == 6
    assert due_labels(q1, 5)[0] == []
    assert [r.chunk_index for r in due_labels(q1, 6)[0]] == [5]
    with pytest.raises(ContractViolation):
        request_labels(q, 5, DelayPolicy(delta=10))


def test_due_labels_fifo():
    q = DelayQueue()
    q.request(5, DelayPolicy(delta=10))
    assert due_labels(q, 14) == ([], q) and len(q) == 1
    delivered, q = due_labels(q, 15)
    assert [r.due_at for r in delivered] == [15] and len(q) == 0
    for i, d in ((0, 15), (1, 15), (2, 28)):
        q.request(i, DelayPolicy(delta=d))
    delivered, q = due_labels(q, 20)
    assert [(r.chunk_index, r.due_at) for r in delivered] == [(0, 15), (1, 16)]
    assert [r.due_at for r in q.pending] == [30]


def test_uniform_policy_bounds():
    rng = np.random.default_rng(0)
    pol = DelayPolicy("uniform", delta=0, low=3, high=7)
    q = DelayQueue()
    for i in range(200):
        q.request(i, pol, rng)
    gaps = {r.due_at - r.issued_at for r in q.pending}
    assert gaps == set(range(3, 8))
    with pytest.raises(ConfigurationError):
        DelayPolicy("uniform", low=5, high=2)
    with pytest.raises(ConfigurationError):
        DelayPolicy(delta=-1)


# ------------------------------------------------------------------ traces


def test_cr_trace_delta_1(default_stream):
    logs = run("CR", default_stream, "GNB", None, DelayPolicy(delta=1))
    assert len(logs) == 500
    assert all(log.label_requested for log in logs)
    assert idx(logs, "trained") == list(range(500))
    assert not any(log.cold_start for log in logs)


def test_cr_trace_delta_60(default_stream):
    logs = run("CR", default_stream, "GNB", None, DelayPolicy(delta=60))
    assert idx(logs, "trained") == [0] + list(range(60, 500))
    assert len(idx(logs, "trained")) == 441


def test_cr_trained_count_formula(short_stream):
    n = len(short_stream)
    for delta in (0, 1, 5, 60, 119, 130):
        logs = run("CR", short_stream, "GNB", None, DelayPolicy(delta=delta))
        # bootstrap + deliveries of requests 0..n-1-delta; at delta 0 chunk 0 is both
        expected = 1 + max(0, n - delta) - (delta == 0)
        assert sum(log.trained for log in logs) == expected


def test_tr_s_oracle_trace(default_stream):
    logs = run("TR_S", default_stream, "MLP", "ORACLE", DelayPolicy(delta=10))
    assert idx(logs, "trained") == [0, 60, 160, 260, 360, 460]
    assert idx(logs, "drift_detected") == [60, 160, 260, 360, 460]
    assert all(log.label_requested for log in logs)


def test_tr_s_needs_positive_delay(default_stream):
    with pytest.raises(ConfigurationError):
        run("TR_S", default_stream, "GNB", "ORACLE", DelayPolicy(delta=0))


def test_tr_s_missing_prediction_is_contract_violation(short_stream):
    state = make_state("TR_S", short_stream, "GNB", "ORACLE", DelayPolicy(delta=1))
    PROCESSORS["TR_S"](state, short_stream[0])
    state.predictions.clear()
    with pytest.raises(ContractViolation):
        PROCESSORS["TR_S"](state, short_stream[1])


def test_tr_u_oracle_trace(default_stream):
    logs = run("TR_U", default_stream, "GNB", "ORACLE", DelayPolicy(delta=1))
    assert idx(logs, "label_requested") == [0, 50, 150, 250, 350, 450]
    assert idx(logs, "trained") == [0, 51, 151, 251, 351, 451]
    assert idx(logs, "drift_detected") == [50, 150, 250, 350, 450]


def test_tr_u_drift_free(drift_free):
    logs = run("TR_U", drift_free, "GNB", "ORACLE", DelayPolicy(delta=1))
    assert idx(logs, "label_requested") == [0] and idx(logs, "trained") == [0]


def test_tr_p_oracle_traces(default_stream):
    logs = run("TR_P", default_stream, "GNB", "ORACLE", DelayPolicy(delta=10))
    assert idx(logs, "label_requested") == [50, 150, 250, 350, 450]
    assert idx(logs, "trained") == [0, 60, 160, 260, 360, 460]
    logs = run("TR_P", default_stream, "GNB", "ORACLE", DelayPolicy(delta=60))
    assert idx(logs, "label_requested")[:2] == [50, 150]
    assert idx(logs, "trained")[:3] == [0, 110, 210]


def test_tr_p_drift_free(drift_free):
    logs = run("TR_P", drift_free, "HT", "ORACLE", DelayPolicy(delta=5))
    assert idx(logs, "label_requested") == [] and idx(logs, "trained") == [0]


def test_tr_p_pending_gate_suppresses_detection():
    # drifts at 20, 60, 100 with delta 50: the drift at 60 falls in the pending window
    s = generate_stream(StreamConfig(n_chunks=120, n_drifts=3, seed=3))
    logs = run("TR_P", s, "GNB", "ORACLE", DelayPolicy(delta=50))
    assert idx(logs, "label_requested") == [20, 100]
    assert idx(logs, "trained") == [0, 70]


def test_tr_p_calibration_drift_requests_again(short_stream):
    state = make_state("TR_P", short_stream, "GNB", "ORACLE", DelayPolicy(delta=3))
    calls = []

    class Flaky:
        name = "ORACLE"

        def calibrate(self, X, y, chunk_index=None):
            calls.append(chunk_index)
            return Decision.DRIFT if chunk_index == 20 else Decision.STABLE

        def detect_unsupervised(self, X, chunk_index=None):
            return Decision.DRIFT if chunk_index == 20 else Decision.STABLE

    state.detector = Flaky()
    logs = run("TR_P", short_stream, state=state)
    assert calls[:3] == [0, 20, 23]
    assert idx(logs, "label_requested") == [20, 23]
    assert idx(logs, "trained") == [0, 23, 26]


@pytest.mark.parametrize("fw,det", [("TR_U", "DDM"), ("TR_S", "OCDD"), ("TR_P", "DDM"), ("CR", "ORACLE"),
                                    ("TR_S", None), ("XX", "DDM")])
def test_incompatible_pairs_rejected(default_stream, fw, det):
    assert not is_compatible(fw, det)
    with pytest.raises(ConfigurationError):
        run(fw, default_stream, "GNB", det)


def test_run_deterministic_and_reset_equivalent(short_stream):
    a = run("CR", short_stream, "MLP", None, DelayPolicy(delta=3), seed=5)
    b = run("CR", short_stream, "MLP", None, DelayPolicy(delta=3), seed=5)
    assert a == b
    from delaystream.classifiers import make_classifier
    clf = make_classifier("MLP", seed=5)
    clf.fit_incremental(short_stream[0].X, short_stream[0].y, epochs=4)
    clf.reset()
    c = run("CR", short_stream, clf, None, DelayPolicy(delta=3), seed=5)
    assert a == c


@pytest.mark.parametrize("fw,det", [("CR", None), ("TR_S", "DDM"), ("TR_S", "ORACLE"), ("TR_U", "OCDD"),
                                    ("TR_U", "ORACLE"), ("TR_P", "MD3"), ("TR_P", "ORACLE")])
@pytest.mark.parametrize("clf", ["GNB", "MLP", "HT"])
def test_log_invariants(short_stream, fw, det, clf):
    delta = 7
    state = make_state(fw, short_stream, clf, det, DelayPolicy(delta=delta), seed=1)
    logs = run(fw, short_stream, state=state)
    assert len(logs) == len(short_stream)
    assert all(0.0 <= log.bac <= 1.0 for log in logs)
    delivered_at = {now for j, now, purpose in state.labels.accesses if purpose != "bootstrap"}
    for log in logs:
        if log.trained:
            assert log.chunk_index == 0 or log.chunk_index in delivered_at
    n_req = sum(log.label_requested for log in logs)
    n_det = sum(log.drift_detected for log in logs)
    if fw in ("CR", "TR_S"):
        assert n_req == len(logs)
    elif fw == "TR_U":
        assert n_req == n_det + 1
    else:
        assert n_req == n_det
