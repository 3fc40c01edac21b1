"""Delayed-label data stream processing frameworks and their evaluation."""

__version__ = "0.1.0"

from .classifiers import GaussianNB, HoeffdingTree, MLP, make_classifier
from .detectors import DDM, MD3, OCDD, Decision, Oracle, make_detector, oracle_make
from .errors import ConfigurationError, ContractViolation
from .evaluation import ExperimentConfig, GridSpec, SummaryRow, aggregate, default_grid, summarize
from .frameworks import ChunkLog, DelayPolicy, DelayQueue, due_labels, request_labels, run
from .metrics import balanced_accuracy
from .streams import Chunk, Stream, StreamConfig, chunk_at, drift_points, generate_stream

__all__ = [
    "Chunk", "ChunkLog", "ConfigurationError", "ContractViolation", "DDM", "Decision", "DelayPolicy",
    "DelayQueue", "ExperimentConfig", "GaussianNB", "GridSpec", "HoeffdingTree", "MD3", "MLP", "OCDD",
    "Oracle", "Stream", "StreamConfig", "SummaryRow", "aggregate", "balanced_accuracy", "chunk_at",
    "drift_points", "due_labels", "generate_stream", "make_classifier", "make_detector", "oracle_make",
    "default_grid", "request_labels", "run", "summarize",
]
