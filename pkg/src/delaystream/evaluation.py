"""Per-run summaries, replication aggregates and the experiment grid."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field, fields

from .frameworks import FRAMEWORKS, DelayPolicy, is_compatible
from .metrics import balanced_accuracy
from .streams import StreamConfig

CRITERIA = ("mean_bac", "label_request_fraction", "trained_fraction", "detections")
RUN_KEYS = ("framework", "detector", "classifier", "n_drifts", "delta", "seed")


@dataclass(frozen=True)
class SummaryRow:
    framework: str
    detector: str
    classifier: str
    n_drifts: int
    delta: int
    seed: int
    mean_bac: float
    label_request_fraction: float
    trained_fraction: float
    detections: int

    def as_dict(self):
        return asdict(self)


def summarize(logs, meta) -> SummaryRow:
    """Collapse one run's chunk logs into the three criteria plus a detection count.

    Args:
        logs: non-empty sequence of ChunkLog.
        meta: mapping (or object) with the run keys framework, detector,
            classifier, n_drifts, delta, seed.
    """
    if not logs:
        raise ValueError("cannot summarize an empty run")
    get = meta.get if isinstance(meta, dict) else lambda k: getattr(meta, k)
    n = len(logs)
    return SummaryRow(
        framework=get("framework"),
        detector=get("detector") or "none",
        classifier=get("classifier"),
        n_drifts=int(get("n_drifts")),
        delta=int(get("delta")),
        seed=int(get("seed")),
        mean_bac=math.fsum(log.bac for log in logs) / n,
        label_request_fraction=sum(log.label_requested for log in logs) / n,
        trained_fraction=sum(log.trained for log in logs) / n,
        detections=sum(log.drift_detected for log in logs),
    )


def _mean_std(values):
    n = len(values)
    # fsum is exactly rounded, so the result does not depend on row order
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    return mean, math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1))


def sort_key(row):
    """Total order on run keys: framework in canonical order, then the rest."""
    get = row.get if isinstance(row, dict) else lambda k: getattr(row, k)
    fw = get("framework")
    rank = FRAMEWORKS.index(fw) if fw in FRAMEWORKS else len(FRAMEWORKS)
    rest = [get(k) for k in RUN_KEYS[1:] if _has(row, k)]
    return (rank, fw, *rest)


def _has(row, key):
    return key in row if isinstance(row, dict) else hasattr(row, key)


def aggregate(rows, group_by=("framework", "detector", "classifier", "n_drifts", "delta")):
    """Mean and sample standard deviation of every criterion per group.

    Returns:
        A list of dicts, sorted by group key, holding the group fields, ``n``,
        and ``<criterion>_mean`` / ``<criterion>_std`` for each criterion.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to aggregate")
    group_by = tuple(group_by)
    if not group_by:
        raise ValueError("group_by must name at least one field")
    valid = {f.name for f in fields(SummaryRow)}
    unknown = [g for g in group_by if g not in valid]
    if unknown:
        raise ValueError(f"unknown grouping fields {unknown}")
    groups = {}
    for row in rows:
        groups.setdefault(tuple(getattr(row, g) for g in group_by), []).append(row)
    out = []
    for key, members in groups.items():
        entry = dict(zip(group_by, key))
        entry["n"] = len(members)
        for crit in CRITERIA:
            entry[f"{crit}_mean"], entry[f"{crit}_std"] = _mean_std([getattr(m, crit) for m in members])
        out.append(entry)
    out.sort(key=lambda e: sort_key(e) if "framework" in e else tuple(e[g] for g in group_by))
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """One cell of the grid: everything needed to reproduce a single run."""

    framework: str
    detector: str
    classifier: str
    n_drifts: int
    delta: int
    seed: int
    stream: StreamConfig = field(default_factory=StreamConfig)
    delay_kind: str = "constant"
    delay_low: int | None = None
    delay_high: int | None = None

    @property
    def stream_config(self):
        base = self.stream.to_dict()
        base.update(n_drifts=self.n_drifts, seed=self.seed)
        return StreamConfig(**base)

    @property
    def policy(self):
        return DelayPolicy(self.delay_kind, self.delta, self.delay_low, self.delay_high)

    def key(self):
        return tuple(getattr(self, k) for k in RUN_KEYS)


@dataclass(frozen=True)
class GridSpec:
    frameworks: tuple = FRAMEWORKS
    detectors: tuple = ("DDM", "OCDD", "MD3", "ORACLE")
    classifiers: tuple = ("GNB", "MLP", "HT")
    drift_counts: tuple = (5, 10, 15)
    deltas: tuple = (1, 10, 20, 60)
    seeds: tuple = tuple(range(10))
    stream: StreamConfig = field(default_factory=StreamConfig)
    delay_kind: str = "constant"
    delay_low: int | None = None
    delay_high: int | None = None

    def pairs(self):
        """Compatible (framework, detector) pairs; CR runs once, without a detector."""
        out = []
        for fw in self.frameworks:
            if fw == "CR":
                out.append((fw, "none"))
            else:
                out.extend((fw, d) for d in self.detectors if is_compatible(fw, d))
        return out

    def expand(self):
        """All runs of the grid, ordered so runs sharing a stream are adjacent."""
        runs = []
        for n_drifts, seed in itertools.product(self.drift_counts, self.seeds):
            for (fw, det), clf, delta in itertools.product(self.pairs(), self.classifiers, self.deltas):
                runs.append(ExperimentConfig(
                    fw, det, clf, n_drifts, delta, seed, self.stream,
                    self.delay_kind, self.delay_low, self.delay_high,
                ))
        return runs


def default_grid():
    """Four frameworks with DDM/OCDD/MD3 and the Oracle, three learners,
    5/10/15 sudden drifts, delays 1/10/20/60 and ten replications."""
    return GridSpec()


__all__ = [
    "CRITERIA", "ExperimentConfig", "GridSpec", "RUN_KEYS", "SummaryRow", "aggregate",
    "balanced_accuracy", "default_grid", "sort_key", "summarize",
]
