"""Experiment configuration, the sweep runner and result files."""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError
from .evaluation import (
    CRITERIA, RUN_KEYS, ExperimentConfig, GridSpec, SummaryRow, aggregate, default_grid, sort_key,
    summarize,
)
from .frameworks import FRAMEWORKS, check_pairing, run
from .streams import StreamConfig, generate_stream

CONFIG_KEYS = ("streams", "frameworks", "detectors", "classifiers", "deltas", "seeds",
               "hyperparameters", "output", "delay", "runs")
STREAM_KEYS = ("n_chunks", "chunk_size", "n_features", "n_informative", "n_drifts",
               "drift_dynamic", "gradual_width")
HYPER_KEYS = ("classifiers", "detectors", "epochs")
OUTPUT_KEYS = ("dir", "per_chunk", "plots", "traces")
TRACE_MODES = ("first", "all", "none")

RESULT_COLUMNS = RUN_KEYS + ("chunk", "bac", "label_request", "trained", "drift_detected", "cold_start")
SUMMARY_COLUMNS = RUN_KEYS + CRITERIA
AGGREGATE_GROUP = ("framework", "detector", "classifier", "n_drifts", "delta")


@dataclass
class Plan:
    """A fully resolved experiment: the runs plus everything they share."""

    runs: list
    hyperparameters: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)
    seed_offset: int = 0

    def snapshot(self):
        """JSON-ready description that reproduces every run."""
        return {
            "version": __version__,
            "config": self.source,
            "seed_offset": self.seed_offset,
            "hyperparameters": self.hyperparameters,
            "n_runs": len(self.runs),
        }


@dataclass
class RunResult:
    config: ExperimentConfig
    summary: SummaryRow
    bac: np.ndarray
    flags: np.ndarray  # (n_chunks, 4) uint8: requested, trained, drift, cold start


# ----------------------------------------------------------------- config


def _require(mapping, allowed, where):
    if not isinstance(mapping, dict):
        raise ConfigurationError(f"{where}: expected an object, got {type(mapping).__name__}")
    for key in mapping:
        if key not in allowed:
            raise ConfigurationError(f"{where}: unknown key {key!r}")


def _int_list(value, key, minimum=0):
    values = value if isinstance(value, list) else [value]
    for v in values:
        if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
            raise ConfigurationError(f"{key}: expected integers >= {minimum}, got {v!r}")
    return tuple(values)


def _name_list(value, key, allowed):
    values = value if isinstance(value, list) else [value]
    for v in values:
        if v not in allowed:
            raise ConfigurationError(f"{key}: unknown value {v!r}, expected one of {list(allowed)}")
    return tuple(values)


def _seeds(value):
    if isinstance(value, dict):
        _require(value, ("start", "count"), "seeds")
        start = _int_list(value.get("start", 0), "seeds.start")[0]
        count = _int_list(value.get("count", 1), "seeds.count", 1)[0]
        return tuple(range(start, start + count))
    return _int_list(value, "seeds")


def plan_from_dict(raw: dict, seed_offset: int = 0) -> Plan:
    """Validate a config mapping and expand it into a :class:`Plan`.

    Raises:
        ConfigurationError: naming the offending key.
    """
    _require(raw, CONFIG_KEYS, "config")
    streams = dict(raw.get("streams", {}))
    _require(streams, STREAM_KEYS, "streams")
    drift_counts = _int_list(streams.pop("n_drifts", [5, 10, 15]), "streams.n_drifts")
    try:
        base = StreamConfig(**streams)
        for k in drift_counts:
            replace(base, n_drifts=k)
    except TypeError as exc:
        raise ConfigurationError(f"streams: {exc}") from None

    hyper = raw.get("hyperparameters", {})
    _require(hyper, HYPER_KEYS, "hyperparameters")
    for section in ("classifiers", "detectors"):
        _require(hyper.get(section, {}), ("GNB", "MLP", "HT", "DDM", "OCDD", "MD3"), f"hyperparameters.{section}")
    epochs = hyper.get("epochs", {})
    if not isinstance(epochs, int):
        _require(epochs, FRAMEWORKS, "hyperparameters.epochs")

    output = dict(raw.get("output", {}))
    _require(output, OUTPUT_KEYS, "output")
    if output.get("traces", "first") not in TRACE_MODES:
        raise ConfigurationError(f"output.traces: expected one of {list(TRACE_MODES)}")

    delay = raw.get("delay", {"kind": "constant"})
    _require(delay, ("kind", "low", "high"), "delay")
    if delay.get("kind", "constant") not in ("constant", "uniform"):
        raise ConfigurationError(f"delay.kind: unknown value {delay.get('kind')!r}")

    grid = GridSpec(
        frameworks=_name_list(raw.get("frameworks", list(FRAMEWORKS)), "frameworks", FRAMEWORKS),
        detectors=_name_list(raw.get("detectors", ["DDM", "OCDD", "MD3", "ORACLE"]), "detectors",
                             ("DDM", "OCDD", "MD3", "ORACLE")),
        classifiers=_name_list(raw.get("classifiers", ["GNB", "MLP", "HT"]), "classifiers", ("GNB", "MLP", "HT")),
        drift_counts=drift_counts,
        deltas=_int_list(raw.get("deltas", [1, 10, 20, 60]), "deltas"),
        seeds=tuple(s + seed_offset for s in _seeds(raw.get("seeds", list(range(10))))),
        stream=base,
        delay_kind=delay.get("kind", "constant"),
        delay_low=delay.get("low"),
        delay_high=delay.get("high"),
    )
    if "runs" in raw:
        runs = _explicit_runs(raw["runs"], grid, seed_offset)
    else:
        runs = grid.expand()
    if not runs:
        raise ConfigurationError("config: the grid expands to zero runs")
    for r in runs:
        _check_run(r)
    return Plan(runs=runs, hyperparameters=hyper, output=output, source=raw, seed_offset=seed_offset)


def _explicit_runs(items, grid, seed_offset):
    if not isinstance(items, list):
        raise ConfigurationError("runs: expected a list of run objects")
    runs = []
    for k, item in enumerate(items):
        where = f"runs[{k}]"
        _require(item, RUN_KEYS, where)
        missing = [key for key in RUN_KEYS if key not in item]
        if missing:
            raise ConfigurationError(f"{where}: missing key {missing[0]!r}")
        try:
            check_pairing(item["framework"], item["detector"])
        except ConfigurationError as exc:
            raise ConfigurationError(f"{where}: {exc}") from None
        _name_list(item["classifier"], f"{where}.classifier", ("GNB", "MLP", "HT"))
        runs.append(ExperimentConfig(
            item["framework"], item["detector"] or "none", item["classifier"],
            _int_list(item["n_drifts"], f"{where}.n_drifts")[0],
            _int_list(item["delta"], f"{where}.delta")[0],
            _int_list(item["seed"], f"{where}.seed")[0] + seed_offset,
            grid.stream, grid.delay_kind, grid.delay_low, grid.delay_high,
        ))
    return runs


def _check_run(cfg: ExperimentConfig):
    try:
        cfg.stream_config
        cfg.policy
    except (ConfigurationError, ValueError) as exc:
        raise ConfigurationError(f"run {cfg.key()}: {exc}") from None
    if cfg.framework == "TR_S" and cfg.policy.min_delay < 1:
        raise ConfigurationError(f"run {cfg.key()}: TR_S needs delta >= 1")


def load_plan(path, seed_offset: int = 0) -> Plan:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    return plan_from_dict(raw, seed_offset)


def preset_plan(seed_offset: int = 0) -> Plan:
    grid = default_grid()
    raw = {
        "streams": {**{k: v for k, v in grid.stream.to_dict().items() if k in STREAM_KEYS},
                    "n_drifts": list(grid.drift_counts)},
        "frameworks": list(grid.frameworks),
        "detectors": list(grid.detectors),
        "classifiers": list(grid.classifiers),
        "deltas": list(grid.deltas),
        "seeds": list(grid.seeds),
    }
    return plan_from_dict(raw, seed_offset)


# ----------------------------------------------------------------- running

# One stream per worker process; consecutive tasks usually share it.
_stream_cache = {}


def _stream_for(config: StreamConfig):
    stream = _stream_cache.get(config)
    if stream is None:
        _stream_cache.clear()
        stream = _stream_cache[config] = generate_stream(config)
    return stream


def execute(cfg: ExperimentConfig, hyperparameters=None, stream=None) -> RunResult:
    """Run one grid cell and pack its chunk logs into arrays."""
    hyper = hyperparameters or {}
    stream = stream if stream is not None else _stream_for(cfg.stream_config)
    logs = run(
        cfg.framework, stream, cfg.classifier, cfg.detector, cfg.policy, seed=cfg.seed,
        classifier_params=hyper.get("classifiers", {}).get(cfg.classifier),
        detector_params=hyper.get("detectors", {}).get(cfg.detector),
        epochs=hyper.get("epochs") or None,
    )
    bac = np.fromiter((log.bac for log in logs), dtype=float, count=len(logs))
    flags = np.array([(log.label_requested, log.trained, log.drift_detected, log.cold_start) for log in logs],
                     dtype=np.uint8)
    return RunResult(cfg, summarize(logs, cfg), bac, flags)


def _execute_packed(args):
    return execute(*args)


def run_plan(plan: Plan, jobs: int = 1, progress=None) -> list:
    """Execute every run of ``plan`` and return results sorted by run key.

    Args:
        jobs: worker processes; 1 runs inline.
        progress: optional callable receiving the number of finished runs.
    """
    tasks = [(cfg, plan.hyperparameters) for cfg in plan.runs]
    results = []
    if jobs <= 1:
        for k, task in enumerate(tasks):
            results.append(_execute_packed(task))
            if progress:
                progress(k + 1)
    else:
        # Runs of one stream are adjacent, so batches mostly reuse the worker's cached stream.
        chunksize = max(1, min(len(tasks) // (4 * jobs) or 1, 84))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for k, res in enumerate(pool.map(_execute_packed, tasks, chunksize=chunksize)):
                results.append(res)
                if progress:
                    progress(k + 1)
    results.sort(key=lambda r: sort_key(r.config))
    return results


# ----------------------------------------------------------------- writing


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_results(results, path):
    """Per-chunk CSV, one row per chunk per run."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(RESULT_COLUMNS) + "\n")
        for res in results:
            prefix = ",".join(str(v) for v in res.config.key())
            lines = [
                f"{prefix},{i},{b!r},{f[0]},{f[1]},{f[2]},{f[3]}\n"
                for i, (b, f) in enumerate(zip(res.bac.tolist(), res.flags.tolist()))
            ]
            fh.writelines(lines)


def write_summary(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in sorted(rows, key=sort_key):
            w.writerow([_fmt(getattr(row, c)) for c in SUMMARY_COLUMNS])


def write_aggregate(table, path):
    columns = list(AGGREGATE_GROUP) + ["n"] + [f"{c}_{s}" for c in CRITERIA for s in ("mean", "std")]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for entry in table:
            w.writerow([_fmt(entry[c]) for c in columns])


def read_summary(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(SummaryRow(
                rec["framework"], rec["detector"], rec["classifier"], int(rec["n_drifts"]),
                int(rec["delta"]), int(rec["seed"]), float(rec["mean_bac"]),
                float(rec["label_request_fraction"]), float(rec["trained_fraction"]), int(rec["detections"]),
            ))
    return rows


def default_output_dir():
    return Path(os.environ.get("DELAYSTREAM_OUT", "delaystream-out"))


@dataclass
class RunArtifacts:
    results: Path | None
    summary: Path
    aggregate: Path
    plots: Path | None
    config: Path
    version: str
    wall_time: float
    runs: list = field(default=None, repr=False)  # in-memory RunResult list, not persisted


def run_experiment(plan: Plan, out_dir=None, jobs: int = 1, progress=None) -> RunArtifacts:
    """Execute ``plan`` and write every output file into ``out_dir``."""
    from .report import emit_report

    out = Path(out_dir or plan.output.get("dir") or default_output_dir())
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    results = run_plan(plan, jobs=jobs, progress=progress)

    config_path = out / "config.json"
    config_path.write_text(json.dumps(plan.snapshot(), indent=2, sort_keys=True) + "\n")
    results_path = None
    if plan.output.get("per_chunk", True):
        results_path = out / "results.csv"
        write_results(results, results_path)
    rows = [r.summary for r in results]
    write_summary(rows, out / "summary.csv")
    write_aggregate(aggregate(rows, AGGREGATE_GROUP), out / "aggregate.csv")
    plots = None
    if plan.output.get("plots", True):
        plots = emit_report(out, results=results, traces=plan.output.get("traces", "first"))
    wall = time.perf_counter() - start
    (out / "manifest.json").write_text(json.dumps(
        {"version": __version__, "runs": len(results), "jobs": jobs, "wall_time_s": round(wall, 3)},
        indent=2, sort_keys=True) + "\n")
    return RunArtifacts(results_path, out / "summary.csv", out / "aggregate.csv", plots, config_path,
                        __version__, wall, results)
