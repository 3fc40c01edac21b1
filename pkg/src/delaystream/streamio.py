"""Flat binary stream files (``DBS1``) with a JSON sidecar.

Layout, all little-endian: the magic ``b"DBS1"``, then ``n_chunks``,
``chunk_size`` and ``n_features`` as uint32. Each chunk follows as float64
features in row-major order, one uint8 per label and a uint32 concept id.
The sidecar ``<path>.json`` holds the stream config and the drift chunks.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .streams import Chunk, Stream, StreamConfig

MAGIC = b"DBS1"
_HEADER = struct.Struct("<4sIII")


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def _chunk_dtype(chunk_size, n_features):
    return np.dtype([
        ("X", "<f8", (chunk_size, n_features)),
        ("y", "u1", (chunk_size,)),
        ("concept_id", "<u4"),
    ])


def write_stream(stream: Stream, path) -> Path:
    """Write ``stream`` to ``path`` and its metadata to the sidecar; returns the sidecar path."""
    path = Path(path)
    cfg = stream.config
    records = np.empty(len(stream), dtype=_chunk_dtype(cfg.chunk_size, cfg.n_features))
    for k, chunk in enumerate(stream.chunks):
        records[k] = (chunk.X, chunk.y, chunk.concept_id)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, len(stream), cfg.chunk_size, cfg.n_features))
        fh.write(records.tobytes())
    meta = {"format": "DBS1", "config": cfg.to_dict(), "drift_chunks": [int(d) for d in stream.drift_chunks]}
    side = sidecar_path(path)
    side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return side


def read_stream(path) -> Stream:
    """Load a ``DBS1`` file. The config and drift chunks come from the sidecar.

    Per-sample concept assignments are not stored, so every sample of a
    loaded chunk is attributed to the chunk's concept id.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, n_chunks, chunk_size, n_features = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    dtype = _chunk_dtype(chunk_size, n_features)
    if len(raw) != _HEADER.size + n_chunks * dtype.itemsize:
        raise ValueError(f"{path}: expected {n_chunks} chunks of {dtype.itemsize} bytes")
    records = np.frombuffer(raw, dtype=dtype, offset=_HEADER.size)

    meta = json.loads(sidecar_path(path).read_text())
    config = StreamConfig(**meta["config"])
    if (config.n_chunks, config.chunk_size, config.n_features) != (n_chunks, chunk_size, n_features):
        raise ValueError(f"{path}: header disagrees with sidecar config")
    chunks = []
    for i, rec in enumerate(records):
        X = np.array(rec["X"])
        y = rec["y"].astype(np.int64)
        cid = int(rec["concept_id"])
        X.flags.writeable = False
        y.flags.writeable = False
        chunks.append(Chunk(i, X, y, cid, np.full(chunk_size, cid)))
    return Stream(config, tuple(chunks), tuple(meta["drift_chunks"]))
