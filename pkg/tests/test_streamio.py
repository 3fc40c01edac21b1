import json
import struct

import numpy as np
import pytest

from delaystream.streamio import MAGIC, read_stream, sidecar_path, write_stream
from delaystream.streams import StreamConfig, generate_stream


@pytest.fixture
def small():
    return generate_stream(StreamConfig(n_chunks=7, chunk_size=6, n_features=3, n_informative=2, n_drifts=2, seed=9))


def test_layout_by_hand(small, tmp_path):
    path = tmp_path / "s.dbs"
    write_stream(small, path)
    raw = path.read_bytes()
    assert raw[:4] == MAGIC
    assert struct.unpack_from("<III", raw, 4) == (7, 6, 3)
    per_chunk = 6 * 3 * 8 + 6 + 4
    assert len(raw) == 16 + 7 * per_chunk
    # chunk 3: float64 row-major features, u8 labels, u32 concept id
    off = 16 + 3 * per_chunk
    X = np.frombuffer(raw, "<f8", 18, off).reshape(6, 3)
    y = np.frombuffer(raw, "u1", 6, off + 144)
    (cid,) = struct.unpack_from("<I", raw, off + 150)
    assert np.array_equal(X, small[3].X) and np.array_equal(y, small[3].y) and cid == small[3].concept_id
    meta = json.loads(sidecar_path(path).read_text())
    assert meta["drift_chunks"] == list(small.drift_chunks)
    assert meta["config"] == small.config.to_dict()


def test_round_trip(small, tmp_path):
    path = tmp_path / "s.dbs"
    write_stream(small, path)
    back = read_stream(path)
    assert back.config == small.config and back.drift_chunks == small.drift_chunks
    for a, b in zip(small, back):
        assert a.X.tobytes() == b.X.tobytes()
        assert np.array_equal(a.y, b.y) and a.concept_id == b.concept_id


def test_corrupt_files(small, tmp_path):
    path = tmp_path / "s.dbs"
    write_stream(small, path)
    raw = path.read_bytes()
    path.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ValueError, match="magic"):
        read_stream(path)
    path.write_bytes(raw[:-1])
    with pytest.raises(ValueError):
        read_stream(path)
