import json
import struct

import numpy as np
import pytest

from wignerfio.tensorio import DTYPE, MAGIC, read_tensor, write_tensor


def _sample(rng):
    v = rng.normal(size=(3, 4, 2, 2)) + 1j * rng.normal(size=(3, 4, 2, 2))
    coords = [np.arange(n) * 0.5 - 1 for n in v.shape]
    return v, coords


def test_round_trip_bit_exact(tmp_path, rng):
    v, coords = _sample(rng)
    hdr = write_tensor(tmp_path / "t.wft", v, ("x", "xi", "y", "eta"), coords, {"route": "direct"})
    out, hdr2 = read_tensor(tmp_path / "t.wft")
    assert np.array_equal(out, v)
    assert hdr2 == json.loads(json.dumps(hdr))
    assert hdr2["provenance"] == {"route": "direct"}


def test_layout_is_documented_format(tmp_path, rng):
    v, coords = _sample(rng)
    write_tensor(tmp_path / "t.wft", v, ("x", "xi", "y", "eta"), coords)
    raw = (tmp_path / "t.wft").read_bytes()
    assert raw[:8] == MAGIC
    (n,) = struct.unpack("<Q", raw[8:16])
    header = json.loads(raw[16:16 + n])
    assert header["shape"] == [3, 4, 2, 2]
    assert header["dtype"] == DTYPE
    assert header["extents"][1] == {"start": -1.0, "step": 0.5, "count": 4}
    payload = np.frombuffer(raw[16 + n:], dtype="<f8")
    # interleaved (re, im) in row-major order
    assert payload[0] == v[0, 0, 0, 0].real and payload[1] == v[0, 0, 0, 0].imag
    assert payload[2] == v[0, 0, 0, 1].real


def test_bad_magic_rejected(tmp_path):
    p = tmp_path / "junk.wft"
    p.write_bytes(b"NOTATENS" + b"\0" * 16)
    with pytest.raises(ValueError):
        read_tensor(p)


def test_axis_count_checked(tmp_path):
    with pytest.raises(ValueError):
        write_tensor(tmp_path / "t.wft", np.zeros((2, 2)), ("x",), [np.arange(2)])


def test_header_is_deterministic(tmp_path, rng):
    v, coords = _sample(rng)
    write_tensor(tmp_path / "a.wft", v, ("x", "xi", "y", "eta"), coords, {"b": 1, "a": 2})
    write_tensor(tmp_path / "b.wft", v, ("x", "xi", "y", "eta"), coords, {"a": 2, "b": 1})
    assert (tmp_path / "a.wft").read_bytes() == (tmp_path / "b.wft").read_bytes()
