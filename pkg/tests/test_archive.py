import json

import numpy as np
import pytest
import torch

from ednig.archive import read_archive, read_manifest, write_archive
from ednig.errors import ArchiveError, ChecksumError, IncompatibleFormatError


def test_roundtrip_dtypes(tmp_path):
    tensors = {"a": np.arange(6, dtype=np.float32).reshape(2, 3), "b": np.array([1.5, -2.0]),
               "c": torch.tensor([[1, 2]], dtype=torch.int64), "scalar": np.float32(3.0)}
    write_archive(tmp_path / "x", tensors, {"k": 1})
    back, meta = read_archive(tmp_path / "x")
    assert meta == {"k": 1}
    assert list(back) == ["a", "b", "c", "scalar"]
    np.testing.assert_array_equal(back["a"], tensors["a"])
    assert back["b"].dtype == np.float64
    np.testing.assert_array_equal(back["c"], [[1, 2]])
    assert back["scalar"].shape == ()


def test_manifest_layout(tmp_path):
    write_archive(tmp_path / "x", {"w": np.zeros((2, 2), np.float32)})
    m = read_manifest(tmp_path / "x")
    assert m["format"] == "ednig-archive" and m["version"] == 1
    assert m["tensors"][0] == {"name": "w", "dtype": "<f4", "shape": [2, 2], "offset": 0, "nbytes": 16}


def test_overwrite_is_atomic(tmp_path):
    write_archive(tmp_path / "x", {"w": np.zeros(3)})
    write_archive(tmp_path / "x", {"w": np.ones(3)})
    np.testing.assert_array_equal(read_archive(tmp_path / "x")[0]["w"], 1.0)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["x"]


def test_corruption_detected(tmp_path):
    write_archive(tmp_path / "x", {"w": np.zeros(16, np.float32)})
    blob = tmp_path / "x" / "tensors.bin"
    raw = bytearray(blob.read_bytes())
    raw[5] ^= 0xFF
    blob.write_bytes(bytes(raw))
    with pytest.raises(ChecksumError):
        read_archive(tmp_path / "x")


def test_version_mismatch(tmp_path):
    write_archive(tmp_path / "x", {"w": np.zeros(1)})
    mpath = tmp_path / "x" / "manifest.json"
    m = json.loads(mpath.read_text())
    m["version"] = 99
    mpath.write_text(json.dumps(m))
    with pytest.raises(IncompatibleFormatError, match="99"):
        read_archive(tmp_path / "x")


def test_missing(tmp_path):
    with pytest.raises(ArchiveError):
        read_archive(tmp_path / "nothing")
