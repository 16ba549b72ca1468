"""Directory archive of named arrays: ``manifest.json`` + ``tensors.bin``.

The manifest lists every tensor (name, dtype, shape, byte offset) in canonical
order, carries free-form metadata and a SHA-256 of the binary blob. Arrays are
stored little-endian, float32 unless the caller hands in another dtype.
"""
from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import ArchiveError, ChecksumError, IncompatibleFormatError

FORMAT_NAME = "ednig-archive"
FORMAT_VERSION = 1
MANIFEST = "manifest.json"
BLOB = "tensors.bin"


def _to_numpy(value) -> np.ndarray:
    if hasattr(value, "detach"):  # torch.Tensor
        value = value.detach().cpu().numpy()
    arr = np.asarray(value)
    if arr.dtype.kind == "f" and arr.dtype.itemsize not in (4, 8):
        arr = arr.astype(np.float32)
    # astype keeps 0-d shapes (ascontiguousarray promotes them to 1-d)
    return arr.astype(arr.dtype.newbyteorder("<"), order="C", copy=False)


def write_archive(path, tensors: Mapping[str, Any], meta: Mapping[str, Any] | None = None) -> Path:
    """Write ``tensors`` under ``path`` atomically (temp dir, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    entries = []
    hasher = hashlib.sha256()
    tmp = Path(tempfile.mkdtemp(prefix=f".{path.name}.", dir=path.parent))
    os.chmod(tmp, 0o755)
    try:
        offset = 0
        with open(tmp / BLOB, "wb") as fh:
            for name, value in tensors.items():
                arr = _to_numpy(value)
                raw = arr.tobytes(order="C")
                fh.write(raw)
                hasher.update(raw)
                entries.append(
                    {"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape),
                     "offset": offset, "nbytes": len(raw)}
                )
                offset += len(raw)
            fh.flush()
            os.fsync(fh.fileno())
        manifest = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "sha256": hasher.hexdigest(),
            "tensors": entries,
            "meta": dict(meta or {}),
        }
        with open(tmp / MANIFEST, "w") as fh:
            json.dump(manifest, fh, indent=1)
        if path.exists():
            old = path.with_name(f".{path.name}.old")
            if old.exists():
                shutil.rmtree(old)
            os.replace(path, old)
            os.replace(tmp, path)
            shutil.rmtree(old)
        else:
            os.replace(tmp, path)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return path


def read_manifest(path) -> dict:
    path = Path(path)
    mpath = path / MANIFEST
    if not mpath.is_file():
        raise ArchiveError(f"no {MANIFEST} in {path}")
    with open(mpath) as fh:
        manifest = json.load(fh)
    if manifest.get("format") != FORMAT_NAME:
        raise IncompatibleFormatError(f"{path}: not an {FORMAT_NAME} (format={manifest.get('format')!r})")
    if manifest.get("version") != FORMAT_VERSION:
        raise IncompatibleFormatError(
            f"{path}: archive version {manifest.get('version')} != supported {FORMAT_VERSION}"
        )
    return manifest


def read_archive(path) -> tuple[dict[str, np.ndarray], dict]:
    """Return ``(tensors, meta)``; nothing is returned unless the checksum matches."""
    path = Path(path)
    manifest = read_manifest(path)
    blob = (path / BLOB).read_bytes()
    if hashlib.sha256(blob).hexdigest() != manifest["sha256"]:
        raise ChecksumError(f"{path / BLOB}: checksum mismatch, archive is corrupted")
    tensors = {}
    for e in manifest["tensors"]:
        end = e["offset"] + e["nbytes"]
        if end > len(blob):
            raise ChecksumError(f"{path}: tensor {e['name']!r} runs past end of blob")
        arr = np.frombuffer(blob, dtype=np.dtype(e["dtype"]), count=int(np.prod(e["shape"], dtype=np.int64)),
                            offset=e["offset"])
        tensors[e["name"]] = arr.reshape(e["shape"]).astype(np.dtype(e["dtype"]).newbyteorder("="))
    return tensors, manifest["meta"]
