"""Versioned, checksummed weight files (``.twt``).

Layout: magic, version, u32 JSON header length, JSON header (architecture
tag, config, tensor manifest), raw little-endian tensor blobs in manifest
order, SHA-256 digest of everything before it.  Round-trips are bit-exact
and loading verifies both integrity and architecture.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from .models import build_model

_MAGIC = b"WTWT"
_VERSION = 1


class WeightFormatError(ValueError):
    """Not a weight file, or the header is malformed."""


class WeightVersionError(WeightFormatError):
    """Weight file written by an incompatible format version."""


class WeightChecksumError(WeightFormatError):
    """Weight file payload fails its integrity digest."""


class ArchitectureMismatchError(WeightFormatError):
    """Weight file holds a different architecture than requested."""


_DTYPES = {"f4": "<f4", "f8": "<f8"}


def save_params(path, model) -> None:
    state = model.state_dict()
    manifest = []
    blobs = []
    for name, arr in state.items():
        tag = "f8" if arr.dtype == np.float64 else "f4"
        manifest.append({"name": name, "shape": list(arr.shape), "dtype": tag})
        blobs.append(np.ascontiguousarray(arr, dtype=_DTYPES[tag]).tobytes())
    header = json.dumps({"arch": model.arch, "config": model.config_dict,
                         "tensors": manifest}).encode()
    digest = hashlib.sha256()
    with open(path, "wb") as fh:
        for chunk in (_MAGIC, struct.pack("<HI", _VERSION, len(header)),
                      header, *blobs):
            digest.update(chunk)
            fh.write(chunk)
        fh.write(digest.digest())


def load_params(path, expect_arch: str | None = None, dtype=None):
    """Rebuild a model from a weight file; rejects mismatched shapes."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 10 or blob[:4] != _MAGIC:
        raise WeightFormatError("not a .twt weight file")
    version, hlen = struct.unpack_from("<HI", blob, 4)
    if version != _VERSION:
        raise WeightVersionError(f"unsupported weight version {version}")
    if len(blob) < 10 + hlen + 32:
        raise WeightFormatError("weight file truncated")
    if hashlib.sha256(blob[:-32]).digest() != blob[-32:]:
        raise WeightChecksumError("weight file integrity digest mismatch")
    try:
        header = json.loads(blob[10:10 + hlen])
    except json.JSONDecodeError as exc:
        raise WeightFormatError(f"corrupt weight header: {exc}") from exc
    arch = header["arch"]
    if expect_arch is not None and arch != expect_arch:
        raise ArchitectureMismatchError(
            f"weight file holds a {arch!r} model, expected {expect_arch!r}")
    file_dtype = np.float64 if any(t["dtype"] == "f8"
                                   for t in header["tensors"]) else np.float32
    model = build_model(arch, header["config"], seed=0,
                        dtype=dtype or file_dtype)
    state = {}
    off = 10 + hlen
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        dt = np.dtype(_DTYPES[entry["dtype"]])
        nbytes = int(np.prod(shape)) * dt.itemsize if shape else dt.itemsize
        if off + nbytes > len(blob) - 32:
            raise WeightFormatError(f"tensor {entry['name']} truncated")
        arr = np.frombuffer(blob, dtype=dt, count=int(np.prod(shape)),
                            offset=off).reshape(shape)
        state[entry["name"]] = arr.astype(model.dtype, copy=False)
        off += nbytes
    model.load_state_dict(state)
    return model
