"""Binary tensor container: a JSON header followed by little-endian arrays.

Byte layout::

    offset 0   4 bytes   magic b"LBFT"
    offset 4   4 bytes   header length H, unsigned little-endian
    offset 8   H bytes   UTF-8 JSON header
    offset 8+H           tensor blob

The header is ``{"meta": {...}, "tensors": [{"name", "dtype", "shape",
"offset", "nbytes"}, ...]}``.  ``offset`` counts from the start of the
blob, ``dtype`` is ``"<f8"`` or ``"<i8"``, arrays are C-ordered.
"""

from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"LBFT"
DTYPES = ("<f8", "<i8")


class TensorFileError(ValueError):
    pass


def encode(tensors: dict, meta: dict | None = None) -> bytes:
    entries = []
    chunks = []
    offset = 0
    for name, arr in tensors.items():
        arr = np.asarray(arr)
        dtype = "<i8" if np.issubdtype(arr.dtype, np.integer) or arr.dtype == bool else "<f8"
        data = np.ascontiguousarray(arr, dtype=dtype).tobytes()
        entries.append({"name": name, "dtype": dtype, "shape": list(arr.shape), "offset": offset, "nbytes": len(data)})
        chunks.append(data)
        offset += len(data)
    header = json.dumps({"meta": meta or {}, "tensors": entries}, sort_keys=True).encode()
    return MAGIC + struct.pack("<I", len(header)) + header + b"".join(chunks)


def decode(buf: bytes) -> tuple[dict, dict]:
    if len(buf) < 8 or buf[:4] != MAGIC:
        raise TensorFileError("not a tensor container")
    (hlen,) = struct.unpack("<I", buf[4:8])
    try:
        header = json.loads(buf[8 : 8 + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TensorFileError(f"corrupt header: {exc}") from None
    blob = memoryview(buf)[8 + hlen :]
    tensors = {}
    for e in header["tensors"]:
        if e["dtype"] not in DTYPES:
            raise TensorFileError(f"unsupported dtype {e['dtype']}")
        lo, hi = e["offset"], e["offset"] + e["nbytes"]
        if hi > len(blob):
            raise TensorFileError(f"tensor {e['name']} runs past the end of the file")
        arr = np.frombuffer(blob[lo:hi], dtype=e["dtype"]).reshape(e["shape"])
        tensors[e["name"]] = arr.astype(arr.dtype.newbyteorder("="))
    return tensors, header["meta"]


def save(path, tensors: dict, meta: dict | None = None) -> None:
    with open(path, "wb") as fh:
        fh.write(encode(tensors, meta))


def load(path) -> tuple[dict, dict]:
    with open(path, "rb") as fh:
        return decode(fh.read())
