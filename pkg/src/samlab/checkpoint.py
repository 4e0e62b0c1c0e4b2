"""Single-file binary checkpoints for flat parameter vectors.

Layout on disk, all integers little-endian:

    8 bytes   magic b"SAMLCKPT"
    u32       format version (currently 1)
    u32       header length in bytes
    header    UTF-8 JSON: {"total": int, "layout": [{"name", "shape", "offset"}, ...]}
    payload   total float64 values, little-endian

The JSON header keeps the file self-describing: a checkpoint can be probed
without the config that produced it.
"""

import json
import struct
from pathlib import Path
from typing import Union

import numpy as np

from .errors import CheckpointError, LengthError, NumericError
from .params import LayoutEntry, ParameterVector, validate_layout

MAGIC = b"SAMLCKPT"
VERSION = 1


def save(path: Union[str, Path], vector: ParameterVector) -> None:
    header = {
        "total": len(vector),
        "layout": [
            {"name": e.name, "shape": list(e.shape), "offset": e.offset}
            for e in vector.layout
        ],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = np.ascontiguousarray(vector.data, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)


def load(path: Union[str, Path]) -> ParameterVector:
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    with fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise CheckpointError(f"not a checkpoint file: magic {magic!r} != {MAGIC!r}")
        fixed = fh.read(8)
        if len(fixed) != 8:
            raise LengthError("truncated checkpoint header", expected=8, found=len(fixed))
        version, header_len = struct.unpack("<II", fixed)
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}, expected {VERSION}")
        header_bytes = fh.read(header_len)
        if len(header_bytes) != header_len:
            raise LengthError("truncated checkpoint header",
                              expected=header_len, found=len(header_bytes))
        header = json.loads(header_bytes.decode("utf-8"))
        total = int(header["total"])
        layout = tuple(
            LayoutEntry(name=item["name"], shape=tuple(int(s) for s in item["shape"]),
                        offset=int(item["offset"]))
            for item in header["layout"]
        )
        if validate_layout(layout) != total:
            raise CheckpointError(
                f"checkpoint header declares {total} values but the layout "
                f"describes {validate_layout(layout)}")
        payload = fh.read(total * 8)
        if len(payload) != total * 8:
            raise LengthError("truncated checkpoint payload",
                              expected=total * 8, found=len(payload))
        extra = fh.read(1)
        if extra:
            raise CheckpointError("trailing bytes after checkpoint payload")
    data = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    if not np.all(np.isfinite(data)):
        raise NumericError("checkpoint payload")
    return ParameterVector(data, layout)
