"""Writer for the VSIG embedding container.

The format is the hand-off contract with the analysis toolkit: "VSIG" magic,
1-byte version (=1), little-endian uint32 row and column counts, the payload
as little-endian float32 row-major, then one uint16-length-prefixed UTF-8 id
per row. Byte-for-byte stable given the same inputs.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence, Union

import numpy as np

MAGIC = b"VSIG"
VERSION = 1
_HEADER = struct.Struct("<4sBII")


def write_vsig(
    values: np.ndarray, row_ids: Sequence[str], path: Union[str, Path]
) -> None:
    values = np.ascontiguousarray(values, dtype=np.float32)
    if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
        raise ValueError(f"need a non-empty 2-D matrix, got shape {values.shape}")
    if len(row_ids) != values.shape[0]:
        raise ValueError(f"{len(row_ids)} ids for {values.shape[0]} rows")
    if len(set(row_ids)) != len(row_ids):
        raise ValueError("row ids must be distinct")
    if not np.isfinite(values).all():
        raise ValueError("payload contains non-finite values")
    parts = [_HEADER.pack(MAGIC, VERSION, values.shape[0], values.shape[1])]
    parts.append(values.astype("<f4", copy=False).tobytes(order="C"))
    for rid in row_ids:
        raw = rid.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ValueError(f"row id too long: {rid!r}")
        parts.append(struct.pack("<H", len(raw)))
        parts.append(raw)
    Path(path).write_bytes(b"".join(parts))
