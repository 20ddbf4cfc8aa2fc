"""Labeled binary section container for fitted models.

Same spirit as the VSIG embedding file: a tiny self-describing header so
any language can parse it. Layout:

    b"VSEC" | u8 version (=1) | u16 section count
    per section:
        u16 name length | name UTF-8
        u8 kind (0 = float64 array, 1 = float32 array, 2 = UTF-8 text)
        u8 ndim (1 or 2; text uses 1)
        u32 rows | u32 cols (1-D arrays and text use cols = 1, rows = length)
        payload, little-endian

Arrays round-trip bit-exactly; section order is preserved.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from .errors import MalformedHeaderError, TruncatedPayloadError

MAGIC = b"VSEC"
VERSION = 1
_HEAD = struct.Struct("<4sBH")
_SECTION = struct.Struct("<BBII")

_KIND_F64 = 0
_KIND_F32 = 1
_KIND_TEXT = 2

Section = Union[np.ndarray, str]


def write_container(sections: Mapping[str, Section], path: Union[str, Path]) -> None:
    parts = [_HEAD.pack(MAGIC, VERSION, len(sections))]
    for name, value in sections.items():
        raw_name = name.encode("utf-8")
        parts.append(struct.pack("<H", len(raw_name)))
        parts.append(raw_name)
        if isinstance(value, str):
            payload = value.encode("utf-8")
            parts.append(_SECTION.pack(_KIND_TEXT, 1, len(payload), 1))
            parts.append(payload)
            continue
        arr = np.asarray(value)
        if arr.ndim not in (1, 2):
            raise ValueError(f"section '{name}': arrays must be 1-D or 2-D")
        if arr.dtype == np.float32:
            kind, dtype = _KIND_F32, "<f4"
        else:
            kind, dtype = _KIND_F64, "<f8"
            arr = arr.astype(np.float64, copy=False)
        rows = arr.shape[0]
        cols = arr.shape[1] if arr.ndim == 2 else 1
        parts.append(_SECTION.pack(kind, arr.ndim, rows, cols))
        parts.append(arr.astype(dtype, copy=False).tobytes(order="C"))
    Path(path).write_bytes(b"".join(parts))


def read_container(path: Union[str, Path]) -> dict[str, Section]:
    raw = Path(path).read_bytes()
    if len(raw) < _HEAD.size:
        raise MalformedHeaderError(f"{path}: too short for a container header")
    magic, version, count = _HEAD.unpack_from(raw, 0)
    if magic != MAGIC:
        raise MalformedHeaderError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise MalformedHeaderError(f"{path}: unsupported version {version}")
    offset = _HEAD.size
    out: dict[str, Section] = {}
    for _ in range(count):
        if offset + 2 > len(raw):
            raise TruncatedPayloadError(f"{path}: truncated section name length")
        (name_len,) = struct.unpack_from("<H", raw, offset)
        offset += 2
        if offset + name_len + _SECTION.size > len(raw):
            raise TruncatedPayloadError(f"{path}: truncated section header")
        name = raw[offset : offset + name_len].decode("utf-8")
        offset += name_len
        kind, ndim, rows, cols = _SECTION.unpack_from(raw, offset)
        offset += _SECTION.size
        if kind == _KIND_TEXT:
            nbytes = rows
        elif kind in (_KIND_F64, _KIND_F32):
            nbytes = rows * cols * (8 if kind == _KIND_F64 else 4)
        else:
            raise MalformedHeaderError(f"{path}: unknown section kind {kind}")
        if offset + nbytes > len(raw):
            raise TruncatedPayloadError(f"{path}: truncated payload in '{name}'")
        payload = raw[offset : offset + nbytes]
        offset += nbytes
        if kind == _KIND_TEXT:
            out[name] = payload.decode("utf-8")
        else:
            dtype = "<f8" if kind == _KIND_F64 else "<f4"
            arr = np.frombuffer(payload, dtype=dtype)
            out[name] = arr.reshape(rows, cols) if ndim == 2 else arr
    if offset != len(raw):
        raise TruncatedPayloadError(f"{path}: {len(raw) - offset} trailing bytes")
    return out
