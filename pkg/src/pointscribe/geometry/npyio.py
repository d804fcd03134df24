"""Minimal `.npy` version 1.0 writer/reader for point-cloud arrays.

The writer emits exactly the reference layout: ``\\x93NUMPY``, version bytes
``01 00``, a little-endian uint16 header length, the header dict text padded
with spaces so the full preamble is a multiple of 64 bytes and terminated by
a newline, then row-major little-endian float32 data. Bytes are golden-tested
against the reference array library's own output.
"""
from __future__ import annotations

import ast
import io
import struct
from typing import BinaryIO

import numpy as np

from ..model import PointCloud

MAGIC = b"\x93NUMPY"
_VERSION = b"\x01\x00"
_ALIGN = 64


def _header_bytes(shape: tuple[int, ...]) -> bytes:
    header = ("{'descr': '<f4', 'fortran_order': False, 'shape': %s, }" % (repr(shape),)).encode("latin1")
    # +1 for the terminating newline; pad so the whole preamble (magic +
    # version + 2-byte length + header) lands on a 64-byte boundary.
    hlen = len(header) + 1
    padlen = _ALIGN - ((len(MAGIC) + len(_VERSION) + 2 + hlen) % _ALIGN)
    return header + b" " * padlen + b"\n"


def write_npy(cloud: PointCloud, sink: BinaryIO | str) -> int:
    """Serialize a cloud to `.npy`; returns the number of bytes written."""
    arr = np.ascontiguousarray(np.asarray(cloud.points), dtype="<f4")
    header = _header_bytes(arr.shape)
    blob = MAGIC + _VERSION + struct.pack("<H", len(header)) + header + arr.tobytes(order="C")
    if isinstance(sink, str):
        with open(sink, "wb") as fh:
            fh.write(blob)
    else:
        sink.write(blob)
    return len(blob)


def npy_bytes(cloud: PointCloud) -> bytes:
    buf = io.BytesIO()
    write_npy(cloud, buf)
    return buf.getvalue()


def read_npy(source: BinaryIO | str | bytes) -> np.ndarray:
    """Read back a version-1.0 `.npy` float32 array (the writer's inverse)."""
    if isinstance(source, str):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    if data[:6] != MAGIC:
        raise ValueError("not an .npy file (bad magic)")
    if data[6:8] != _VERSION:
        raise ValueError(f"unsupported .npy version {data[6]}.{data[7]}")
    (hlen,) = struct.unpack("<H", data[8:10])
    meta = ast.literal_eval(data[10 : 10 + hlen].decode("latin1"))
    if meta["fortran_order"]:
        raise ValueError("fortran-ordered arrays are not supported")
    dtype = np.dtype(meta["descr"])
    shape = tuple(meta["shape"])
    count = int(np.prod(shape)) if shape else 1
    return np.frombuffer(data, dtype=dtype, count=count, offset=10 + hlen).reshape(shape)
